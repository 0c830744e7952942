//! Benchmark objectives.
//!
//! A [`Problem`] couples a deterministic map with a noise model. Smooth
//! problems are nonlinear least squares `F(x) = sum_j phi_j(x)^2` observed
//! through
//!
//! - absolute noise: `f(x, z) = sum_j ((phi_j + z_j)^2 - sigma^2)`,
//! - relative noise: `f(x, z) = sum_j phi_j^2 (1 + z_j)^2 / (1 + sigma^2)`,
//!
//! with `z ~ N(0, sigma^2 I_p)`; both have expectation `F`. The nonsmooth
//! problem is described in [`nonsmooth`].

mod dual;
mod evaluator;
pub mod mgh;
pub mod nonsmooth;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dual::{Dual, Real};
pub use evaluator::{EvalCounter, Evaluator};
pub use mgh::MghProblem;
pub use nonsmooth::{make_nonsmooth_instance, L1Data};

use crate::crn::{realize_noise_into, NoiseDist, SampleId};
use crate::{Error, Result};

/// Names accepted by [`Problem::from_name`].
pub const PROBLEM_NAMES: [&str; 6] = ["chebyquad", "osborne", "bdqrtic", "cube", "heart8ls", "l1rand"];

/// Dimension of the `l1rand` instance (`d = p`).
pub const L1RAND_DIM: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Absolute { sigma: f64 },
    Relative { sigma: f64 },
    /// `zeta ~ U[-1, 1]^p` entering an absolute value.
    UniformL1,
    /// No noise: every sample sees the deterministic function.
    Exact,
}

impl NoiseModel {
    pub fn dist(&self) -> Option<NoiseDist> {
        match *self {
            NoiseModel::Absolute { sigma } | NoiseModel::Relative { sigma } => {
                Some(NoiseDist::Gaussian { sigma })
            }
            NoiseModel::UniformL1 => Some(NoiseDist::Uniform),
            NoiseModel::Exact => None,
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            NoiseModel::Absolute { sigma } | NoiseModel::Relative { sigma } => Some(sigma),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.sigma() {
            Some(s) if !(s > 0.0 && s.is_finite()) => {
                Err(Error::invalid(format!("noise sigma must be positive, got {s}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Absolute { sigma } => write!(f, "abs(sigma={sigma:e})"),
            NoiseModel::Relative { sigma } => write!(f, "rel(sigma={sigma:e})"),
            NoiseModel::UniformL1 => f.write_str("uniform-l1"),
            NoiseModel::Exact => f.write_str("exact"),
        }
    }
}

pub type ResidualFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type SampleFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
pub type ExpectationFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Objective {
    Mgh(MghProblem),
    Residuals(Arc<ResidualFn>),
    L1(L1Data),
    /// Arbitrary `f(x, zeta)`, used for synthetic test problems.
    Custom { sample: Arc<SampleFn>, expected: Option<Arc<ExpectationFn>> },
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Mgh(m) => write!(f, "Mgh({m:?})"),
            Objective::Residuals(_) => f.write_str("Residuals(..)"),
            Objective::L1(_) => f.write_str("L1(..)"),
            Objective::Custom { .. } => f.write_str("Custom(..)"),
        }
    }
}

/// A stochastic objective `f(x, zeta)` with `E[f(x, zeta)] = F(x)`.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    d: usize,
    p: usize,
    noise: NoiseModel,
    x0: Vec<f64>,
    lipschitz_hint: Option<f64>,
    objective: Objective,
}

impl Problem {
    /// Looks up a registered problem. `instance_seed` only matters for
    /// `l1rand`, which also requires `NoiseModel::UniformL1`.
    pub fn from_name(name: &str, noise: NoiseModel, instance_seed: u64) -> Result<Self> {
        let mgh = match name {
            "chebyquad" => MghProblem::Chebyquad { d: 30, p: 45 },
            "osborne" => MghProblem::Osborne2,
            "bdqrtic" => MghProblem::Bdqrtic { d: 50 },
            "cube" => MghProblem::Cube { d: 20, p: 30 },
            "heart8ls" => MghProblem::Heart8,
            "l1rand" => {
                if noise != NoiseModel::UniformL1 {
                    return Err(Error::invalid("l1rand uses uniform noise only"));
                }
                return Self::l1rand(instance_seed, L1RAND_DIM);
            }
            other => return Err(Error::UnknownProblem(other.to_string())),
        };
        Self::least_squares(mgh, noise)
    }

    /// A smooth benchmark started from ten times its standard start.
    pub fn least_squares(mgh: MghProblem, noise: NoiseModel) -> Result<Self> {
        if matches!(noise, NoiseModel::UniformL1) {
            return Err(Error::invalid("uniform-l1 noise is reserved for the l1 problem"));
        }
        noise.validate()?;
        let name = match mgh {
            MghProblem::Chebyquad { .. } => "chebyquad",
            MghProblem::Osborne2 => "osborne",
            MghProblem::Bdqrtic { .. } => "bdqrtic",
            MghProblem::Cube { .. } => "cube",
            MghProblem::Heart8 => "heart8ls",
        };
        let x0 = mgh.standard_start().into_iter().map(|v| 10.0 * v).collect();
        Ok(Self {
            name: name.to_string(),
            d: mgh.dim(),
            p: mgh.residual_dim(),
            noise,
            x0,
            lipschitz_hint: None,
            objective: Objective::Mgh(mgh),
        })
    }

    /// The nonsmooth instance of size `dim x dim` built from `instance_seed`.
    pub fn l1rand(instance_seed: u64, dim: usize) -> Result<Self> {
        let (data, x0) = make_nonsmooth_instance(instance_seed, dim, dim)?;
        Ok(Self::l1(data, x0))
    }

    pub fn l1(data: L1Data, x0: Vec<f64>) -> Self {
        Self {
            name: "l1rand".to_string(),
            d: data.cols(),
            p: data.rows(),
            noise: NoiseModel::UniformL1,
            lipschitz_hint: Some(data.gradient_lipschitz()),
            x0,
            objective: Objective::L1(data),
        }
    }

    /// A least-squares problem from a user residual map.
    pub fn from_residuals<R>(
        name: &str,
        d: usize,
        p: usize,
        noise: NoiseModel,
        x0: Vec<f64>,
        residuals: R,
    ) -> Result<Self>
    where
        R: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if matches!(noise, NoiseModel::UniformL1) {
            return Err(Error::invalid("uniform-l1 noise is reserved for the l1 problem"));
        }
        noise.validate()?;
        Self::checked(name, d, p, noise, x0, Objective::Residuals(Arc::new(residuals)))
    }

    /// An arbitrary sampled function `f(x, zeta)` with `zeta` drawn from
    /// `noise` (of length `p`). `expected` is the noise-free oracle, if known.
    pub fn custom<S>(
        name: &str,
        d: usize,
        p: usize,
        noise: NoiseModel,
        x0: Vec<f64>,
        sample: S,
        expected: Option<Arc<ExpectationFn>>,
    ) -> Result<Self>
    where
        S: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        noise.validate()?;
        Self::checked(name, d, p, noise, x0, Objective::Custom { sample: Arc::new(sample), expected })
    }

    fn checked(
        name: &str,
        d: usize,
        p: usize,
        noise: NoiseModel,
        x0: Vec<f64>,
        objective: Objective,
    ) -> Result<Self> {
        if d == 0 || p == 0 {
            return Err(Error::invalid("problem dimensions must be positive"));
        }
        if x0.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x0.len() });
        }
        Ok(Self { name: name.to_string(), d, p, noise, x0, lipschitz_hint: None, objective })
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    pub fn with_start(mut self, x0: Vec<f64>) -> Result<Self> {
        self.check_dim(&x0)?;
        self.x0 = x0;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn residual_dim(&self) -> usize {
        self.p
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    pub fn nonsmooth_data(&self) -> Option<&L1Data> {
        match &self.objective {
            Objective::L1(data) => Some(data),
            _ => None,
        }
    }

    pub fn mgh(&self) -> Option<MghProblem> {
        match self.objective {
            Objective::Mgh(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_nonsmooth(&self) -> bool {
        matches!(self.noise, NoiseModel::UniformL1)
    }

    /// Starting point: ten times the standard start for the least-squares
    /// benchmarks, a seeded standard-normal vector for `l1rand`.
    pub fn initial_point(&self) -> Vec<f64> {
        self.x0.clone()
    }

    /// Length of the noise vector realized per sample id.
    pub fn noise_len(&self) -> usize {
        match self.noise {
            NoiseModel::Exact => 0,
            _ => self.p,
        }
    }

    pub fn realize(&self, id: SampleId, out: &mut Vec<f64>) {
        out.resize(self.noise_len(), 0.0);
        if let Some(dist) = self.noise.dist() {
            realize_noise_into(id, dist, out);
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(())
    }

    fn fill_residuals(&self, x: &[f64], out: &mut [f64]) -> bool {
        match &self.objective {
            Objective::Mgh(m) => m.residuals(x, out),
            Objective::Residuals(r) => r(x, out),
            _ => return false,
        }
        true
    }

    /// `phi(x)` for least-squares problems.
    pub fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.p];
        if !self.fill_residuals(x, &mut out) {
            return Err(Error::invalid(format!("{} is not a least-squares problem", self.name)));
        }
        Ok(out)
    }

    /// `f(x, zeta)` for an already realized noise vector. `scratch` is a
    /// residual buffer reused across calls.
    pub fn value_with_noise(&self, x: &[f64], noise: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match &self.objective {
            Objective::L1(data) => data.stochastic_value(x, noise),
            Objective::Custom { sample, .. } => sample(x, noise),
            _ => {
                scratch.resize(self.p, 0.0);
                self.fill_residuals(x, scratch);
                combine_residuals(self.noise, scratch, noise)
            }
        }
    }

    /// One counted evaluation of `f(x, zeta(id))`.
    pub fn stochastic_value(&self, x: &[f64], id: SampleId, counter: &mut EvalCounter) -> Result<f64> {
        self.check_dim(x)?;
        let mut noise = Vec::new();
        self.realize(id, &mut noise);
        counter.bump();
        Ok(self.value_with_noise(x, &noise, &mut Vec::new()))
    }

    /// Noise-free `F(x)`; an oracle for reporting, never used by solvers.
    pub fn expected_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match &self.objective {
            Objective::L1(data) => Ok(data.expected_value(x)),
            Objective::Custom { expected: Some(e), .. } => Ok(e(x)),
            Objective::Custom { expected: None, .. } => {
                Err(Error::invalid(format!("{} has no noise-free oracle", self.name)))
            }
            _ => {
                let r = self.residuals(x)?;
                Ok(r.iter().map(|v| v * v).sum())
            }
        }
    }

    /// Exact `grad F(x)` where available: forward-mode differentiation of the
    /// residuals for least-squares benchmarks, the closed form for `l1rand`.
    pub fn expected_gradient(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        self.check_dim(x)?;
        match &self.objective {
            Objective::L1(data) => Ok(Some(data.expected_gradient(x))),
            Objective::Mgh(m) => {
                let phi = self.residuals(x)?;
                let mut xd: Vec<Dual> = x.iter().map(|&v| Dual::cst(v)).collect();
                let mut out = vec![Dual::cst(0.0); self.p];
                let mut grad = vec![0.0; self.d];
                for j in 0..self.d {
                    xd[j].deriv = 1.0;
                    m.residuals(&xd, &mut out);
                    xd[j].deriv = 0.0;
                    grad[j] = 2.0 * out.iter().zip(&phi).map(|(o, r)| o.deriv * r).sum::<f64>();
                }
                Ok(Some(grad))
            }
            _ => Ok(None),
        }
    }

    pub fn expected_gradient_nonsmooth(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.require_l1()?.expected_gradient(x))
    }

    /// Row-major `d x d`.
    pub fn expected_hessian_nonsmooth(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.require_l1()?.expected_hessian(x)
    }

    fn require_l1(&self) -> Result<&L1Data> {
        self.nonsmooth_data()
            .ok_or_else(|| Error::invalid(format!("{} is not the nonsmooth problem", self.name)))
    }
}

fn combine_residuals(noise: NoiseModel, phi: &[f64], zeta: &[f64]) -> f64 {
    match noise {
        NoiseModel::Absolute { sigma } => {
            let s2 = sigma * sigma;
            phi.iter().zip(zeta).map(|(r, z)| (r + z) * (r + z) - s2).sum()
        }
        NoiseModel::Relative { sigma } => {
            let total: f64 = phi.iter().zip(zeta).map(|(r, z)| r * r * (1.0 + z) * (1.0 + z)).sum();
            total / (1.0 + sigma * sigma)
        }
        NoiseModel::Exact => phi.iter().map(|r| r * r).sum(),
        NoiseModel::UniformL1 => unreachable!("least-squares problems reject uniform-l1 noise"),
    }
}
