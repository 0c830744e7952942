//! Zeroth-order gradient estimators and the variance statistics consumed by
//! the sample-size tests.
//!
//! Per-sample forward differences share the sample's noise vector between
//! the base point and every perturbed point (common random numbers). Batch
//! means are formed component by component with pairwise summation in
//! sample-index order, so results do not depend on evaluation scheduling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::crn::{SampleId, SampleSet};
use crate::lbfgs::LbfgsMemory;
use crate::linalg::{dot, norm_sq, pairwise_mean, pairwise_sum};
use crate::problems::Evaluator;
use crate::{Error, Result};

/// Batch forward-difference gradient with its per-sample constituents.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub mean: Vec<f64>,
    pub per_sample: Vec<Vec<f64>>,
    pub nu: f64,
    pub sample: SampleSet,
    /// `f(x, zeta_i)` for each id, in sample order.
    pub base_values: Vec<f64>,
}

impl GradientEstimate {
    pub fn len(&self) -> usize {
        self.per_sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_sample.is_empty()
    }

    /// Mean of the base values: the subsampled function `F_S(x)`.
    pub fn subsampled_value(&self) -> f64 {
        pairwise_mean(&self.base_values)
    }

    /// Adds fresh samples at the same point, keeping existing ones.
    pub fn augment(&mut self, eval: &mut Evaluator<'_>, x: &[f64], more: &SampleSet) -> Result<()> {
        self.sample.extend(more)?;
        for &id in more.ids() {
            let (g, f0) = fd_sample(eval, x, id, self.nu)?;
            self.per_sample.push(g);
            self.base_values.push(f0);
        }
        self.mean = componentwise_mean(&self.per_sample, x.len());
        Ok(())
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("difference parameter must be positive, got {nu}")));
    }
    Ok(())
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::EvaluationFailure)
    }
}

/// Forward differences for one sample; also returns the base value.
fn fd_sample(eval: &mut Evaluator<'_>, x: &[f64], id: SampleId, nu: f64) -> Result<(Vec<f64>, f64)> {
    let f0 = finite(eval.value_at(x, id)?)?;
    let noise = eval.noise(id);
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for j in 0..x.len() {
        xp[j] = x[j] + nu;
        g[j] = (finite(eval.value(&xp, &noise)?)? - f0) / nu;
        xp[j] = x[j];
    }
    Ok((g, f0))
}

fn componentwise_mean(rows: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut column = vec![0.0; rows.len()];
    (0..d)
        .map(|j| {
            for (c, r) in column.iter_mut().zip(rows) {
                *c = r[j];
            }
            pairwise_mean(&column)
        })
        .collect()
}

/// `(f(x + nu e_j, zeta) - f(x, zeta)) / nu` for every coordinate `j`.
/// Costs `d + 1` evaluations, fewer if the base value is cached.
pub fn fd_gradient_single(eval: &mut Evaluator<'_>, x: &[f64], id: SampleId, nu: f64) -> Result<Vec<f64>> {
    check_nu(nu)?;
    Ok(fd_sample(eval, x, id, nu)?.0)
}

/// Batch mean of the per-sample forward-difference gradients over `set`.
pub fn fd_gradient_batch(
    eval: &mut Evaluator<'_>,
    x: &[f64],
    set: &SampleSet,
    nu: f64,
) -> Result<GradientEstimate> {
    check_nu(nu)?;
    let mut per_sample = Vec::with_capacity(set.len());
    let mut base_values = Vec::with_capacity(set.len());
    for &id in set.ids() {
        let (g, f0) = fd_sample(eval, x, id, nu)?;
        per_sample.push(g);
        base_values.push(f0);
    }
    Ok(GradientEstimate {
        mean: componentwise_mean(&per_sample, x.len()),
        per_sample,
        nu,
        sample: set.clone(),
        base_values,
    })
}

fn require_two(est: &GradientEstimate) -> Result<()> {
    if est.len() < 2 {
        return Err(Error::InsufficientSample(est.len()));
    }
    Ok(())
}

/// `1/(|S|-1) * sum_i ||g_i - g||^2`.
pub fn norm_variance(est: &GradientEstimate) -> Result<f64> {
    require_two(est)?;
    let terms: Vec<f64> = est
        .per_sample
        .iter()
        .map(|gi| gi.iter().zip(&est.mean).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    Ok(pairwise_sum(&terms) / (est.len() - 1) as f64)
}

/// `1/(|S|-1) * sum_i (g_i^T H^2 g - ||H g||^2)^2`, using `H` symmetric so
/// `(H g_i)^T (H g) = g_i^T z` with `z = H (H g)`.
pub fn ipqn_variance(est: &GradientEstimate, memory: &LbfgsMemory) -> Result<f64> {
    require_two(est)?;
    let w = memory.apply_h(&est.mean);
    let z = memory.apply_h(&w);
    let w2 = norm_sq(&w);
    let terms: Vec<f64> = est
        .per_sample
        .iter()
        .map(|gi| {
            let t = dot(gi, &z) - w2;
            t * t
        })
        .collect();
    Ok(pairwise_sum(&terms) / (est.len() - 1) as f64)
}

/// Uniform direction on the unit sphere in `R^d`.
pub fn sphere_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm_sq(&u).sqrt();
        if n > 0.0 {
            return u.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Sphere-smoothing estimate with `t` directions drawn from `rng` and shared
/// by all samples. Costs `|S| (t + 1)` evaluations less cache hits.
pub fn sphere_smoothing_gradient<R: Rng + ?Sized>(
    eval: &mut Evaluator<'_>,
    x: &[f64],
    set: &SampleSet,
    nu: f64,
    t: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::invalid("at least one smoothing direction is required"));
    }
    let directions: Vec<Vec<f64>> = (0..t).map(|_| sphere_direction(x.len(), rng)).collect();
    sphere_smoothing_with_directions(eval, x, set, nu, &directions)
}

/// [`sphere_smoothing_gradient`] with explicit directions.
pub fn sphere_smoothing_with_directions(
    eval: &mut Evaluator<'_>,
    x: &[f64],
    set: &SampleSet,
    nu: f64,
    directions: &[Vec<f64>],
) -> Result<Vec<f64>> {
    check_nu(nu)?;
    let d = x.len();
    if directions.is_empty() || directions.iter().any(|u| u.len() != d) {
        return Err(Error::invalid("directions must be nonempty and match the dimension"));
    }
    let scale = d as f64 / directions.len() as f64;
    let mut per_sample = Vec::with_capacity(set.len());
    let mut xp = vec![0.0; d];
    for &id in set.ids() {
        let f0 = finite(eval.value_at(x, id)?)?;
        let noise = eval.noise(id);
        let mut g = vec![0.0; d];
        for u in directions {
            for ((p, xi), ui) in xp.iter_mut().zip(x).zip(u) {
                *p = xi + nu * ui;
            }
            let slope = (finite(eval.value(&xp, &noise)?)? - f0) / nu;
            for (gj, uj) in g.iter_mut().zip(u) {
                *gj += scale * slope * uj;
            }
        }
        per_sample.push(g);
    }
    Ok(componentwise_mean(&per_sample, d))
}

/// Whether the difference parameter is chosen for smooth or nonsmooth
/// sampled functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdMode {
    Smooth,
    /// `kappa` bounds the ratio of the nonsmooth error to the smooth part.
    Nonsmooth { kappa: f64 },
}

/// Error-minimizing forward-difference parameter: `2 sqrt(eps / L)` when
/// smooth, `2 sqrt(eps / (L (1 + kappa)))` when nonsmooth.
pub fn optimal_fd_parameter(eps_m: f64, lipschitz: f64, mode: FdMode) -> Result<f64> {
    if !(eps_m > 0.0) || !(lipschitz > 0.0) {
        return Err(Error::invalid("noise level and Lipschitz constant must be positive"));
    }
    let denom = match mode {
        FdMode::Smooth => lipschitz,
        FdMode::Nonsmooth { kappa } if kappa >= 0.0 => lipschitz * (1.0 + kappa),
        FdMode::Nonsmooth { kappa } => {
            return Err(Error::invalid(format!("kappa must be nonnegative, got {kappa}")))
        }
    };
    Ok(2.0 * (eps_m / denom).sqrt())
}
