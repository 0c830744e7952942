use std::collections::HashMap;
use std::sync::Arc;

use super::Problem;
use crate::crn::SampleId;
use crate::{Error, Result};

/// Total number of stochastic function evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    total: u64,
}

impl EvalCounter {
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub(crate) fn bump(&mut self) {
        self.total += 1;
    }
}

/// Counted access to a problem's stochastic function for one run.
///
/// Evaluations at base points (unperturbed iterates and line-search trials)
/// are cached by `(x bits, sample id)` until [`Evaluator::advance`] is
/// called, so a value computed by the line search at `x_{k+1}` is reused as
/// a finite-difference base point without being counted twice. Noise
/// vectors are cached per id over the same lifetime.
pub struct Evaluator<'p> {
    problem: &'p Problem,
    counter: EvalCounter,
    budget: Option<u64>,
    values: HashMap<(SampleId, Vec<u64>), f64>,
    noises: HashMap<SampleId, Arc<[f64]>>,
    scratch: Vec<f64>,
    cache_hits: u64,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        Self {
            problem,
            counter: EvalCounter::default(),
            budget: None,
            values: HashMap::new(),
            noises: HashMap::new(),
            scratch: Vec::with_capacity(problem.residual_dim()),
            cache_hits: 0,
        }
    }

    /// Refuse evaluations beyond `max_evals`.
    pub fn with_budget(mut self, max_evals: u64) -> Self {
        self.budget = Some(max_evals);
        self
    }

    pub fn problem(&self) -> &'p Problem {
        self.problem
    }

    pub fn counter(&self) -> EvalCounter {
        self.counter
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.total
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits
    }

    /// Drops cached values; call whenever the iterate moves on.
    pub fn advance(&mut self) {
        self.values.clear();
        self.noises.clear();
    }

    pub fn noise(&mut self, id: SampleId) -> Arc<[f64]> {
        let problem = self.problem;
        self.noises
            .entry(id)
            .or_insert_with(|| {
                let mut buf = Vec::new();
                problem.realize(id, &mut buf);
                buf.into()
            })
            .clone()
    }

    /// Uncached counted evaluation. The value may be non-finite; callers
    /// decide whether that is fatal.
    pub fn value(&mut self, x: &[f64], noise: &[f64]) -> Result<f64> {
        if let Some(budget) = self.budget {
            if self.counter.total >= budget {
                return Err(Error::BudgetExhausted);
            }
        }
        self.counter.bump();
        Ok(self.problem.value_with_noise(x, noise, &mut self.scratch))
    }

    /// Cached evaluation of `f(x, zeta(id))` at a base point.
    pub fn value_at(&mut self, x: &[f64], id: SampleId) -> Result<f64> {
        let key = (id, x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        if let Some(&v) = self.values.get(&key) {
            self.cache_hits += 1;
            return Ok(v);
        }
        let noise = self.noise(id);
        let v = self.value(x, &noise)?;
        self.values.insert(key, v);
        Ok(v)
    }
}
