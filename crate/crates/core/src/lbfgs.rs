//! Limited-memory inverse-Hessian approximation.
//!
//! `H` is defined by the stored curvature pairs through
//! `H+ = V^T H V + rho s s^T`, `V = I - rho y s^T`, starting from `kappa I`
//! with `kappa = y^T s / y^T y` of the newest stored pair.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::linalg::{axpy, dot, norm, norm_sq};
use crate::{Error, Result};

/// Pair acceptance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PairRule {
    /// `y^T s > beta1 ||s||^2` and `||s|| > beta2`.
    Smooth { beta1: f64, beta2: f64 },
    /// `y^T s > beta1 ||s||^2` and `||y|| <= m_bound ||s||`.
    Nonsmooth { beta1: f64, m_bound: f64 },
}

impl Default for PairRule {
    fn default() -> Self {
        PairRule::Smooth { beta1: 1e-3, beta2: 0.0 }
    }
}

impl PairRule {
    pub fn beta1(&self) -> f64 {
        match *self {
            PairRule::Smooth { beta1, .. } | PairRule::Nonsmooth { beta1, .. } => beta1,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PairRule::Smooth { beta1, beta2 } => beta1 > 0.0 && beta2 >= 0.0,
            PairRule::Nonsmooth { beta1, m_bound } => beta1 > 0.0 && m_bound > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid curvature-pair rule {self:?}")))
        }
    }

    pub fn accepts(&self, s: &[f64], y: &[f64]) -> bool {
        let ys = dot(y, s);
        let s_norm = norm(s);
        match *self {
            PairRule::Smooth { beta1, beta2 } => ys > beta1 * s_norm * s_norm && s_norm > beta2,
            PairRule::Nonsmooth { beta1, m_bound } => {
                ys > beta1 * s_norm * s_norm && norm(y) <= m_bound * s_norm
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePair {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    /// `1 / (y^T s)`.
    pub rho: f64,
}

/// Bounded FIFO queue of curvature pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsMemory {
    capacity: usize,
    rule: PairRule,
    pairs: VecDeque<CurvaturePair>,
}

impl LbfgsMemory {
    pub fn new(capacity: usize, rule: PairRule) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("memory capacity must be at least 1"));
        }
        rule.validate()?;
        Ok(Self { capacity, rule, pairs: VecDeque::with_capacity(capacity) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn rule(&self) -> PairRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Oldest first.
    pub fn pairs(&self) -> impl ExactSizeIterator<Item = &CurvaturePair> + DoubleEndedIterator {
        self.pairs.iter()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Stores `(s, y)` if the rule accepts it, evicting the oldest pair when
    /// full. Returns whether the pair was stored.
    pub fn try_store(&mut self, s: &[f64], y: &[f64]) -> Result<bool> {
        if s.is_empty() || s.len() != y.len() {
            return Err(Error::invalid("curvature vectors must be nonempty and of equal length"));
        }
        if let Some(first) = self.pairs.front() {
            if first.s.len() != s.len() {
                return Err(Error::DimensionMismatch { expected: first.s.len(), got: s.len() });
            }
        }
        if !self.rule.accepts(s, y) {
            return Ok(false);
        }
        let ys = dot(y, s);
        debug_assert!(norm_sq(y) / ys >= self.rule.beta1());
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(CurvaturePair { s: s.to_vec(), y: y.to_vec(), rho: 1.0 / ys });
        Ok(true)
    }

    /// Initial scaling `kappa`; 1 when empty.
    pub fn kappa(&self) -> f64 {
        self.pairs.back().map_or(1.0, |p| dot(&p.y, &p.s) / norm_sq(&p.y))
    }

    /// `H g` by the two-loop recursion.
    pub fn two_loop(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = vec![0.0; self.pairs.len()];
        for (a, pair) in alphas.iter_mut().zip(&self.pairs).rev() {
            *a = pair.rho * dot(&pair.s, &q);
            axpy(-*a, &pair.y, &mut q);
        }
        let kappa = self.kappa();
        for v in q.iter_mut() {
            *v *= kappa;
        }
        for (a, pair) in alphas.iter().zip(&self.pairs) {
            let b = pair.rho * dot(&pair.y, &q);
            axpy(a - b, &pair.s, &mut q);
        }
        q
    }

    /// Same as [`LbfgsMemory::two_loop`].
    pub fn apply_h(&self, v: &[f64]) -> Vec<f64> {
        self.two_loop(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth() -> LbfgsMemory {
        LbfgsMemory::new(3, PairRule::default()).unwrap()
    }

    #[test]
    fn acceptance_rules() {
        let mut m = smooth();
        assert!(m.try_store(&[1.0, 0.0], &[2.0, 0.0]).unwrap());
        assert!(!m.try_store(&[1.0, 0.0], &[-1.0, 0.0]).unwrap());
        assert_eq!(m.len(), 1);
        let mut ns = LbfgsMemory::new(3, PairRule::Nonsmooth { beta1: 1e-3, m_bound: 10.0 }).unwrap();
        assert!(!ns.try_store(&[1.0, 0.0], &[20.0, 0.0]).unwrap());
        assert!(ns.try_store(&[1.0, 0.0], &[10.0, 0.0]).unwrap());
        let mut long = LbfgsMemory::new(3, PairRule::Smooth { beta1: 1e-3, beta2: 2.0 }).unwrap();
        assert!(!long.try_store(&[1.0, 0.0], &[2.0, 0.0]).unwrap());
    }

    #[test]
    fn invalid_inputs() {
        let mut m = smooth();
        assert!(m.try_store(&[], &[]).is_err());
        assert!(m.try_store(&[1.0], &[1.0, 2.0]).is_err());
        assert!(LbfgsMemory::new(0, PairRule::default()).is_err());
        assert!(LbfgsMemory::new(1, PairRule::Smooth { beta1: 0.0, beta2: 0.0 }).is_err());
    }

    #[test]
    fn fifo_eviction() {
        let mut m = smooth();
        for k in 1..=5 {
            m.try_store(&[k as f64], &[k as f64]).unwrap();
        }
        let kept: Vec<f64> = m.pairs().map(|p| p.s[0]).collect();
        assert_eq!(kept, vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn identity_cases() {
        let mut m = smooth();
        assert_eq!(m.two_loop(&[1.0, 2.0]), vec![1.0, 2.0]);
        m.try_store(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        let h = m.two_loop(&[1.0, 2.0]);
        assert!((h[0] - 1.0).abs() < 1e-15 && (h[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn secant_equation_holds_for_newest_pair() {
        let mut m = smooth();
        m.try_store(&[1.0, 0.5, 0.0], &[2.0, 0.3, 0.1]).unwrap();
        m.try_store(&[0.2, -1.0, 0.4], &[0.5, -1.5, 0.9]).unwrap();
        let hy = m.two_loop(&[0.5, -1.5, 0.9]);
        for (a, b) in hy.iter().zip(&[0.2, -1.0, 0.4]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_inverts_curvature() {
        let mut m = smooth();
        m.try_store(&[0.3, 0.7], &[1.1, 0.4]).unwrap();
        let p = m.pairs().next().unwrap();
        assert!((p.rho * dot(&p.y, &p.s) - 1.0).abs() < 1e-12);
    }
}
