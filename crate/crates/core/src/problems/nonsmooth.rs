//! The random nonsmooth problem `f(x, zeta) = ||A x - b - zeta||_1` with
//! `zeta` uniform on `[-1, 1]^p`.
//!
//! Writing `c_i = a_i^T x - b_i`, the expectation of one term is
//! `(c_i^2 + 1)/2` when `|c_i| <= 1` and `|c_i|` otherwise, so
//! `F` is continuously differentiable with gradient
//! `sum_i a_i clip(c_i)` (`clip` saturating at -+1) and, away from the
//! kinks `|c_i| = 1`, Hessian `sum_{|c_i| < 1} a_i a_i^T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::crn::mix64;
use crate::linalg::dot;
use crate::{Error, Result};

const INSTANCE_STREAM: u64 = 0x6c31_7261_6e64_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Data {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols`.
    a: Vec<f64>,
    b: Vec<f64>,
    x_star: Vec<f64>,
}

/// Expected value of `|c - zeta|` for `zeta ~ U[-1, 1]`.
#[inline]
pub fn expected_abs_piece(c: f64) -> f64 {
    if c.abs() <= 1.0 {
        0.5 * (c * c + 1.0)
    } else {
        c.abs()
    }
}

/// Derivative of [`expected_abs_piece`].
#[inline]
pub fn expected_abs_slope(c: f64) -> f64 {
    c.clamp(-1.0, 1.0)
}

impl L1Data {
    /// `b` is recomputed as `A x_star`.
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, x_star: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("l1 problem dimensions must be positive"));
        }
        if a.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: a.len() });
        }
        if x_star.len() != cols {
            return Err(Error::DimensionMismatch { expected: cols, got: x_star.len() });
        }
        let b = (0..rows).map(|i| dot(&a[i * cols..(i + 1) * cols], &x_star)).collect();
        Ok(Self { rows, cols, a, b, x_star })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    /// `c = A x - b`.
    pub fn shifted_residuals(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x) - self.b[i]).collect()
    }

    pub fn stochastic_value(&self, x: &[f64], noise: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| (dot(self.row(i), x) - self.b[i] - noise[i]).abs())
            .sum()
    }

    pub fn expected_value(&self, x: &[f64]) -> f64 {
        self.shifted_residuals(x).into_iter().map(expected_abs_piece).sum()
    }

    pub fn expected_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.cols];
        for (i, c) in self.shifted_residuals(x).into_iter().enumerate() {
            crate::linalg::axpy(expected_abs_slope(c), self.row(i), &mut g);
        }
        g
    }

    /// Row-major `cols x cols` Hessian.
    pub fn expected_hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.cols;
        let mut h = vec![0.0; n * n];
        for (i, c) in self.shifted_residuals(x).into_iter().enumerate() {
            let row = self.row(i);
            if c.abs() == 1.0 && row.iter().any(|&v| v != 0.0) {
                return Err(Error::KinkBoundary(i));
            }
            if c.abs() < 1.0 {
                for r in 0..n {
                    for s in 0..n {
                        h[r * n + s] += row[r] * row[s];
                    }
                }
            }
        }
        Ok(h)
    }

    /// Largest eigenvalue of `A^T A` (a Lipschitz constant of the expected
    /// gradient), by power iteration.
    pub fn gradient_lipschitz(&self) -> f64 {
        let n = self.cols;
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut lambda = 0.0;
        for _ in 0..1000 {
            let av: Vec<f64> = (0..self.rows).map(|i| dot(self.row(i), &v)).collect();
            let mut atav = vec![0.0; n];
            for (i, s) in av.iter().enumerate() {
                crate::linalg::axpy(*s, self.row(i), &mut atav);
            }
            let nrm = crate::linalg::norm(&atav);
            if nrm == 0.0 {
                return 0.0;
            }
            let next = nrm;
            v = atav.into_iter().map(|t| t / nrm).collect();
            if (next - lambda).abs() <= 1e-13 * next {
                return next;
            }
            lambda = next;
        }
        lambda
    }
}

/// Random instance: `A = (G + G^T)/2` with `G` standard normal, `x_star`
/// standard normal, `b = A x_star`, and a standard-normal starting point.
/// Deterministic in `seed`.
pub fn make_nonsmooth_instance(seed: u64, d: usize, p: usize) -> Result<(L1Data, Vec<f64>)> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if d != p {
        return Err(Error::invalid(format!("symmetric instance needs d = p, got d={d}, p={p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ INSTANCE_STREAM));
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let g: Vec<f64> = (0..d * d).map(|_| draw()).collect();
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            a[i * d + j] = 0.5 * (g[i * d + j] + g[j * d + i]);
        }
    }
    let x_star: Vec<f64> = (0..d).map(|_| draw()).collect();
    let x0: Vec<f64> = (0..d).map(|_| draw()).collect();
    Ok((L1Data::new(p, d, a, x_star)?, x0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_pieces() {
        assert_eq!(expected_abs_piece(0.0), 0.5);
        assert_eq!(expected_abs_piece(2.0), 2.0);
        assert_eq!(expected_abs_piece(-2.0), 2.0);
        assert_eq!(expected_abs_piece(1.0), 1.0);
    }

    #[test]
    fn instance_is_symmetric_and_consistent() {
        let (data, x0) = make_nonsmooth_instance(3, 50, 50).unwrap();
        let d = data.cols();
        for i in 0..d {
            for j in 0..d {
                assert_eq!(data.matrix()[i * d + j], data.matrix()[j * d + i]);
            }
        }
        assert!(data.shifted_residuals(data.x_star()).iter().all(|&c| c == 0.0));
        assert_eq!(data.expected_value(data.x_star()), 25.0);
        assert_eq!(x0.len(), 50);
        let (again, x0_again) = make_nonsmooth_instance(3, 50, 50).unwrap();
        assert_eq!(data, again);
        assert_eq!(x0, x0_again);
        assert_ne!(make_nonsmooth_instance(4, 50, 50).unwrap().0, data);
    }

    #[test]
    fn rejects_rectangular_request() {
        assert!(make_nonsmooth_instance(1, 3, 4).is_err());
        assert!(make_nonsmooth_instance(1, 0, 0).is_err());
    }

    #[test]
    fn gradient_vanishes_and_hessian_is_gram_at_solution() {
        let (data, _) = make_nonsmooth_instance(8, 6, 6).unwrap();
        assert!(data.expected_gradient(data.x_star()).iter().all(|&g| g == 0.0));
        let h = data.expected_hessian(data.x_star()).unwrap();
        let n = data.cols();
        for r in 0..n {
            for s in 0..n {
                let gram: f64 = (0..n).map(|i| data.row(i)[r] * data.row(i)[s]).sum();
                assert!((h[r * n + s] - gram).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hessian_on_kink_is_an_error() {
        // 1x1: c = x - 0, kink at x = 1.
        let data = L1Data::new(1, 1, vec![1.0], vec![0.0]).unwrap();
        assert_eq!(data.expected_hessian(&[1.0]), Err(Error::KinkBoundary(0)));
        assert_eq!(data.expected_hessian(&[0.5]).unwrap(), vec![1.0]);
        assert_eq!(data.expected_hessian(&[3.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let data = L1Data::new(2, 2, vec![3.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!((data.gradient_lipschitz() - 9.0).abs() < 1e-9);
    }
}
