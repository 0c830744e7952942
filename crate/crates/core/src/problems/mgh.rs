//! Residual maps of the smooth least-squares benchmarks.
//!
//! Each problem is a map `phi: R^d -> R^p`; the noise-free objective is
//! `F(x) = sum_j phi_j(x)^2`. Definitions follow the Moré-Garbow-Hillstrom
//! collection as distributed with the Moré-Wild derivative-free benchmark
//! set (which takes chebyquad, Osborne 2, bdqrtic, cube and heart8ls from
//! CUTEr):
//!
//! - **chebyquad** (`d` vars, `p` residuals):
//!   `phi_i = (1/d) sum_j T_i(2 x_j - 1) + [i even] / (i^2 - 1)`,
//!   `T_i` the Chebyshev polynomial of the first kind, `i = 1..p`.
//!   Standard start `x_j = j / (d + 1)`.
//! - **osborne** (Osborne 2, `d = 11`, `p = 65`): with `t_i = (i-1)/10`,
//!   `phi_i = y_i - (x1 e^{-t_i x5} + x2 e^{-(t_i-x9)^2 x6}
//!   + x3 e^{-(t_i-x10)^2 x7} + x4 e^{-(t_i-x11)^2 x8})`.
//!   Standard start `(1.3, .65, .65, .7, .6, 3, 5, 7, 2, 4.5, 5.5)`.
//! - **bdqrtic** (`d >= 5`, `p = 2(d-4)`): for `i = 1..d-4`,
//!   `phi_i = 3 - 4 x_i` and
//!   `phi_{d-4+i} = x_i^2 + 2x_{i+1}^2 + 3x_{i+2}^2 + 4x_{i+3}^2 + 5x_d^2`.
//!   Standard start all ones.
//! - **cube** (`d` vars, `p >= d` residuals): `phi_1 = x_1 - 1` and
//!   `phi_i = 10 (x_{c(i)} - x_{c(i-1)}^3)` for `i = 2..p`, where
//!   `c(i) = ((i - 1) mod d) + 1`. For `p = d` this is the usual chain;
//!   residuals past `d` continue it cyclically (`x_1 - x_d^3`, then
//!   repeats). Standard start all `0.5`.
//! - **heart8ls** (`d = p = 8`): the dipole-model equations of CUTEr
//!   HEART8LS, see [`heart8`] for the expanded form. Standard start
//!   `(-.3, -.39, .3, -.344, -1.2, 2.69, 1.59, -1.5)`.

use serde::{Deserialize, Serialize};

use super::dual::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MghProblem {
    Chebyquad { d: usize, p: usize },
    Osborne2,
    Bdqrtic { d: usize },
    Cube { d: usize, p: usize },
    Heart8,
}

/// Measured data of the Osborne 2 problem.
pub const OSBORNE2_Y: [f64; 65] = [
    1.366, 1.191, 1.112, 1.013, 0.991, 0.885, 0.831, 0.847, 0.786, 0.725, 0.746, 0.679, 0.608,
    0.655, 0.616, 0.606, 0.602, 0.626, 0.651, 0.724, 0.649, 0.649, 0.694, 0.644, 0.624, 0.661,
    0.612, 0.558, 0.533, 0.495, 0.500, 0.423, 0.395, 0.375, 0.372, 0.391, 0.396, 0.405, 0.428,
    0.429, 0.523, 0.562, 0.607, 0.653, 0.672, 0.708, 0.633, 0.668, 0.645, 0.632, 0.591, 0.559,
    0.597, 0.625, 0.739, 0.710, 0.729, 0.720, 0.636, 0.581, 0.428, 0.292, 0.162, 0.098, 0.054,
];

impl MghProblem {
    pub fn dim(&self) -> usize {
        match *self {
            MghProblem::Chebyquad { d, .. } => d,
            MghProblem::Osborne2 => 11,
            MghProblem::Bdqrtic { d } => d,
            MghProblem::Cube { d, .. } => d,
            MghProblem::Heart8 => 8,
        }
    }

    pub fn residual_dim(&self) -> usize {
        match *self {
            MghProblem::Chebyquad { p, .. } => p,
            MghProblem::Osborne2 => 65,
            MghProblem::Bdqrtic { d } => 2 * (d - 4),
            MghProblem::Cube { p, .. } => p,
            MghProblem::Heart8 => 8,
        }
    }

    /// Standard (unscaled) starting point.
    pub fn standard_start(&self) -> Vec<f64> {
        match *self {
            MghProblem::Chebyquad { d, .. } => {
                (1..=d).map(|j| j as f64 / (d + 1) as f64).collect()
            }
            MghProblem::Osborne2 => vec![1.3, 0.65, 0.65, 0.7, 0.6, 3.0, 5.0, 7.0, 2.0, 4.5, 5.5],
            MghProblem::Bdqrtic { d } => vec![1.0; d],
            MghProblem::Cube { d, .. } => vec![0.5; d],
            MghProblem::Heart8 => vec![-0.3, -0.39, 0.3, -0.344, -1.2, 2.69, 1.59, -1.5],
        }
    }

    pub fn residuals<T: Real>(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), self.residual_dim());
        match *self {
            MghProblem::Chebyquad { .. } => chebyquad(x, out),
            MghProblem::Osborne2 => osborne2(x, out),
            MghProblem::Bdqrtic { .. } => bdqrtic(x, out),
            MghProblem::Cube { .. } => cube(x, out),
            MghProblem::Heart8 => heart8(x, out),
        }
    }
}

fn chebyquad<T: Real>(x: &[T], out: &mut [T]) {
    let zero = T::cst(0.0);
    let one = T::cst(1.0);
    let two = T::cst(2.0);
    out.iter_mut().for_each(|v| *v = zero);
    for &xj in x {
        let mut prev = one;
        let mut cur = two * xj - one;
        let twice = two * cur;
        for v in out.iter_mut() {
            *v += cur;
            let next = twice * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    let inv_n = T::cst(1.0 / x.len() as f64);
    for (i, v) in out.iter_mut().enumerate() {
        let deg = (i + 1) as f64;
        *v = *v * inv_n;
        if (i + 1) % 2 == 0 {
            *v += T::cst(1.0 / (deg * deg - 1.0));
        }
    }
}

fn osborne2<T: Real>(x: &[T], out: &mut [T]) {
    for (i, v) in out.iter_mut().enumerate() {
        let t = T::cst(i as f64 / 10.0);
        let bump = |amp: T, width: T, center: T| {
            let u = t - center;
            amp * (-(u * u) * width).exp()
        };
        let model = x[0] * (-(t * x[4])).exp()
            + bump(x[1], x[5], x[8])
            + bump(x[2], x[6], x[9])
            + bump(x[3], x[7], x[10]);
        *v = T::cst(OSBORNE2_Y[i]) - model;
    }
}

fn bdqrtic<T: Real>(x: &[T], out: &mut [T]) {
    let n = x.len();
    let last_sq = x[n - 1] * x[n - 1];
    for i in 0..n - 4 {
        out[i] = T::cst(3.0) - T::cst(4.0) * x[i];
        out[n - 4 + i] = x[i] * x[i]
            + T::cst(2.0) * x[i + 1] * x[i + 1]
            + T::cst(3.0) * x[i + 2] * x[i + 2]
            + T::cst(4.0) * x[i + 3] * x[i + 3]
            + T::cst(5.0) * last_sq;
    }
}

fn cube<T: Real>(x: &[T], out: &mut [T]) {
    let n = x.len();
    out[0] = x[0] - T::cst(1.0);
    for i in 1..out.len() {
        let cur = x[i % n];
        let prev = x[(i - 1) % n];
        out[i] = T::cst(10.0) * (cur - prev * prev * prev);
    }
}

/// Heart dipole equations with `(a, b, c, d, t, u, v, w) = x`:
///
/// ```text
/// a + b + 0.69
/// c + d + 0.044
/// t a + u b - v c - w d + 1.57
/// v a + w b + t c + u d + 1.31
/// a (t^2 - v^2) - 2 c t v + b (u^2 - w^2) - 2 d u w + 2.65
/// c (t^2 - v^2) + 2 a t v + d (u^2 - w^2) + 2 b u w - 2.0
/// a t (t^2 - 3v^2) + c v (v^2 - 3t^2) + b u (u^2 - 3w^2) + d w (w^2 - 3u^2) + 12.6
/// c t (t^2 - 3v^2) - a v (v^2 - 3t^2) + d u (u^2 - 3w^2) - b w (w^2 - 3u^2) - 9.48
/// ```
pub fn heart8<T: Real>(x: &[T], out: &mut [T]) {
    let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
    let (t, u, v, w) = (x[4], x[5], x[6], x[7]);
    let k = T::cst;
    let tt_vv = t * t - v * v;
    let uu_ww = u * u - w * w;
    let t3 = t * (t * t - k(3.0) * v * v);
    let v3 = v * (v * v - k(3.0) * t * t);
    let u3 = u * (u * u - k(3.0) * w * w);
    let w3 = w * (w * w - k(3.0) * u * u);
    out[0] = a + b + k(0.69);
    out[1] = c + d + k(0.044);
    out[2] = t * a + u * b - v * c - w * d + k(1.57);
    out[3] = v * a + w * b + t * c + u * d + k(1.31);
    out[4] = a * tt_vv - k(2.0) * c * t * v + b * uu_ww - k(2.0) * d * u * w + k(2.65);
    out[5] = c * tt_vv + k(2.0) * a * t * v + d * uu_ww + k(2.0) * b * u * w - k(2.0);
    out[6] = a * t3 + c * v3 + b * u3 + d * w3 + k(12.6);
    out[7] = c * t3 - a * v3 + d * u3 - b * w3 - k(9.48);
}
