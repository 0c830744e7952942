//! Brute-force variances, sample-size tests and difference gradients.

use nalgebra::{DMatrix, DVector};
use zoqn::sampling::TestKind;

/// Left-to-right mean of the rows.
pub fn naive_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows[0].len();
    let mut m = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            m[j] += r[j];
        }
    }
    m.iter().map(|v| v / rows.len() as f64).collect()
}

pub fn brute_force_norm_variance(rows: &[Vec<f64>]) -> f64 {
    let g = naive_mean(rows);
    let mut total = 0.0;
    for r in rows {
        for j in 0..g.len() {
            total += (r[j] - g[j]).powi(2);
        }
    }
    total / (rows.len() - 1) as f64
}

/// `1/(n-1) sum_i ((H g_i)^T (H g) - ||H g||^2)^2` with `H` dense.
pub fn brute_force_ipqn_variance(rows: &[Vec<f64>], h: &DMatrix<f64>) -> f64 {
    let g = DVector::from_vec(naive_mean(rows));
    let hg = h * &g;
    let hg2 = hg.dot(&hg);
    let mut total = 0.0;
    for r in rows {
        let hgi = h * DVector::from_column_slice(r);
        total += (hgi.dot(&hg) - hg2).powi(2);
    }
    total / (rows.len() - 1) as f64
}

/// The sample-size inequality recomputed from raw per-sample gradients.
pub fn brute_force_test(rows: &[Vec<f64>], h: &DMatrix<f64>, theta: f64, kind: TestKind) -> bool {
    let n = rows.len() as f64;
    let g = DVector::from_vec(naive_mean(rows));
    match kind {
        TestKind::Norm => brute_force_norm_variance(rows) / n <= theta * theta * g.dot(&g),
        TestKind::Ipqn => {
            let hg = h * &g;
            let hg2 = hg.dot(&hg);
            brute_force_ipqn_variance(rows, h) / n <= theta * theta * hg2 * hg2
        }
    }
}

pub fn forward_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], nu: f64) -> Vec<f64> {
    let f0 = f(x);
    (0..x.len())
        .map(|j| {
            let mut xp = x.to_vec();
            xp[j] += nu;
            (f(&xp) - f0) / nu
        })
        .collect()
}

pub fn central_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}
