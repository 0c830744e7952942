//! Dense inverse-Hessian recursion.

use nalgebra::{DMatrix, DVector};
use zoqn::lbfgs::LbfgsMemory;

/// `H` from `kappa I`, `kappa = y^T s / y^T y` of the last pair, through
/// `H <- V^T H V + rho s s^T`, `V = I - rho y s^T`, applied oldest first.
pub fn dense_h(pairs: &[(Vec<f64>, Vec<f64>)], d: usize) -> DMatrix<f64> {
    let kappa = pairs.last().map_or(1.0, |(s, y)| {
        let (s, y) = (DVector::from_column_slice(s), DVector::from_column_slice(y));
        y.dot(&s) / y.dot(&y)
    });
    let mut h = DMatrix::<f64>::identity(d, d) * kappa;
    let eye = DMatrix::<f64>::identity(d, d);
    for (s, y) in pairs {
        let s = DVector::from_column_slice(s);
        let y = DVector::from_column_slice(y);
        let rho = 1.0 / y.dot(&s);
        let v = &eye - (&y * s.transpose()) * rho;
        h = v.transpose() * h * &v + (&s * s.transpose()) * rho;
    }
    h
}

pub fn dense_h_from_memory(memory: &LbfgsMemory, d: usize) -> DMatrix<f64> {
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = memory.pairs().map(|p| (p.s.clone(), p.y.clone())).collect();
    dense_h(&pairs, d)
}
