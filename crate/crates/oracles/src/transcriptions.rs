//! Second transcriptions of benchmark residuals, written out term by term.

/// HEART8LS residuals at `(a, b, c, d, t, u, v, w)`.
pub fn heart8ls(x: &[f64]) -> [f64; 8] {
    let (a, b, c, d, t, u, v, w) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    let sum_mx = -0.69;
    let sum_my = -0.044;
    let sum_a = -1.57;
    let sum_b = -1.31;
    let sum_c = -2.65;
    let sum_d = 2.0;
    let sum_e = -12.6;
    let sum_f = 9.48;
    [
        a + b - sum_mx,
        c + d - sum_my,
        t * a + u * b - v * c - w * d - sum_a,
        v * a + w * b + t * c + u * d - sum_b,
        a * (t * t - v * v) - 2.0 * c * t * v + b * (u * u - w * w) - 2.0 * d * u * w - sum_c,
        c * (t * t - v * v) + 2.0 * a * t * v + d * (u * u - w * w) + 2.0 * b * u * w - sum_d,
        a * t * (t * t - 3.0 * v * v) + c * v * (v * v - 3.0 * t * t) + b * u * (u * u - 3.0 * w * w)
            + d * w * (w * w - 3.0 * u * u)
            - sum_e,
        c * t * (t * t - 3.0 * v * v) - a * v * (v * v - 3.0 * t * t) + d * u * (u * u - 3.0 * w * w)
            - b * w * (w * w - 3.0 * u * u)
            - sum_f,
    ]
}

/// Chebyshev polynomial of the first kind by its trigonometric form.
fn chebyshev_t(n: usize, t: f64) -> f64 {
    let n = n as f64;
    if t.abs() <= 1.0 {
        (n * t.acos()).cos()
    } else if t > 1.0 {
        (n * t.acosh()).cosh()
    } else {
        let sign = if (n as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (n * (-t).acosh()).cosh()
    }
}

/// Chebyquad residuals: `(1/n) sum_j T_i(2 x_j - 1) - E[T_i]` for
/// `i = 1..p`, where `E[T_i] = -1/(i^2 - 1)` for even `i` and 0 for odd.
pub fn chebyquad(x: &[f64], p: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (1..=p)
        .map(|i| {
            let mean: f64 = x.iter().map(|&xj| chebyshev_t(i, 2.0 * xj - 1.0)).sum::<f64>() / n;
            let target = if i % 2 == 0 { -1.0 / ((i * i) as f64 - 1.0) } else { 0.0 };
            mean - target
        })
        .collect()
}

/// Absolute-noise sample value from residuals.
pub fn absolute_noise_value(phi: &[f64], zeta: &[f64], sigma: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..phi.len() {
        total += (phi[j] + zeta[j]).powi(2) - sigma * sigma;
    }
    total
}
