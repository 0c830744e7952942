/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl MeanEstimate {
    /// `|mean - target| <= k stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Mean of `f(seed, i)` for `i < n`, accumulated with Welford's update.
pub fn monte_carlo_mean<F: FnMut(u64, u64) -> f64>(mut f: F, n: u64, seed: u64) -> MeanEstimate {
    assert!(n >= 2, "need at least two draws");
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let v = f(seed, i);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    MeanEstimate { mean, stderr: (var / n as f64).sqrt(), n }
}
