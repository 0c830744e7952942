use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::problems::Problem;
use crate::{Error, Result};

use super::baselines::{run_baseline, BaselineMethod};
use super::config::BaselineConfig;
use super::record::{RunRecord, Status};

/// Exponents `j` of the step grid `alpha0 = 2^j`.
pub const DEFAULT_GRID: std::ops::RangeInclusive<i32> = -20..=10;

pub fn default_grid() -> Vec<i32> {
    DEFAULT_GRID.collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub j: i32,
    pub alpha0: f64,
    /// Mean over seeds; `inf` when any run diverged.
    pub mean_final_gap: f64,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: GridPoint,
    pub grid: Vec<GridPoint>,
    /// Runs of the winning step, in seed order.
    pub records: Vec<RunRecord>,
}

/// Final gap used for ranking; diverged or non-finite runs rank last.
pub fn ranking_gap(record: &RunRecord) -> f64 {
    let gap = record.final_gap();
    if record.meta.status == Status::Diverged || gap.is_nan() {
        f64::INFINITY
    } else {
        gap
    }
}

fn runs(problem: &Problem, method: BaselineMethod, base: &BaselineConfig, j: i32, seeds: &[u64], f_star: f64) -> Result<Vec<RunRecord>> {
    seeds
        .iter()
        .map(|&seed| {
            let cfg = BaselineConfig { alpha0: 2f64.powi(j), run_seed: seed, ..*base };
            run_baseline(problem, method, &cfg, f_star)
        })
        .collect()
}

/// Picks the `alpha0 = 2^j` minimizing the mean final gap over `seeds`;
/// ties go to the smaller `j`. Grid points run in parallel.
pub fn tune_baseline(
    problem: &Problem,
    method: BaselineMethod,
    grid: &[i32],
    seeds: &[u64],
    base: &BaselineConfig,
    f_star: f64,
) -> Result<TuneResult> {
    if grid.is_empty() || seeds.is_empty() {
        return Err(Error::invalid("tuning needs a nonempty grid and seed list"));
    }
    let mut points = grid
        .par_iter()
        .map(|&j| {
            let records = runs(problem, method, base, j, seeds, f_star)?;
            let total: f64 = records.iter().map(ranking_gap).sum();
            Ok(GridPoint { j, alpha0: 2f64.powi(j), mean_final_gap: total / seeds.len() as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by_key(|p| p.j);
    let best = *points
        .iter()
        .reduce(|a, b| if b.mean_final_gap < a.mean_final_gap { b } else { a })
        .expect("grid is nonempty");
    let records = runs(problem, method, base, best.j, seeds, f_star)?;
    Ok(TuneResult { best, grid: points, records })
}
