//! Min/mean/max gap bands across seeds.
//!
//! Each run's gap is held at its last logged value between rows
//! (previous-value hold) and read off on a fixed evaluation grid. Before
//! its first row a run sits at its initial gap. Grid points past a run's
//! last row hold its final gap.

use std::fmt::Write as _;

use zoqn::solver::RunRecord;

use crate::error::{CliError, CliResult};
use crate::trace::fmt_f64;

pub const AGGREGATE_HEADER: &str = "evals,min_gap,mean_gap,max_gap";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub evals: u64,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// `points + 1` evenly spaced evaluation counts from 0 to `max_evals`.
pub fn linear_grid(max_evals: u64, points: u64) -> Vec<u64> {
    let points = points.max(1);
    (0..=points).map(|k| ((max_evals as u128 * k as u128) / points as u128) as u64).collect()
}

/// Gap of a run after `evals` evaluations.
pub fn held_gap(initial_gap: f64, rows: &[(u64, f64)], evals: u64) -> f64 {
    let idx = rows.partition_point(|&(e, _)| e <= evals);
    if idx == 0 {
        initial_gap
    } else {
        rows[idx - 1].1
    }
}

/// Bands from `(initial_gap, [(evals, gap)])` per run.
pub fn aggregate_series(runs: &[(f64, Vec<(u64, f64)>)], grid: &[u64]) -> CliResult<Vec<Band>> {
    if runs.is_empty() {
        return Err(CliError::Validation("nothing to aggregate".into()));
    }
    Ok(grid
        .iter()
        .map(|&e| {
            let gaps: Vec<f64> = runs.iter().map(|(g0, rows)| held_gap(*g0, rows, e)).collect();
            Band {
                evals: e,
                min: gaps.iter().copied().fold(f64::INFINITY, f64::min),
                mean: gaps.iter().sum::<f64>() / gaps.len() as f64,
                max: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect())
}

pub fn aggregate(records: &[RunRecord], grid: &[u64]) -> CliResult<Vec<Band>> {
    let runs: Vec<(f64, Vec<(u64, f64)>)> = records
        .iter()
        .map(|r| (r.meta.initial_gap(), r.rows.iter().map(|row| (row.evals, row.gap)).collect()))
        .collect();
    aggregate_series(&runs, grid)
}

pub fn to_csv(bands: &[Band]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for b in bands {
        let _ = writeln!(out, "{},{},{},{}", b.evals, fmt_f64(b.min), fmt_f64(b.mean), fmt_f64(b.max));
    }
    out
}
