use std::fs;

use serde_json::json;
use zoqn::problems::NoiseModel;
use zoqn::solver::{RunMeta, RunRecord, Status, TraceRow};
use zoqn_cli::aggregate::{aggregate, held_gap, linear_grid, to_csv as aggregate_csv, AGGREGATE_HEADER};
use zoqn_cli::trace::{parse_csv, parse_json, render, to_csv, to_json, write_trace, Format, CSV_HEADER};

#[allow(clippy::too_many_arguments)]
fn row(iter: u64, evals: u64, fvalue: f64, gap: f64, batch: usize, alpha: f64, theta: f64, pair: bool, test: bool) -> TraceRow {
    TraceRow { iter, evals, fvalue, gap, batch, alpha, theta, pair_accepted: pair, test_satisfied: test }
}

fn record(rows: Vec<TraceRow>) -> RunRecord {
    RunRecord {
        meta: RunMeta {
            method: "fd-ipqn".into(),
            problem: "toy".into(),
            noise: NoiseModel::Absolute { sigma: 1e-3 },
            dim: 2,
            run_seed: 7,
            f0: 4.0,
            f_star: 1.0,
            status: Status::Budget,
            config: json!({ "theta0": 0.9 }),
        },
        rows,
        diagnostics: Vec::new(),
    }
}

fn three_rows() -> RunRecord {
    record(vec![
        row(1, 10, 2.5, 1.5, 2, 1.0, 0.5, true, true),
        row(2, 24, 1.25, 0.25, 4, 0.5, 0.25, false, true),
        row(3, 40, 1.1, 1.1 - 1.0, 4, 0.1, 0.125, true, false),
    ])
}

#[test]
fn csv_matches_golden_fixture() {
    let expected = include_str!("fixtures/three_rows.csv");
    assert_eq!(to_csv(&three_rows().rows), expected);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_trace(&three_rows(), &path, Format::Csv).unwrap();
    assert_eq!(fs::read(&path).unwrap(), expected.as_bytes());
}

#[test]
fn empty_run_is_header_only() {
    assert_eq!(to_csv(&[]), format!("{CSV_HEADER}\n"));
    assert!(parse_csv(&to_csv(&[])).unwrap().is_empty());
}

#[test]
fn csv_round_trip_is_exact() {
    let mut rec = three_rows();
    rec.rows.push(row(4, 41, 1.0 + f64::EPSILON, 5e-324, 3, 1.0 / 3.0, 1e300, false, false));
    assert_eq!(parse_csv(&to_csv(&rec.rows)).unwrap(), rec.rows);
}

#[test]
fn csv_rejects_wrong_header_and_extra_fields() {
    assert!(parse_csv("iter,evals\n").is_err());
    let bad = format!("{CSV_HEADER}\n1,2,1e0,1e0,2,1e0,1e0,true,true,9\n");
    assert!(parse_csv(&bad).is_err());
}

#[test]
fn json_round_trip_keeps_meta_and_rows() {
    let rec = three_rows();
    let text = to_json(&rec).unwrap();
    assert!(text.ends_with('\n'));
    let parsed = parse_json(&text).unwrap();
    assert_eq!(parsed.meta, rec.meta);
    assert_eq!(parsed.rows, rec.rows);
}

#[test]
fn json_writes_non_finite_values_as_strings() {
    let mut rec = record(vec![row(1, 4, f64::INFINITY, f64::NAN, 2, 1.0, 0.0, false, false)]);
    rec.meta.status = Status::Diverged;
    let text = render(&rec, Format::Json).unwrap();
    assert!(text.contains("\"inf\"") && text.contains("\"NaN\""));
    let parsed = parse_json(&text).unwrap();
    assert_eq!(parsed.rows[0].fvalue, f64::INFINITY);
    assert!(parsed.rows[0].gap.is_nan());
}

#[test]
fn aggregate_holds_previous_value() {
    let rows = [(10, 3.0), (20, 2.0)];
    assert_eq!(held_gap(5.0, &rows, 0), 5.0);
    assert_eq!(held_gap(5.0, &rows, 9), 5.0);
    assert_eq!(held_gap(5.0, &rows, 10), 3.0);
    assert_eq!(held_gap(5.0, &rows, 19), 3.0);
    assert_eq!(held_gap(5.0, &rows, 1000), 2.0);
}

#[test]
fn aggregate_recomputes_from_written_traces() {
    let a = three_rows();
    let mut b = three_rows();
    b.rows.truncate(1);
    b.rows[0].gap = 0.5;
    let grid = linear_grid(40, 4);
    assert_eq!(grid, vec![0, 10, 20, 30, 40]);

    let bands = aggregate(&[a.clone(), b.clone()], &grid).unwrap();
    let csv = aggregate_csv(&bands);
    assert!(csv.starts_with(AGGREGATE_HEADER));

    // Rebuild the bands from the CSV traces alone.
    let traces: Vec<Vec<TraceRow>> = [&a, &b].iter().map(|r| parse_csv(&to_csv(&r.rows)).unwrap()).collect();
    for band in &bands {
        let gaps: Vec<f64> = traces
            .iter()
            .map(|rows| {
                let series: Vec<(u64, f64)> = rows.iter().map(|r| (r.evals, r.gap)).collect();
                held_gap(3.0, &series, band.evals)
            })
            .collect();
        let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(band.min, min);
        assert_eq!(band.max, max);
        assert_eq!(band.mean, gaps.iter().sum::<f64>() / 2.0);
    }
    assert_eq!(bands[1].min, 0.5);
    assert_eq!(bands[1].max, 1.5);
    assert_eq!(bands[4].min, 1.1 - 1.0);
}

#[test]
fn aggregate_of_nothing_is_an_error() {
    assert!(aggregate(&[], &[0, 1]).is_err());
}
