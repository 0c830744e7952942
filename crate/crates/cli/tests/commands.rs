use std::fs;
use std::process::{Command, Output};

use zoqn_cli::aggregate::{aggregate_series, linear_grid, to_csv as aggregate_csv};
use zoqn_cli::trace::{parse_csv, parse_json};

fn zoqn(args: &[&str], cache: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zoqn"))
        .args(args)
        .env("ZOQN_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn reference_of_random_l1_instance_is_half_the_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoqn(&["reference", "--problem", "l1rand"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "25.0");
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--sigma", "0"][..],
        &["run", "--problem", "nope"],
        &["run", "--seeds", "1", "--theta0", "0"],
        &["run", "--noise", "uniform"],
        &["reference", "--config", "/nonexistent/zoqn.json"],
        &["run", "--bogus-flag"],
    ] {
        let o = zoqn(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{ "problem": "cube", "sigmaa": 1 }"#).unwrap();
    let o = zoqn(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{ "problem": "cube", "sigma": 0.01, "seeds": [4] }"#).unwrap();
    let o = zoqn(&["run", "--config", cfg.to_str().unwrap(), "--sigma", "0.5", "--show-config"], dir.path());
    assert!(o.status.success());
    let shown: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let exp = &shown["experiment"];
    assert_eq!(exp["problem"], "cube");
    assert_eq!(exp["sigma"], 0.5);
    assert_eq!(exp["seeds"], serde_json::json!([4]));
}

fn shown(args: &[&str]) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let mut all = vec!["run", "--show-config"];
    all.extend_from_slice(args);
    let o = zoqn(&all, dir.path());
    assert!(o.status.success());
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn show_config_reports_published_defaults() {
    let large = shown(&["--sigma", "1e-3"]);
    let r = &large["resolved"];
    assert_eq!(r["theta0"], 0.9);
    assert_eq!(r["gamma"], 0.9);
    assert_eq!(r["nu"], 1e-8);
    assert_eq!(r["memory"], 10);
    assert_eq!(r["policy"]["initial_size"], 2);
    assert_eq!(r["line_search"]["c1"], 1e-4);
    assert_eq!(r["line_search"]["c2"], 1e-14);
    assert_eq!(r["line_search"]["tau"], 0.5);
    assert_eq!(r["mode"], "smooth");

    let small = shown(&["--sigma", "1e-5"]);
    assert_eq!(small["resolved"]["gamma"], 0.99);

    let nonsmooth = shown(&["--problem", "l1rand"]);
    assert_eq!(nonsmooth["resolved"]["mode"], "nonsmooth");
    assert_eq!(nonsmooth["experiment"]["noise"], "uniform");

    let baseline = shown(&["--method", "fd-sg"]);
    assert_eq!(baseline["resolved"]["alpha0"], serde_json::Value::Null);
    assert_eq!(baseline["resolved"]["batch"], 2);
    assert_eq!(baseline["resolved"]["nu"], 1e-8);
}

#[test]
fn seed_alias_selects_the_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoqn(&["reference", "--problem", "l1rand", "--seed", "7"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "25.0");
}

#[test]
fn aggregate_file_equals_recomputation_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = zoqn(
        &[
            "run", "--problem", "osborne", "--method", "fd-ipqn", "--seeds", "1,2,3", "--max-evals", "4000",
            "--format", "json", "--grid-points", "50", "--output", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs: Vec<(f64, Vec<(u64, f64)>)> = [1, 2, 3]
        .iter()
        .map(|s| {
            let t = parse_json(&fs::read_to_string(out.join(format!("osborne-fd-ipqn-seed{s}.json"))).unwrap()).unwrap();
            (t.meta.initial_gap(), t.rows.iter().map(|r| (r.evals, r.gap)).collect())
        })
        .collect();
    let bands = aggregate_series(&runs, &linear_grid(4000, 50)).unwrap();
    let emitted = fs::read_to_string(out.join("osborne-fd-ipqn-aggregate.csv")).unwrap();
    assert_eq!(aggregate_csv(&bands), emitted);
}

#[test]
fn run_writes_traces_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = zoqn(
        &[
            "run", "--problem", "heart8ls", "--method", "fd-norm", "--seeds", "1,2", "--max-evals", "3000",
            "--grid-points", "3", "--output", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for seed in [1, 2] {
        let text = fs::read_to_string(out.join(format!("heart8ls-fd-norm-seed{seed}.csv"))).unwrap();
        let rows = parse_csv(&text).unwrap();
        assert!(!rows.is_empty());
        assert!(rows.last().unwrap().evals <= 3000);
        assert!(rows.windows(2).all(|w| w[0].evals < w[1].evals));
    }
    let agg = fs::read_to_string(out.join("heart8ls-fd-norm-aggregate.csv")).unwrap();
    let lines: Vec<&str> = agg.lines().collect();
    assert_eq!(lines[0], "evals,min_gap,mean_gap,max_gap");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("3000,"));
    assert!(dir.path().join("heart8ls.json").exists(), "reference optimum cached");
}

#[test]
fn baseline_run_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = zoqn(
        &[
            "run", "--problem", "cube", "--method", "fd-sg", "--alpha0", "1e-6", "--seeds", "3", "--max-evals", "2000",
            "--format", "json", "--output", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = parse_json(&fs::read_to_string(out.join("cube-fd-sg-seed3.json")).unwrap()).unwrap();
    assert_eq!(trace.meta.method, "fd-sg");
    assert_eq!(trace.meta.run_seed, 3);
    assert!(trace.rows.iter().all(|r| r.batch == 2 && r.theta == 0.0));
}

#[test]
fn tuning_a_solver_method_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoqn(&["tune-baseline", "--problem", "cube", "--method", "fd-ipqn"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
