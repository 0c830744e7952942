//! Trace files.
//!
//! CSV traces carry one row per iteration under the header
//! `iter,evals,fvalue,gap,batch,alpha,theta,pair_accepted,test_satisfied`.
//! Floats are written in scientific notation with 17 significant digits,
//! which round-trips every `f64`. JSON traces hold the same rows plus the
//! run metadata; non-finite floats are written as strings there.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use zoqn::solver::{RunMeta, RunRecord, TraceRow};

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "iter,evals,fvalue,gap,batch,alpha,theta,pair_accepted,test_satisfied";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.iter,
            r.evals,
            fmt_f64(r.fvalue),
            fmt_f64(r.gap),
            r.batch,
            fmt_f64(r.alpha),
            fmt_f64(r.theta),
            r.pair_accepted,
            r.test_satisfied
        );
    }
    out
}

fn field<T: FromStr>(line: usize, name: &str, raw: Option<&str>) -> CliResult<T> {
    raw.and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::Runtime(format!("trace line {line}: bad or missing `{name}`")))
}

pub fn parse_csv(text: &str) -> CliResult<Vec<TraceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CliError::Runtime("trace header does not match".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let n = i + 2;
            let mut it = l.split(',');
            let row = TraceRow {
                iter: field(n, "iter", it.next())?,
                evals: field(n, "evals", it.next())?,
                fvalue: field(n, "fvalue", it.next())?,
                gap: field(n, "gap", it.next())?,
                batch: field(n, "batch", it.next())?,
                alpha: field(n, "alpha", it.next())?,
                theta: field(n, "theta", it.next())?,
                pair_accepted: field(n, "pair_accepted", it.next())?,
                test_satisfied: field(n, "test_satisfied", it.next())?,
            };
            if it.next().is_some() {
                return Err(CliError::Runtime(format!("trace line {n}: too many fields")));
            }
            Ok(row)
        })
        .collect()
}

mod float {
    //! Finite floats as JSON numbers, others as `"inf"`, `"-inf"`, `"NaN"`.
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct JsonRow {
    iter: u64,
    evals: u64,
    #[serde(with = "float")]
    fvalue: f64,
    #[serde(with = "float")]
    gap: f64,
    batch: usize,
    #[serde(with = "float")]
    alpha: f64,
    #[serde(with = "float")]
    theta: f64,
    pair_accepted: bool,
    test_satisfied: bool,
}

impl From<&TraceRow> for JsonRow {
    fn from(r: &TraceRow) -> Self {
        Self {
            iter: r.iter,
            evals: r.evals,
            fvalue: r.fvalue,
            gap: r.gap,
            batch: r.batch,
            alpha: r.alpha,
            theta: r.theta,
            pair_accepted: r.pair_accepted,
            test_satisfied: r.test_satisfied,
        }
    }
}

impl From<JsonRow> for TraceRow {
    fn from(r: JsonRow) -> Self {
        Self {
            iter: r.iter,
            evals: r.evals,
            fvalue: r.fvalue,
            gap: r.gap,
            batch: r.batch,
            alpha: r.alpha,
            theta: r.theta,
            pair_accepted: r.pair_accepted,
            test_satisfied: r.test_satisfied,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTrace {
    meta: RunMeta,
    rows: Vec<JsonRow>,
}

/// Metadata and rows of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub meta: RunMeta,
    pub rows: Vec<TraceRow>,
}

pub fn to_json(record: &RunRecord) -> CliResult<String> {
    let file = JsonTrace { meta: record.meta.clone(), rows: record.rows.iter().map(JsonRow::from).collect() };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_json(text: &str) -> CliResult<TraceFile> {
    let file: JsonTrace = serde_json::from_str(text).map_err(|e| CliError::Runtime(format!("bad JSON trace: {e}")))?;
    Ok(TraceFile { meta: file.meta, rows: file.rows.into_iter().map(TraceRow::from).collect() })
}

pub fn render(record: &RunRecord, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(to_csv(&record.rows)),
        Format::Json => to_json(record),
    }
}

pub fn write_trace(record: &RunRecord, path: &Path, format: Format) -> CliResult<()> {
    fs::write(path, render(record, format)?)?;
    Ok(())
}
