use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;
use serde_json::Value;

use crate::svg::{bar_chart, Bar};
use crate::{emit, read_json, Verdict};

pub(crate) const HELP: &str = "\
CSV columns (one row per verify report row, in input order):
  source         input file as given on the command line
  construction   construction verified
  n              node count
  edges          edge count of the input
  pass           true if the model agreed with the oracle
  max_abs_error  largest deviation from the oracle
  temperature    attention temperature used
  width          embedding width
  attempts       embedding draws (sparse2cycle)
  error          failure message, if the run failed

The SVG chart shows the pass rate of each input file.
Exit status is 1 if any merged row failed.";

#[derive(Args, Debug)]
pub(crate) struct ReportArgs {
    /// Verify report JSON files.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a pass-rate bar chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Serialize)]
struct CsvRow {
    source: String,
    construction: Option<String>,
    n: Option<u64>,
    edges: Option<u64>,
    pass: bool,
    max_abs_error: Option<f64>,
    temperature: Option<f64>,
    width: Option<u64>,
    attempts: Option<u64>,
    error: Option<String>,
}

fn csv_row(source: &str, row: &Value) -> CsvRow {
    CsvRow {
        source: source.to_string(),
        construction: row["construction"].as_str().map(str::to_string),
        n: row["n"].as_u64(),
        edges: row["edges"].as_u64(),
        pass: row["pass"].as_bool().unwrap_or(false),
        max_abs_error: row["max_abs_error"].as_f64(),
        temperature: row["temperature"].as_f64(),
        width: row["width"].as_u64(),
        attempts: row["attempts"].as_u64(),
        error: row["error"].as_str().map(str::to_string),
    }
}

pub(crate) fn run(a: ReportArgs, stdout: &mut dyn Write) -> anyhow::Result<Verdict> {
    let mut rows = Vec::new();
    let mut bars = Vec::new();
    for path in &a.inputs {
        let report: Value = read_json(path)?;
        let source = path.display().to_string();
        let items = report["rows"]
            .as_array()
            .with_context(|| format!("{source} is not a verify report (no `rows` array)"))?;
        let passed = items
            .iter()
            .filter(|r| r["pass"].as_bool() == Some(true))
            .count();
        bars.push(Bar {
            label: format!(
                "{source} ({})",
                report["construction"].as_str().unwrap_or("?")
            ),
            value: if items.is_empty() {
                0.0
            } else {
                passed as f64 / items.len() as f64
            },
        });
        rows.extend(items.iter().map(|r| csv_row(&source, r)));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let csv_bytes = w.into_inner()?;
    let svg = a.svg.as_ref().map(|_| bar_chart("pass rate", &bars));
    emit(a.out.as_deref(), stdout, &csv_bytes)?;
    if let (Some(path), Some(svg)) = (&a.svg, svg) {
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if rows.iter().all(|r| r.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}
