use std::io::Write;
use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use grtl_core::constructions::sparse_two_cycle::sparse_default_temperature;
use grtl_core::rip::{margin_census, rip_dim};
use grtl_core::seed::derive;
use grtl_core::{
    build_one_vs_two, build_power_transformer, build_sparse_two_cycle, verify_construction,
    ConstructionId, Mode, PartitionPlan, VerifyParams,
};

use crate::verify::{trial_graph, Target};
use crate::{emit, SeedArg, Verdict};

pub(crate) const HELP: &str = "\
CSV columns (one row per parameter value and construction):
  param          swept parameter name
  value          parameter value (temperature, alpha, or n)
  construction   construction measured
  n              node count
  trials         random inputs (or census draws) per value
  successes      trials agreeing with the oracle (census: draws meeting
                 every margin; width-accounting: 1 if width <= bound)
  success_rate   successes / trials
  max_abs_error  largest deviation from the oracle over the trials
  width          embedding width of the emitted model
  bound          width bound (width-accounting only)
  note           precondition failure, if the model could not be built

Parameters:
  temperature       attention temperature of power or sparse2cycle
  rip-alpha         oversampling alpha; success = all off-support margins
                    <= 1/2 for a random support of size d
  width-accounting  --values are node counts; exit 1 if a width exceeds
                    its bound";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum Param {
    Temperature,
    RipAlpha,
    WidthAccounting,
}

#[derive(Args, Debug)]
pub(crate) struct SweepArgs {
    #[arg(long, value_enum)]
    param: Param,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Construction (temperature: power or sparse2cycle; width-accounting:
    /// restricts to one construction).
    #[arg(long, value_enum)]
    construction: Option<Target>,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long = "L", default_value_t = 2)]
    l: u32,
    #[arg(long, default_value_t = 8)]
    d: usize,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Pattern size for subgraph width accounting.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Edge probability for power inputs.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Default)]
struct CsvRow {
    param: &'static str,
    value: f64,
    construction: &'static str,
    n: usize,
    trials: Option<usize>,
    successes: Option<usize>,
    success_rate: Option<f64>,
    max_abs_error: Option<f64>,
    width: Option<usize>,
    bound: Option<usize>,
    note: Option<String>,
}

pub(crate) fn run(a: SweepArgs, stdout: &mut dyn Write) -> anyhow::Result<Verdict> {
    if a.values.iter().any(|v| !v.is_finite()) {
        bail!("--values must be finite numbers");
    }
    if a.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let (rows, verdict) = match a.param {
        Param::Temperature => (temperature(&a)?, Verdict::Pass),
        Param::RipAlpha => (rip_alpha(&a)?, Verdict::Pass),
        Param::WidthAccounting => width_accounting(&a)?,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    emit(a.out.as_deref(), stdout, &w.into_inner()?)?;
    Ok(verdict)
}

fn temperature(a: &SweepArgs) -> anyhow::Result<Vec<CsvRow>> {
    let id = match a.construction.unwrap_or(Target::Sparse2Cycle) {
        Target::Power => ConstructionId::Power,
        Target::Sparse2Cycle => ConstructionId::SparseTwoCycle,
        other => bail!("temperature sweeps support power and sparse2cycle, not {other:?}"),
    };
    if a.values.iter().any(|&c| c <= 0.0) {
        bail!("temperatures must be positive");
    }
    let seed = a.seed.resolve()?;
    trial_graph(id, a.n, a.p, a.d, seed, 0)?;
    let graphs = (0..a.trials)
        .into_par_iter()
        .map(|t| trial_graph(id, a.n, a.p, a.d, seed, t))
        .collect::<grtl_core::Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..a.values.len())
        .flat_map(|v| (0..a.trials).map(move |t| (v, t)))
        .collect();
    let reports: Vec<_> = jobs
        .par_iter()
        .map(|&(v, t)| {
            let p = VerifyParams {
                l: a.l,
                d: a.d,
                alpha: a.alpha,
                temperature: Some(a.values[v]),
                seed: derive(seed, 0xE3B, t as u64),
                ..VerifyParams::default()
            };
            verify_construction(id, &graphs[t], &p)
        })
        .collect();
    Ok(a.values
        .iter()
        .zip(reports.chunks(a.trials))
        .map(|(&value, chunk)| {
            let successes = chunk.iter().filter(|r| r.pass).count();
            let errors: Vec<f64> = chunk.iter().filter_map(|r| r.max_abs_error).collect();
            CsvRow {
                param: "temperature",
                value,
                construction: id.as_str(),
                n: a.n,
                trials: Some(a.trials),
                successes: Some(successes),
                success_rate: Some(successes as f64 / a.trials as f64),
                max_abs_error: errors.iter().copied().reduce(f64::max),
                width: chunk.iter().map(|r| r.width).max().filter(|&w| w > 0),
                note: chunk.iter().find_map(|r| r.error.clone()),
                ..CsvRow::default()
            }
        })
        .collect())
}

fn rip_alpha(a: &SweepArgs) -> anyhow::Result<Vec<CsvRow>> {
    if a.values.iter().any(|&v| v <= 0.0) {
        bail!("alpha values must be positive");
    }
    if a.d == 0 || a.d > a.n {
        bail!("--d must lie in 1..=n");
    }
    let seed = a.seed.resolve()?;
    a.values
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let rate = margin_census(a.n, a.d, alpha, a.trials, derive(seed, 0xA1FA, i as u64))?;
            let successes = (rate * a.trials as f64).round() as usize;
            Ok(CsvRow {
                param: "rip-alpha",
                value: alpha,
                construction: ConstructionId::SparseTwoCycle.as_str(),
                n: a.n,
                trials: Some(a.trials),
                successes: Some(successes),
                success_rate: Some(rate),
                width: Some(2 * rip_dim(a.n, a.d, alpha) + 2),
                ..CsvRow::default()
            })
        })
        .collect()
}

fn width_of(id: ConstructionId, n: usize, a: &SweepArgs) -> grtl_core::Result<(usize, usize)> {
    Ok(match id {
        ConstructionId::OneVsTwo => (
            build_one_vs_two(n, Mode::ExactMap)?.embedding_width(),
            3 * n,
        ),
        ConstructionId::Power => (
            build_power_transformer(n, a.l, 1e-6, Mode::ExactMap)?.embedding_width(),
            3 * n,
        ),
        ConstructionId::SparseTwoCycle => {
            let spec = build_sparse_two_cycle(n, a.d, a.alpha, sparse_default_temperature(n), 0)?;
            (spec.embedding_width(), 2 * rip_dim(n, a.d, a.alpha) + 2)
        }
        // The plan fixes the width without materialising the weights, which
        // grow quadratically in it.
        ConstructionId::Subgraph => {
            let plan = PartitionPlan::new(n, a.k)?;
            (plan.width(), plan.width_bound())
        }
    })
}

fn width_accounting(a: &SweepArgs) -> anyhow::Result<(Vec<CsvRow>, Verdict)> {
    let ids: Vec<ConstructionId> = match a.construction {
        None => ConstructionId::ALL.to_vec(),
        Some(Target::OneVsTwo) => vec![ConstructionId::OneVsTwo],
        Some(Target::Power) => vec![ConstructionId::Power],
        Some(Target::Sparse2Cycle) => vec![ConstructionId::SparseTwoCycle],
        Some(Target::Subgraph) => vec![ConstructionId::Subgraph],
        Some(Target::Eulerian) => bail!("eulerian has no embedding width"),
    };
    let mut ns = Vec::with_capacity(a.values.len());
    for &v in &a.values {
        if v < 1.0 || v.fract() != 0.0 {
            bail!("width-accounting values are node counts; got {v}");
        }
        ns.push(v as usize);
    }
    let jobs: Vec<(usize, ConstructionId)> = ns
        .iter()
        .flat_map(|&n| ids.iter().map(move |&id| (n, id)))
        .collect();
    let rows: Vec<CsvRow> = jobs
        .par_iter()
        .map(|&(n, id)| {
            let base = CsvRow {
                param: "width-accounting",
                value: n as f64,
                construction: id.as_str(),
                n,
                ..CsvRow::default()
            };
            match width_of(id, n, a) {
                Ok((width, bound)) => {
                    let ok = usize::from(width <= bound);
                    CsvRow {
                        trials: Some(1),
                        successes: Some(ok),
                        success_rate: Some(ok as f64),
                        width: Some(width),
                        bound: Some(bound),
                        ..base
                    }
                }
                Err(e) => CsvRow {
                    note: Some(e.to_string()),
                    ..base
                },
            }
        })
        .collect();
    let fail = rows.iter().any(|r| r.successes == Some(0));
    Ok((rows, if fail { Verdict::Fail } else { Verdict::Pass }))
}
