use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use grtl_core::graph::{
    gen_bounded_degree_digraph, gen_cycles, gen_erdos_renyi, gen_random_digraph,
};
use grtl_core::oracles::{complete_graph, cycle_graph};
use grtl_core::seed::derive;
use grtl_core::{
    fragment_cycle_census, oracle_connected, reduce_cycles_to_eulerian, verify_construction,
    verify_eulerian, ConstructionId, ConstructionReport, EulerianInstance, Graph, Mode, Turnaround,
    VerifyParams,
};

use crate::{emit, read_json, to_json_bytes, SeedArg, Verdict};

pub(crate) const HELP: &str = "\
Random inputs per trial t (seed derived from --seed and t):
  one-vs-two    union of 1 + t mod 2 cycles on n nodes
  power         directed G(n, p) with every out-degree >= 1
  sparse2cycle  directed graph with in/out degree <= d
  subgraph      undirected G(n, p)
  eulerian      reduction of 1 + t mod 2 cycles on N = n nodes (n = m^2/2)

With --in, the file is a graph JSON (an Eulerian instance JSON for
eulerian) and --trials is ignored. The report is JSON with one row per
trial; exit status is 1 if any row fails.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum Target {
    OneVsTwo,
    Power,
    #[value(name = "sparse2cycle", alias = "sparse-two-cycle")]
    Sparse2Cycle,
    Subgraph,
    Eulerian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum PatternKind {
    Triangle,
    Cycle,
    Clique,
    Path,
    Star,
}

impl PatternKind {
    pub(crate) fn graph(self, k: usize) -> anyhow::Result<Graph> {
        if !(2..=5).contains(&k) {
            bail!("pattern size k = {k} must lie in 2..=5");
        }
        Ok(match self {
            PatternKind::Triangle => complete_graph(3),
            PatternKind::Clique => complete_graph(k),
            PatternKind::Cycle if k < 3 => bail!("a cycle pattern needs k >= 3"),
            PatternKind::Cycle => cycle_graph(k),
            PatternKind::Path => {
                let edges: Vec<_> = (1..k).map(|v| (v - 1, v)).collect();
                grtl_core::graph_from_edges(k, &edges, false)?
            }
            PatternKind::Star => {
                let edges: Vec<_> = (1..k).map(|v| (0, v)).collect();
                grtl_core::graph_from_edges(k, &edges, false)?
            }
        })
    }
}

#[derive(Args, Debug)]
pub(crate) struct VerifyArgs {
    #[arg(long, value_enum)]
    construction: Target,
    /// Node count (for eulerian, the cycle-graph size N).
    #[arg(long)]
    n: Option<usize>,
    /// Power exponent.
    #[arg(long = "L", default_value_t = 2)]
    l: u32,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// MLP realisation: exact (registered maps) or explicit (ReLU nets).
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Pattern size for subgraph counting.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value_t = PatternKind::Triangle)]
    pattern: PatternKind,
    /// Degree bound for sparse2cycle.
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Oversampling factor of the RIP dimension.
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Attention temperature override (power, sparse2cycle).
    #[arg(long)]
    temperature: Option<f64>,
    /// Edge probability for power and subgraph inputs.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Input graph (or Eulerian instance) JSON instead of random trials.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock milliseconds per row (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Serialize)]
struct Params {
    n: usize,
    #[serde(rename = "L")]
    l: u32,
    eps: f64,
    mode: String,
    k: usize,
    pattern: PatternKind,
    d: usize,
    alpha: f64,
    temperature: Option<f64>,
    p: f64,
    trials: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Row {
    Construction(ConstructionReport),
    Eulerian(EulerianRow),
}

impl Row {
    fn pass(&self) -> bool {
        match self {
            Row::Construction(r) => r.pass,
            Row::Eulerian(r) => r.pass,
        }
    }
}

#[derive(Serialize)]
struct EulerianRow {
    construction: &'static str,
    n: usize,
    edges: usize,
    pass: bool,
    eulerian: bool,
    /// Connectivity of the source cycle graph (absent for `--in` instances).
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<bool>,
    census: Vec<usize>,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    construction: String,
    seed: Option<u64>,
    input: Option<String>,
    params: Params,
    passed: usize,
    total: usize,
    rows: Vec<Row>,
}

/// The random input of trial `t` for `construction` (not eulerian).
pub fn trial_graph(
    construction: ConstructionId,
    n: usize,
    p: f64,
    d: usize,
    seed: u64,
    t: usize,
) -> grtl_core::Result<Graph> {
    let s = derive(seed, 0x7631, t as u64);
    match construction {
        ConstructionId::OneVsTwo => gen_cycles(n, 1 + t % 2, s),
        ConstructionId::Power => gen_random_digraph(n, p, 1, s),
        ConstructionId::SparseTwoCycle => gen_bounded_degree_digraph(n, d, s),
        ConstructionId::Subgraph => gen_erdos_renyi(n, p, s),
    }
}

fn construction_id(t: Target) -> Option<ConstructionId> {
    match t {
        Target::OneVsTwo => Some(ConstructionId::OneVsTwo),
        Target::Power => Some(ConstructionId::Power),
        Target::Sparse2Cycle => Some(ConstructionId::SparseTwoCycle),
        Target::Subgraph => Some(ConstructionId::Subgraph),
        Target::Eulerian => None,
    }
}

fn eulerian_row(inst: &EulerianInstance, oracle: Option<bool>) -> anyhow::Result<EulerianRow> {
    let eulerian = verify_eulerian(inst)?;
    let census = fragment_cycle_census(inst)?;
    Ok(EulerianRow {
        construction: "eulerian",
        n: inst.n,
        edges: inst.edges.len(),
        pass: oracle.map_or(eulerian, |o| o == eulerian),
        eulerian,
        oracle,
        census,
    })
}

pub(crate) fn run(a: VerifyArgs, stdout: &mut dyn Write) -> anyhow::Result<Verdict> {
    let mode = Mode::parse(&a.mode)?;
    if a.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if !(0.0..=1.0).contains(&a.p) {
        bail!("--p = {} is not a probability", a.p);
    }
    if a.eps.is_nan() || a.eps <= 0.0 {
        bail!("--eps must be positive");
    }
    let pattern = if a.construction == Target::Subgraph {
        Some(a.pattern.graph(if a.pattern == PatternKind::Triangle {
            3
        } else {
            a.k
        })?)
    } else {
        None
    };
    // the 2-cycle model samples its embedding, so it needs a seed even on a
    // given graph
    let input = a.input.as_ref();
    let seed = if input.is_none() || a.construction == Target::Sparse2Cycle {
        Some(a.seed.resolve()?)
    } else {
        None
    };

    let rows: Vec<Row> = match (construction_id(a.construction), input) {
        (None, Some(path)) => {
            let inst: EulerianInstance = read_json(path)?;
            vec![Row::Eulerian(eulerian_row(&inst, None)?)]
        }
        (None, None) => {
            let n = a.n.context("--n (the cycle-graph size N) is required")?;
            let seed = seed.expect("seed resolved for random trials");
            // validate once before fanning out
            reduce_cycles_to_eulerian(
                &gen_cycles(n, 1, derive(seed, 0x7631, 0))?,
                Turnaround::Auto,
            )?;
            (0..a.trials)
                .into_par_iter()
                .map(|t| {
                    let g = gen_cycles(n, 1 + t % 2, derive(seed, 0x7631, t as u64))?;
                    let inst = reduce_cycles_to_eulerian(&g, Turnaround::Auto)?;
                    Ok(Row::Eulerian(eulerian_row(
                        &inst,
                        Some(oracle_connected(&g)),
                    )?))
                })
                .collect::<anyhow::Result<_>>()?
        }
        (Some(id), input) => {
            let params = VerifyParams {
                l: a.l,
                eps: a.eps,
                mode,
                pattern,
                d: a.d,
                alpha: a.alpha,
                temperature: a.temperature,
                seed: seed.unwrap_or(0),
            };
            let strip = |mut r: ConstructionReport| {
                if !a.timings {
                    r.millis = None;
                }
                Row::Construction(r)
            };
            match input {
                Some(path) => {
                    let g: Graph = read_json(path)?;
                    if !g.is_consistent() {
                        bail!("{} is not a consistent graph", path.display());
                    }
                    vec![strip(verify_construction(id, &g, &params))]
                }
                None => {
                    let n = a.n.context("--n is required for random trials")?;
                    let seed = seed.expect("seed resolved for random trials");
                    // generator preconditions are configuration errors
                    trial_graph(id, n, a.p, a.d, seed, 0)?;
                    let graphs = (0..a.trials)
                        .into_par_iter()
                        .map(|t| trial_graph(id, n, a.p, a.d, seed, t))
                        .collect::<grtl_core::Result<Vec<_>>>()?;
                    graphs
                        .par_iter()
                        .enumerate()
                        .map(|(t, g)| {
                            let p = VerifyParams {
                                seed: derive(seed, 0xE3B, t as u64),
                                ..params.clone()
                            };
                            strip(verify_construction(id, g, &p))
                        })
                        .collect()
                }
            }
        }
    };

    let passed = rows.iter().filter(|r| r.pass()).count();
    let total = rows.len();
    let report = Report {
        command: "verify",
        construction: a
            .construction
            .to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string(),
        seed,
        input: a.input.as_ref().map(|p| p.display().to_string()),
        params: Params {
            n: a.n.unwrap_or_else(|| {
                rows.first().map_or(0, |r| match r {
                    Row::Construction(c) => c.n,
                    Row::Eulerian(e) => e.n,
                })
            }),
            l: a.l,
            eps: a.eps,
            mode: a.mode.clone(),
            k: a.k,
            pattern: a.pattern,
            d: a.d,
            alpha: a.alpha,
            temperature: a.temperature,
            p: a.p,
            trials: if a.input.is_some() { 1 } else { a.trials },
        },
        passed,
        total,
        rows,
    };
    emit(a.out.as_deref(), stdout, &to_json_bytes(&report)?)?;
    Ok(if passed == total {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}
