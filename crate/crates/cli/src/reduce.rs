use std::io::Write;
use std::path::PathBuf;

use anyhow::bail;
use clap::Args;

use grtl_core::{gen_cycles, reduce_cycles_to_eulerian, Graph, Turnaround};

use crate::{emit, read_json, to_json_bytes, SeedArg, Verdict};

#[derive(Args, Debug)]
pub(crate) struct ReduceArgs {
    /// Cycle-graph size N = m^2/2 for even m >= 4 (the instance has m nodes).
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    /// Number of cycles (1 or 2).
    #[arg(long, default_value_t = 1)]
    parts: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// `auto`, or an index into the sorted edge list.
    #[arg(long, default_value = "auto")]
    turnaround: String,
    /// Reduce this cycle graph (JSON) instead of a random one.
    #[arg(long = "in", conflicts_with_all = ["n", "parts"])]
    input: Option<PathBuf>,
    /// Instance path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub(crate) fn run(a: ReduceArgs, stdout: &mut dyn Write) -> anyhow::Result<Verdict> {
    let turnaround = match a.turnaround.as_str() {
        "auto" => Turnaround::Auto,
        s => match s.parse() {
            Ok(k) => Turnaround::Edge(k),
            Err(_) => bail!("--turnaround must be `auto` or an edge index, got `{s}`"),
        },
    };
    let g: Graph = match (&a.input, a.n) {
        (Some(path), _) => read_json(path)?,
        (None, Some(n)) => {
            if a.parts != 1 && a.parts != 2 {
                bail!("--parts must be 1 or 2");
            }
            gen_cycles(n, a.parts, a.seed.resolve()?)?
        }
        (None, None) => unreachable!("clap requires --n without --in"),
    };
    let inst = reduce_cycles_to_eulerian(&g, turnaround)?;
    emit(a.out.as_deref(), stdout, &to_json_bytes(&inst)?)?;
    Ok(Verdict::Pass)
}
