use std::io::Write;
use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use grtl_core::corpus::{gen_corpus_item, shuffle_items};
use grtl_core::tokenize::{
    tokenize_adjacency, tokenize_edgelist, tokenize_laplacian, write_dataset,
};
use grtl_core::{CorpusSpec, Family, Format, LabeledGraph, Scheme, TargetLabel, TokenizedGraph};

use crate::{emit, SeedArg, Verdict};

pub(crate) const HELP: &str = "\
Families (comma-separated; item i uses family i mod count):
  er, rgg, ba, sbm, cycles
Unset family parameters follow the regime of --label: connected draws
favour connected graphs, disconnected draws favour fragmented ones, and
draws that miss the label are resampled.

CSV columns (--format csv):
  graph_id   family name and pre-shuffle index
  n          node count
  scheme     adjacency | edge_list | laplacian
  label      1 if connected, 0 otherwise
  pad_n      padded token count
  dim        token dimension
  count      token count
  x0, x1...  the dim x count token matrix, row-major";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum LabelArg {
    Connected,
    Disconnected,
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
pub(crate) struct GenArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    family: Vec<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, value_enum, default_value_t = LabelArg::Any)]
    label: LabelArg,
    /// Erdős–Rényi edge probability.
    #[arg(long)]
    p: Option<f64>,
    /// Random geometric radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Edges attached per new node in preferential attachment.
    #[arg(long = "ba-m")]
    ba_m: Option<usize>,
    /// Independent preferential-attachment components.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long = "p-intra")]
    p_intra: Option<f64>,
    #[arg(long = "p-inter")]
    p_inter: Option<f64>,
    /// Cycles in the cycles family (1 or 2; default alternates).
    #[arg(long)]
    parts: Option<usize>,
    /// adjacency | edgelist | laplacian
    #[arg(long, default_value = "adjacency")]
    tokenizer: String,
    /// Laplacian eigenvector count.
    #[arg(long)]
    m: Option<usize>,
    /// Padded token count (default: n).
    #[arg(long)]
    pad: Option<usize>,
    /// Append the node index as a scalar coordinate of adjacency tokens.
    #[arg(long)]
    index: bool,
    /// Dataset path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default: from the --out extension, else jsonl).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn family(name: &str, a: &GenArgs) -> anyhow::Result<Family> {
    Ok(match Family::from_name(name)? {
        Family::ErdosRenyi { .. } => Family::ErdosRenyi { p: a.p },
        Family::RandomGeometric { .. } => Family::RandomGeometric { radius: a.radius },
        Family::BarabasiAlbert { .. } => Family::BarabasiAlbert {
            m: a.ba_m,
            components: a.components,
        },
        Family::StochasticBlock { .. } => Family::StochasticBlock {
            blocks: a.blocks,
            p_intra: a.p_intra,
            p_inter: a.p_inter,
        },
        Family::Cycles { .. } => Family::Cycles { parts: a.parts },
    })
}

fn tokenize(
    item: &LabeledGraph,
    index: usize,
    scheme: Scheme,
    a: &GenArgs,
) -> anyhow::Result<TokenizedGraph> {
    let pad = a.pad.unwrap_or(a.n);
    let tg = match scheme {
        Scheme::Adjacency => tokenize_adjacency(&item.graph, pad, a.index)?,
        Scheme::EdgeList => tokenize_edgelist(&item.graph, pad)?,
        Scheme::Laplacian => tokenize_laplacian(&item.graph, a.m.expect("checked before fan-out"))?,
    };
    Ok(tg
        .with_id(format!("{}-{index}", item.family))
        .with_label(f64::from(u8::from(item.connected))))
}

pub(crate) fn run(a: GenArgs, stdout: &mut dyn Write) -> anyhow::Result<Verdict> {
    let scheme = Scheme::parse(&a.tokenizer)?;
    match scheme {
        Scheme::Laplacian if a.m.is_none() => bail!("--m is required for the laplacian tokenizer"),
        Scheme::Laplacian if a.pad.is_some() => {
            bail!("--pad does not apply to the laplacian tokenizer")
        }
        Scheme::Adjacency => {}
        _ if a.index => bail!("--index applies to the adjacency tokenizer only"),
        _ => {}
    }
    if a.pad.is_some_and(|p| p < a.n) {
        bail!("--pad must be at least n");
    }
    let spec = CorpusSpec {
        families: a
            .family
            .iter()
            .map(|f| family(f, &a))
            .collect::<anyhow::Result<_>>()?,
        n: a.n,
        count: a.count,
        seed: a.seed.resolve()?,
    };
    spec.validate()?;
    let label = match a.label {
        LabelArg::Connected => TargetLabel::Connected,
        LabelArg::Disconnected => TargetLabel::Disconnected,
        LabelArg::Any => TargetLabel::None,
    };
    let items = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let item = gen_corpus_item(&spec, label, i)?;
            tokenize(&item, i, scheme, &a)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let items = shuffle_items(&spec, items);
    let format = match a.format {
        Some(FormatArg::Jsonl) => Format::Jsonl,
        Some(FormatArg::Csv) => Format::Csv,
        None => a.out.as_deref().map_or(Format::Jsonl, Format::from_path),
    };
    let mut bytes = Vec::new();
    write_dataset(&items, &mut bytes, format)?;
    emit(a.out.as_deref(), stdout, &bytes)?;
    Ok(Verdict::Pass)
}
