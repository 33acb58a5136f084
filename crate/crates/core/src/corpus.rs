//! Labelled connectivity corpora mixed from several graph families.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{
    gen_barabasi_albert, gen_cycles, gen_erdos_renyi, gen_random_geometric, gen_stochastic_block,
    rgg_critical_radius, Graph,
};
use crate::oracles::oracle_connected;
use crate::seed;

/// Resamples allowed per corpus item before giving up.
pub const MAX_RESAMPLES: usize = 100;

/// A graph family. `None` parameters are filled from the regime defaults for
/// the requested label (see [`Family::resolve`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ErdosRenyi {
        p: Option<f64>,
    },
    RandomGeometric {
        radius: Option<f64>,
    },
    BarabasiAlbert {
        m: Option<usize>,
        /// Independent preferential-attachment graphs placed side by side.
        components: Option<usize>,
    },
    StochasticBlock {
        blocks: Option<usize>,
        p_intra: Option<f64>,
        p_inter: Option<f64>,
    },
    Cycles {
        parts: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetLabel {
    Connected,
    Disconnected,
    None,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::ErdosRenyi { .. } => "erdos_renyi",
            Family::RandomGeometric { .. } => "random_geometric",
            Family::BarabasiAlbert { .. } => "barabasi_albert",
            Family::StochasticBlock { .. } => "stochastic_block",
            Family::Cycles { .. } => "cycles",
        }
    }

    pub fn from_name(name: &str) -> Result<Family> {
        Ok(match name {
            "er" | "erdos_renyi" => Family::ErdosRenyi { p: None },
            "rgg" | "random_geometric" => Family::RandomGeometric { radius: None },
            "ba" | "barabasi_albert" => Family::BarabasiAlbert {
                m: None,
                components: None,
            },
            "sbm" | "stochastic_block" => Family::StochasticBlock {
                blocks: None,
                p_intra: None,
                p_inter: None,
            },
            "cycles" => Family::Cycles { parts: None },
            other => return Err(invalid(format!("unknown graph family `{other}`"))),
        })
    }

    /// Fills unset parameters with regime defaults for `label` at size `n`.
    ///
    /// ER uses `2 ln n / n` (connected), `ln n / (2n)` (disconnected) or
    /// `ln n / n`; RGG scales the critical radius by 2, 1/2 or 1; BA attaches
    /// `m = 2` edges per node and splits into two components for the
    /// disconnected label; SBM uses two blocks with `p_intra = 0.5` and
    /// `p_inter` of 0.05 or 0.
    pub fn resolve(&self, n: usize, label: TargetLabel) -> Family {
        let ln_ratio = (n.max(2) as f64).ln() / n.max(2) as f64;
        let pick = |c: f64, d: f64, none: f64| match label {
            TargetLabel::Connected => c,
            TargetLabel::Disconnected => d,
            TargetLabel::None => none,
        };
        match *self {
            Family::ErdosRenyi { p } => Family::ErdosRenyi {
                p: Some(
                    p.unwrap_or_else(|| pick(2.0 * ln_ratio, 0.5 * ln_ratio, ln_ratio).min(1.0)),
                ),
            },
            Family::RandomGeometric { radius } => Family::RandomGeometric {
                radius: Some(
                    radius.unwrap_or_else(|| pick(2.0, 0.5, 1.0) * rgg_critical_radius(n)),
                ),
            },
            Family::BarabasiAlbert { m, components } => Family::BarabasiAlbert {
                m: Some(m.unwrap_or(2)),
                components: Some(components.unwrap_or(match label {
                    TargetLabel::Disconnected => 2,
                    _ => 1,
                })),
            },
            Family::StochasticBlock {
                blocks,
                p_intra,
                p_inter,
            } => Family::StochasticBlock {
                blocks: Some(blocks.unwrap_or(2)),
                p_intra: Some(p_intra.unwrap_or(0.5)),
                p_inter: Some(p_inter.unwrap_or(pick(0.05, 0.0, 0.05))),
            },
            Family::Cycles { parts } => Family::Cycles {
                parts: parts.or(match label {
                    TargetLabel::Connected => Some(1),
                    TargetLabel::Disconnected => Some(2),
                    TargetLabel::None => None,
                }),
            },
        }
    }

    /// Samples one graph from a resolved family.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Graph> {
        match *self {
            Family::ErdosRenyi { p } => gen_erdos_renyi(n, p.unwrap_or(0.1), seed),
            Family::RandomGeometric { radius } => {
                gen_random_geometric(n, radius.unwrap_or_else(|| rgg_critical_radius(n)), seed)
            }
            Family::BarabasiAlbert { m, components } => {
                let m = m.unwrap_or(2);
                let c = components.unwrap_or(1).max(1);
                if n < c * (m + 1) {
                    return Err(invalid(format!(
                        "n = {n} too small for {c} attachment components with m = {m}"
                    )));
                }
                let mut g = Graph::empty(0, false);
                for part in 0..c {
                    let size = n / c + usize::from(part < n % c);
                    let piece = gen_barabasi_albert(size, m, seed::derive(seed, 1, part as u64))?;
                    g = g.disjoint_union(&piece)?;
                }
                Ok(g)
            }
            Family::StochasticBlock {
                blocks,
                p_intra,
                p_inter,
            } => gen_stochastic_block(
                n,
                blocks.unwrap_or(2),
                p_intra.unwrap_or(0.5),
                p_inter.unwrap_or(0.05),
                seed,
            ),
            Family::Cycles { parts } => {
                let parts = parts.unwrap_or(1 + (seed & 1) as usize);
                gen_cycles(n, parts, seed)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: Option<f64>| match p {
            Some(p) if !(0.0..=1.0).contains(&p) => {
                Err(invalid(format!("{name} = {p} is not a probability")))
            }
            _ => Ok(()),
        };
        match *self {
            Family::ErdosRenyi { p } => prob("p", p),
            Family::StochasticBlock {
                p_intra, p_inter, ..
            } => prob("p_intra", p_intra).and(prob("p_inter", p_inter)),
            Family::RandomGeometric { radius: Some(r) } if r.is_nan() || r < 0.0 => {
                Err(invalid("radius must be non-negative"))
            }
            Family::BarabasiAlbert { m: Some(0), .. } => Err(invalid("m must be positive")),
            Family::Cycles { parts: Some(p) } if p != 1 && p != 2 => {
                Err(invalid("parts must be 1 or 2"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    /// Families mixed in equal proportions (item `i` uses family `i mod len`).
    pub families: Vec<Family>,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub connected: bool,
    pub family: String,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(invalid("count must be at least 1"));
        }
        if self.families.is_empty() {
            return Err(invalid("at least one family is required"));
        }
        self.families.iter().try_for_each(Family::validate)
    }
}

/// Generates item `index` (before shuffling). Exposed so callers can fan out
/// over items; the result depends only on `(spec, label, index)`.
pub fn gen_corpus_item(
    spec: &CorpusSpec,
    label: TargetLabel,
    index: usize,
) -> Result<LabeledGraph> {
    let family = spec.families[index % spec.families.len()].resolve(spec.n, label);
    for attempt in 0..=MAX_RESAMPLES {
        let s = seed::derive(spec.seed, index as u64, attempt as u64);
        let graph = family.sample(spec.n, s)?;
        let connected = oracle_connected(&graph);
        let ok = match label {
            TargetLabel::Connected => connected,
            TargetLabel::Disconnected => !connected,
            TargetLabel::None => true,
        };
        if ok {
            return Ok(LabeledGraph {
                graph,
                connected,
                family: family.name().to_string(),
            });
        }
    }
    Err(Error::RejectionExhausted(MAX_RESAMPLES))
}

/// Deterministic shuffle order applied to a corpus of `count` items.
pub fn corpus_order(spec: &CorpusSpec) -> Vec<usize> {
    let mut order: Vec<usize> = (0..spec.count).collect();
    order.shuffle(&mut seed::rng(seed::derive(spec.seed, u64::MAX, 0)));
    order
}

/// Full corpus: items generated independently, then shuffled by seed.
pub fn gen_corpus(spec: &CorpusSpec, label: TargetLabel) -> Result<Vec<LabeledGraph>> {
    spec.validate()?;
    let items = (0..spec.count)
        .map(|i| gen_corpus_item(spec, label, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(shuffle_items(spec, items))
}

/// Applies [`corpus_order`] to items generated in index order.
pub fn shuffle_items<T>(spec: &CorpusSpec, items: Vec<T>) -> Vec<T> {
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    corpus_order(spec)
        .into_iter()
        .map(|i| slots[i].take().expect("order is a permutation"))
        .collect()
}
