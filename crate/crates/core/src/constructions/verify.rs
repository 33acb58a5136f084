use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracles::{
    oracle_connected, oracle_matrix_power, oracle_subgraph_count, oracle_two_cycle_indicator,
};

use super::one_vs_two::run_one_vs_two;
use super::power::{build_power_transformer_at, run_power};
use super::sparse_two_cycle::{run_sparse_two_cycle, sparse_default_temperature};
use super::subgraph::run_subgraph_counter;
use super::{build_one_vs_two, build_power_transformer, build_subgraph_counter, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionId {
    OneVsTwo,
    Power,
    SparseTwoCycle,
    Subgraph,
}

impl ConstructionId {
    pub const ALL: [ConstructionId; 4] = [
        ConstructionId::OneVsTwo,
        ConstructionId::Power,
        ConstructionId::SparseTwoCycle,
        ConstructionId::Subgraph,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstructionId::OneVsTwo => "one_vs_two",
            ConstructionId::Power => "power",
            ConstructionId::SparseTwoCycle => "sparse_two_cycle",
            ConstructionId::Subgraph => "subgraph",
        }
    }
}

impl fmt::Display for ConstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstructionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "one_vs_two" | "1v2" => Ok(ConstructionId::OneVsTwo),
            "power" => Ok(ConstructionId::Power),
            "sparse_two_cycle" | "sparse2cycle" | "two_cycle" => Ok(ConstructionId::SparseTwoCycle),
            "subgraph" | "subgraph_count" => Ok(ConstructionId::Subgraph),
            _ => Err(Error::UnknownConstruction(s.to_string())),
        }
    }
}

/// Builder parameters; each construction reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    /// Power exponent.
    pub l: u32,
    pub eps: f64,
    pub mode: Mode,
    /// Pattern for subgraph counting; its node count is `k`.
    pub pattern: Option<Graph>,
    /// Degree bound for 2-cycle detection.
    pub d: usize,
    pub alpha: f64,
    /// Overrides the default temperature of the power and 2-cycle models.
    pub temperature: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            l: 2,
            eps: 1e-6,
            mode: Mode::ExactMap,
            pattern: None,
            d: 8,
            alpha: 4.0,
            temperature: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub construction: ConstructionId,
    pub n: usize,
    pub edges: usize,
    pub pass: bool,
    /// Largest deviation from the oracle (for the power model, the larger of
    /// the pre-rounding and final deviations); absent when the run failed.
    pub max_abs_error: Option<f64>,
    pub oracle: Vec<f64>,
    pub transformer: Vec<f64>,
    pub temperature: Option<f64>,
    pub width: usize,
    /// Embedding draws used by the 2-cycle model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Outcome {
    pass: bool,
    max_abs_error: f64,
    oracle: Vec<f64>,
    transformer: Vec<f64>,
    temperature: Option<f64>,
    width: usize,
    attempts: Option<usize>,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn bools(v: &[bool]) -> Vec<f64> {
    v.iter().map(|&b| f64::from(u8::from(b))).collect()
}

fn run(id: ConstructionId, g: &Graph, p: &VerifyParams) -> Result<Outcome> {
    let n = g.n();
    match id {
        ConstructionId::OneVsTwo => {
            let spec = build_one_vs_two(n, p.mode)?;
            let got = run_one_vs_two(&spec, g)?;
            let want = f64::from(u8::from(oracle_connected(g)));
            Ok(Outcome {
                pass: got == want,
                max_abs_error: (got - want).abs(),
                oracle: vec![want],
                transformer: vec![got],
                temperature: None,
                width: spec.embedding_width(),
                attempts: None,
            })
        }
        ConstructionId::Power => {
            let spec = match p.temperature {
                Some(c) => build_power_transformer_at(n, p.l, c, p.mode)?,
                None => build_power_transformer(n, p.l, p.eps, p.mode)?,
            };
            let got = run_power(&spec, g)?;
            let want = oracle_matrix_power(g, p.l)?;
            let want_rows: Vec<f64> = (0..n)
                .flat_map(|i| want.row(i).iter().map(|&x| x as f64))
                .collect();
            let got_rows: Vec<f64> = got.rows.concat();
            let mut pre = 0.0f64;
            for (step, layer) in got.pre_rounding.iter().enumerate() {
                let exact = oracle_matrix_power(g, step as u32 + 2)?;
                for (i, row) in layer.iter().enumerate() {
                    for (j, &w) in row.iter().enumerate() {
                        pre = pre.max((w - exact.get(i, j) as f64).abs());
                    }
                }
            }
            Ok(Outcome {
                pass: got_rows == want_rows && pre < p.eps,
                max_abs_error: pre.max(max_diff(&got_rows, &want_rows)),
                oracle: want_rows,
                transformer: got_rows,
                temperature: Some(got.temperature),
                width: spec.embedding_width(),
                attempts: None,
            })
        }
        ConstructionId::SparseTwoCycle => {
            let c = p
                .temperature
                .unwrap_or_else(|| sparse_default_temperature(n));
            let got = run_sparse_two_cycle(g, p.d, p.alpha, c, p.seed)?;
            let want = bools(&oracle_two_cycle_indicator(g)?);
            let got_v = bools(&got.indicator);
            Ok(Outcome {
                pass: got_v == want,
                max_abs_error: max_diff(&got_v, &want),
                oracle: want,
                transformer: got_v,
                temperature: Some(c),
                width: got.width,
                attempts: Some(got.attempts),
            })
        }
        ConstructionId::Subgraph => {
            let pattern = p.pattern.as_ref().ok_or_else(|| {
                Error::InvalidParameter("subgraph counting needs a pattern".into())
            })?;
            let spec = build_subgraph_counter(n, pattern.n(), pattern)?;
            let got = run_subgraph_counter(&spec, g)? as f64;
            let want = oracle_subgraph_count(g, pattern)? as f64;
            Ok(Outcome {
                pass: got == want,
                max_abs_error: (got - want).abs(),
                oracle: vec![want],
                transformer: vec![got],
                temperature: spec
                    .layers
                    .get(1)
                    .and_then(|l| l.heads.first())
                    .map(|h| h.temperature),
                width: spec.embedding_width(),
                attempts: None,
            })
        }
    }
}

/// Builds the model for `g`, runs it, and compares against the oracle.
/// Failures inside the run are recorded in the report (`pass = false`)
/// rather than returned, so corpus sweeps keep going.
pub fn verify_construction(
    id: ConstructionId,
    g: &Graph,
    params: &VerifyParams,
) -> ConstructionReport {
    let start = Instant::now();
    let result = run(id, g, params);
    let millis = Some(start.elapsed().as_secs_f64() * 1e3);
    let base = ConstructionReport {
        construction: id,
        n: g.n(),
        edges: g.edge_count(),
        pass: false,
        max_abs_error: None,
        oracle: Vec::new(),
        transformer: Vec::new(),
        temperature: None,
        width: 0,
        attempts: None,
        millis,
        error: None,
    };
    match result {
        Ok(o) => ConstructionReport {
            pass: o.pass,
            max_abs_error: Some(o.max_abs_error),
            oracle: o.oracle,
            transformer: o.transformer,
            temperature: o.temperature,
            width: o.width,
            attempts: o.attempts,
            ..base
        },
        Err(e) => ConstructionReport {
            error: Some(e.to_string()),
            ..base
        },
    }
}
