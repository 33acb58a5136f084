//! One attention layer that flags nodes lying on a directed 2-cycle, in width
//! `2p + 2` with `p = ⌈α d ln n⌉`.
//!
//! The input MLP sends row `a_i` to `[φ(a_i); y_i; 1; 0]`, where `φ(a_i)` has
//! inner product 1 with `y_j` for every out-neighbour `j` and small inner
//! products elsewhere, and sends the appended dummy token to `[0; 0; 0; 1]`.
//! The head scores real pairs by `c(<φ_i, y_j> + <φ_j, y_i>)`, which is `2c`
//! exactly on mutual edges, and the dummy by `7c/4`. Its value reads the
//! real-token flag, so the last output coordinate is the attention mass on
//! real tokens: above 1/2 iff some mutual partner outscores the dummy.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::linalg::{dot, Matrix};
use crate::nn::{
    transformer_forward_traced, AttentionHead, ExactFn, ExactMapParams, Layer, MlpStage,
    TransformerSpec,
};
use crate::rip::{compute_phi, sample_rip_vectors, RipSystem};
use crate::seed;
use crate::tokenize::tokenize_adjacency;

/// Resamples of the embedding allowed after the first draw.
pub const MAX_RESAMPLES: usize = 5;

/// Largest tolerated real-token mass ratio `Σ exp(c(s_ij - 7/4))` over
/// non-mutual keys of one query; 1/4 keeps that mass below 1/5.
pub const TAIL_BUDGET: f64 = 0.25;

/// Scores at least this large count as mutual edges in the confidence check.
const MUTUAL_SCORE: f64 = 2.0 - 1e-6;

const DUMMY_SCORE: f64 = 1.75;

/// `4 ln(n / 1e-6)`: the `c/4` gap between a mutual edge and the dummy then
/// outweighs all `n` competitors by a factor `1e6`.
pub fn sparse_default_temperature(n: usize) -> f64 {
    4.0 * (n as f64 / 1e-6).ln()
}

fn rip_embed(token: &[f64], i: usize, params: &ExactMapParams) -> Result<Vec<f64>> {
    let n = params.usize(0)?;
    let d = params.usize(1)?;
    let y = params
        .matrices
        .first()
        .ok_or_else(|| invalid("rip embed needs the embedding matrix"))?;
    // rows are zero-padded to n + 1 to make room for the dummy token
    if token.len() != n + 1 || y.cols() != n {
        return Err(Error::DimensionMismatch(
            "rip embed: bad token or matrix".into(),
        ));
    }
    let p = y.rows();
    let mut out = vec![0.0; 2 * p + 2];
    if i >= n {
        out[2 * p + 1] = 1.0;
        return Ok(out);
    }
    let support: Vec<usize> = (0..n).filter(|&j| token[j] != 0.0).collect();
    let sys = RipSystem::from_matrix(y.clone(), d, 0.0, 0);
    let phi = compute_phi(&sys, &support)?.phi;
    out[..p].copy_from_slice(&phi);
    for r in 0..p {
        out[p + r] = y[(r, i)];
    }
    out[2 * p] = 1.0;
    Ok(out)
}

/// `[last coordinate > 1/2]` for real tokens, 0 for the dummy.
fn threshold_last(token: &[f64], i: usize, params: &ExactMapParams) -> Result<Vec<f64>> {
    let n = params.usize(0)?;
    let last = *token.last().ok_or_else(|| invalid("empty token"))?;
    Ok(vec![f64::from(u8::from(i < n && last > 0.5))])
}

pub(crate) fn exact_maps() -> Vec<(&'static str, ExactFn)> {
    vec![
        ("rip-embed", Arc::new(rip_embed) as ExactFn),
        ("threshold-last", Arc::new(threshold_last)),
    ]
}

/// Builds the model around the embedding sampled from `seed`.
pub fn build_sparse_two_cycle(
    n: usize,
    d: usize,
    alpha: f64,
    c: f64,
    seed: u64,
) -> Result<TransformerSpec> {
    let sys = sample_rip_vectors(n, d, alpha, seed)?;
    build_with_system(&sys, c)
}

fn build_with_system(sys: &RipSystem, c: f64) -> Result<TransformerSpec> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("temperature c = {c} must be positive")));
    }
    let (n, p) = (sys.n, sys.rip_dim);
    let dim = 2 * p + 2;
    let mut query = Matrix::zeros(dim, dim);
    let mut key = Matrix::zeros(dim, dim);
    let mut value = Matrix::zeros(dim, dim);
    for r in 0..p {
        query[(r, r)] = 1.0;
        query[(p + r, p + r)] = 1.0;
        key[(r, p + r)] = 1.0;
        key[(p + r, r)] = 1.0;
    }
    query[(2 * p, 2 * p)] = DUMMY_SCORE;
    key[(2 * p, 2 * p + 1)] = 1.0;
    value[(2 * p + 1, 2 * p)] = 1.0;
    let embed = ExactMapParams {
        ints: vec![n as i64, sys.d as i64],
        matrices: vec![sys.y.clone()],
        ..ExactMapParams::default()
    };
    Ok(TransformerSpec {
        input_dim: n + 1,
        layers: vec![
            Layer {
                heads: vec![AttentionHead::silent(n + 1)],
                residual: true,
                mlp: MlpStage::exact("rip-embed", dim, embed),
            },
            Layer {
                heads: vec![AttentionHead {
                    key,
                    query,
                    value,
                    temperature: c,
                }],
                residual: false,
                mlp: MlpStage::exact("threshold-last", 1, ExactMapParams::ints(vec![n as i64])),
            },
        ],
        output: "token i < n: 1 if node i lies on a 2-cycle; token n is the dummy".into(),
    })
}

/// Outcome of a run, including the resampling history.
#[derive(Clone, Debug)]
pub struct SparseRun {
    pub indicator: Vec<bool>,
    /// Attention mass each real query puts on the dummy token.
    pub dummy_mass: Vec<f64>,
    /// Embedding draws used (1 = no resampling).
    pub attempts: usize,
    /// Seed of the embedding that was accepted.
    pub seed: u64,
    pub width: usize,
    pub temperature: f64,
}

/// Seed of embedding draw `attempt`; draw 0 uses `seed` itself.
pub fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed::derive(seed, 0x52, attempt as u64)
    }
}

fn check_preconditions(g: &Graph, n: usize, d: usize) -> Result<()> {
    if g.n() != n {
        return Err(invalid(format!(
            "model built for n = {n}, graph has {}",
            g.n()
        )));
    }
    if !g.is_directed() || g.has_self_loop() {
        return Err(invalid("input must be a directed graph without self-loops"));
    }
    if let Some(v) = (0..n).find(|&v| g.out_degree(v) > d || g.in_degree(v) > d) {
        return Err(invalid(format!(
            "node {v} exceeds the degree bound d = {d}"
        )));
    }
    Ok(())
}

/// Whether every real query keeps its non-mutual real mass within
/// [`TAIL_BUDGET`] of the dummy's. Uses only the embedded tokens, never the
/// answer.
fn attention_is_confident(embedded: &[Vec<f64>], n: usize, p: usize, c: f64) -> bool {
    (0..n).all(|i| {
        let (phi_i, y_i) = (&embedded[i][..p], &embedded[i][p..2 * p]);
        let mut tail = 0.0;
        for e in embedded.iter().take(n) {
            let s = dot(phi_i, &e[p..2 * p]) + dot(&e[..p], y_i);
            if s < MUTUAL_SCORE {
                tail += (c * (s - DUMMY_SCORE)).exp();
            }
        }
        tail <= TAIL_BUDGET
    })
}

/// Runs the model on `g`, redrawing the embedding (up to
/// [`MAX_RESAMPLES`] times) when the Gram matrix of a neighbourhood is
/// singular or the attention is not confident.
pub fn run_sparse_two_cycle(
    g: &Graph,
    d: usize,
    alpha: f64,
    c: f64,
    seed: u64,
) -> Result<SparseRun> {
    let n = g.n();
    check_preconditions(g, n, d)?;
    let x = tokenize_adjacency(g, n + 1, false)?.tokens;
    for attempt in 0..=MAX_RESAMPLES {
        let s = attempt_seed(seed, attempt);
        let sys = sample_rip_vectors(n, d, alpha, s)?;
        let spec = build_with_system(&sys, c)?;
        let trace = match transformer_forward_traced(&spec, &x) {
            Ok(t) => t,
            Err(Error::SingularGram(_)) => continue,
            Err(e) => return Err(e),
        };
        let embedded = trace[0].output.to_tokens();
        if !attention_is_confident(&embedded, n, sys.rip_dim, c) {
            continue;
        }
        let weights = &trace[1].weights[0];
        let out = &trace[1].output;
        return Ok(SparseRun {
            indicator: (0..n).map(|i| out.token(i)[0] == 1.0).collect(),
            dummy_mass: (0..n).map(|i| weights[(i, n)]).collect(),
            attempts: attempt + 1,
            seed: s,
            width: spec.embedding_width(),
            temperature: c,
        });
    }
    Err(Error::MarginFailure {
        attempts: MAX_RESAMPLES + 1,
    })
}
