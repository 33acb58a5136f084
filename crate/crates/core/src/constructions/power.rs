//! Rows of `A^L` from adjacency-row tokens.
//!
//! Token `i` carries three `n`-blocks `[a_i; e_i; w_i]`, with the workspace
//! `w_i` starting at `a_i`. Each product layer has two heads:
//!
//! - an aggregating head whose query reads the `A` block and whose key reads
//!   the identity block, so query `i` scores key `j` by `c·A_ij` and spreads
//!   its weight uniformly over the out-neighbours of `i`; `V = diag(0, I, I)`
//!   brings back `[0; a_i/deg_i; (A W)_i/deg_i]`;
//! - a self head (identity block against itself) whose value negates the
//!   workspace, cancelling the residual copy of `w_i`.
//!
//! The MLP then reads `1/deg_i` off the identity block, rescales and rounds the
//! workspace, and restores `e_i`.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::gadgets::bump_memorizer_stack;
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::nn::{
    transformer_forward_traced, AttentionHead, ExactFn, ExactMapParams, Layer, MlpStage,
    TokenMatrix, TransformerSpec, LOGIT_CAP,
};
use crate::oracles::EXACT_LIMIT;
use crate::tokenize::tokenize_adjacency;

use super::Mode;

/// Temperature `ln(8·n·n^L / eps)`: bounds the total softmax leakage of both
/// heads, after rescaling by the degree, below `eps` per entry.
pub fn power_temperature(n: usize, l: u32, eps: f64) -> f64 {
    let n = n as f64;
    (8.0 * n * n.powi(l as i32) / eps).ln()
}

fn power_embed(token: &[f64], params: &ExactMapParams) -> Result<Vec<f64>> {
    let n = params.usize(0)?;
    if token.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "power embed expects {} coordinates, got {}",
            n + 1,
            token.len()
        )));
    }
    let i = token[n].round() as usize;
    if i >= n {
        return Err(invalid("power embed: index out of range"));
    }
    let mut out = vec![0.0; 3 * n];
    out[..n].copy_from_slice(&token[..n]);
    out[n + i] = 1.0;
    out[2 * n..].copy_from_slice(&token[..n]);
    Ok(out)
}

/// Recovers the degree from the identity block, rescales and rounds the
/// workspace, and resets the identity block to `e_i`.
fn power_rescale(token: &[f64], i: usize, params: &ExactMapParams) -> Result<Vec<f64>> {
    let n = params.usize(0)?;
    if token.len() != 3 * n || i >= n {
        return Err(Error::DimensionMismatch("power rescale: bad token".into()));
    }
    let probe = (0..n)
        .map(|j| token[n + j] - f64::from(u8::from(j == i)))
        .fold(f64::NEG_INFINITY, f64::max);
    // a zero-degree row attends uniformly and reads as degree n; the builder
    // rejects such graphs before running
    if probe.is_nan() || probe <= 0.5 / n as f64 {
        return Err(Error::ZeroDegree(i));
    }
    let deg = match params.nets.first() {
        Some(net) => net.eval_scalar(probe),
        None => (1.0 / probe).round(),
    };
    let mut out = vec![0.0; 3 * n];
    out[..n].copy_from_slice(&token[..n]);
    out[n + i] = 1.0;
    for (o, &w) in out[2 * n..].iter_mut().zip(&token[2 * n..]) {
        *o = (deg * w).round();
    }
    Ok(out)
}

pub(crate) fn exact_maps() -> Vec<(&'static str, ExactFn)> {
    vec![
        (
            "power-embed",
            Arc::new(|t: &[f64], _: usize, p: &ExactMapParams| power_embed(t, p)) as ExactFn,
        ),
        ("power-rescale", Arc::new(power_rescale)),
    ]
}

fn block_selector(n: usize, block: usize) -> Matrix {
    let mut m = Matrix::zeros(n, 3 * n);
    for r in 0..n {
        m[(r, block * n + r)] = 1.0;
    }
    m
}

/// Builds the `L`-th power model for `n`-node graphs. Input tokens are
/// adjacency rows with the node index appended.
pub fn build_power_transformer(n: usize, l: u32, eps: f64, mode: Mode) -> Result<TransformerSpec> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    build_power_transformer_at(n, l, power_temperature(n, l, eps), mode)
}

/// Same model with the attention temperature `c` given directly.
pub fn build_power_transformer_at(n: usize, l: u32, c: f64, mode: Mode) -> Result<TransformerSpec> {
    if n == 0 || l == 0 {
        return Err(invalid("need n >= 1 and L >= 1"));
    }
    match (n as u64).checked_pow(l) {
        Some(v) if v < EXACT_LIMIT => {}
        _ => return Err(Error::ExactOverflow(format!("n^L = {n}^{l} exceeds 2^53"))),
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("temperature c = {c} must be positive")));
    }
    if c > LOGIT_CAP {
        return Err(Error::LogitOverflow {
            value: c,
            cap: LOGIT_CAP,
        });
    }
    let d = 3 * n;
    let mut rescale = ExactMapParams::ints(vec![n as i64]);
    if mode == Mode::ExplicitNet {
        let table: Vec<(f64, f64)> = (1..=n).map(|k| (1.0 / k as f64, k as f64)).collect();
        rescale.nets.push(bump_memorizer_stack(&table)?);
    }

    let mut layers = vec![Layer {
        heads: vec![AttentionHead::silent(n + 1)],
        residual: true,
        mlp: MlpStage::exact("power-embed", d, ExactMapParams::ints(vec![n as i64])),
    }];
    let mut gather = Matrix::zeros(d, d);
    let mut cancel = Matrix::zeros(d, d);
    for r in n..d {
        gather[(r, r)] = 1.0;
    }
    for r in 2 * n..d {
        cancel[(r, r)] = -1.0;
    }
    for _ in 1..l {
        layers.push(Layer {
            heads: vec![
                AttentionHead {
                    key: block_selector(n, 1),
                    query: block_selector(n, 0),
                    value: gather.clone(),
                    temperature: c,
                },
                AttentionHead {
                    key: block_selector(n, 1),
                    query: block_selector(n, 1),
                    value: cancel.clone(),
                    temperature: c,
                },
            ],
            residual: true,
            mlp: MlpStage::exact("power-rescale", d, rescale.clone()),
        });
    }
    Ok(TransformerSpec {
        input_dim: n + 1,
        layers,
        output: format!("token i: [row i of A; e_i; row i of A^{l}]"),
    })
}

/// Result of running the power model on one graph.
#[derive(Clone, Debug)]
pub struct PowerRun {
    /// Row `i` of `A^L`, read from the workspace of token `i`.
    pub rows: Vec<Vec<f64>>,
    /// Per product layer `ℓ = 2..=L`: the rescaled, not yet rounded
    /// workspaces, row `i` scaled by the degree the MLP recovered.
    pub pre_rounding: Vec<Vec<Vec<f64>>>,
    pub temperature: f64,
}

/// Runs the model; graphs with an out-degree-0 node are rejected.
pub fn run_power(spec: &TransformerSpec, g: &Graph) -> Result<PowerRun> {
    let n = spec.input_dim - 1;
    if g.n() != n {
        return Err(invalid(format!(
            "model built for n = {n}, graph has {}",
            g.n()
        )));
    }
    if let Some(v) = (0..n).find(|&v| g.out_degree(v) == 0) {
        return Err(Error::ZeroDegree(v));
    }
    let x = tokenize_adjacency(g, n, true)?.tokens;
    let trace = transformer_forward_traced(spec, &x)?;
    let block = |t: &TokenMatrix, i: usize, b: usize| t.token(i)[b * n..(b + 1) * n].to_vec();
    let pre_rounding = trace[1..]
        .iter()
        .map(|lt| {
            (0..n)
                .map(|i| {
                    let deg = g.out_degree(i) as f64;
                    block(&lt.post_attention, i, 2)
                        .iter()
                        .map(|w| w * deg)
                        .collect()
                })
                .collect()
        })
        .collect();
    let last = &trace.last().expect("at least one layer").output;
    Ok(PowerRun {
        rows: (0..n).map(|i| block(last, i, 2)).collect(),
        pre_rounding,
        temperature: spec
            .layers
            .get(1)
            .and_then(|l| l.heads.first())
            .map_or(0.0, |h| h.temperature),
    })
}
