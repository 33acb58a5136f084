//! Three attention layers that count occurrences of a `k`-node pattern.
//!
//! Nodes are split into `s = ⌈n^{1/k}⌉` consecutive sets of size
//! `t = ⌈n^{1-1/k}⌉`, and combinations of `κ = min(k, s)` sets are listed
//! lexicographically as `B_0, B_1, …`.
//!
//! - Layer 1 packs each node's adjacency row into its own slot of an edge
//!   region, `B` bits per coordinate, and appends the set one-hot `w_i` and
//!   the set-token selector `z_i` (one-hot of `i` for `i < s`).
//! - Layer 2: set token `r` attends to the members of set `r` (query `z`,
//!   key `w`); the MLP undoes the `1/t_r` averaging and swaps `w` for the
//!   combination mask of `B_i`.
//! - Layer 3: token `i` attends to the set tokens of `B_i` (query mask, key
//!   `z`) with value `κ·I`, so it holds the rows of every node in `B_i`.
//!
//! The readout counts occurrences whose set-support, padded with the
//! smallest unused sets, is exactly `B_i`; every occurrence is counted by
//! exactly one token.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gadgets::indicator_stack;
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::nn::{
    transformer_forward, AttentionHead, ExactFn, ExactMapParams, Layer, MlpStage, ReluStack,
    TransformerSpec, LOGIT_CAP,
};
use crate::oracles::{automorphism_count, MAX_PATTERN_NODES};
use crate::tokenize::tokenize_adjacency;

use super::ceil_root;

/// Largest pattern the counter is built for.
pub const MAX_K: usize = 5;

/// Node partition, combination list and packed layout for given `n`, `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub n: usize,
    pub k: usize,
    /// `⌈n^{1/k}⌉`.
    pub set_count: usize,
    /// `⌈n^{1-1/k}⌉`.
    pub set_size: usize,
    /// Sets per combination, `min(k, set_count)`.
    pub kappa: usize,
    pub node_set: Vec<usize>,
    /// Lexicographic `κ`-subsets of the sets.
    pub combinations: Vec<Vec<usize>>,
    /// Adjacency bits packed per coordinate.
    pub bits: usize,
    /// Coordinates per node slot, `⌈n / bits⌉`.
    pub words: usize,
}

fn combinations(s: usize, kappa: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..kappa).collect();
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..kappa).rev().find(|&p| cur[p] < s - kappa + p) else {
            return out;
        };
        cur[pos] += 1;
        for q in pos + 1..kappa {
            cur[q] = cur[q - 1] + 1;
        }
    }
}

impl PartitionPlan {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if !(1..=MAX_K).contains(&k) {
            return Err(invalid(format!(
                "pattern size k = {k} must lie in 1..={MAX_K}"
            )));
        }
        if n < k {
            return Err(invalid(format!("n = {n} is smaller than k = {k}")));
        }
        let set_count = ceil_root(n as u128, k as u32) as usize;
        let set_size = ceil_root((n as u128).pow(k as u32 - 1), k as u32) as usize;
        let kappa = k.min(set_count);
        let combinations = combinations(set_count, kappa);
        if combinations.len() > n {
            return Err(invalid(format!(
                "{} combinations do not fit into {n} tokens",
                combinations.len()
            )));
        }
        let bits = (usize::BITS - n.leading_zeros()) as usize;
        Ok(PartitionPlan {
            n,
            k,
            set_count,
            set_size,
            kappa,
            node_set: (0..n).map(|v| v / set_size).collect(),
            combinations,
            bits,
            words: n.div_ceil(bits),
        })
    }

    pub fn combination_count(&self) -> usize {
        self.combinations.len()
    }

    /// Size of the packed edge region, `n · words`.
    pub fn edge_dim(&self) -> usize {
        self.n * self.words
    }

    /// Token width `edge_dim + 2·set_count`.
    pub fn width(&self) -> usize {
        self.edge_dim() + 2 * self.set_count
    }

    /// `⌈n^{2-1/k}⌉ + 2⌈n^{1/k}⌉ + 4`.
    pub fn width_bound(&self) -> usize {
        let main = ceil_root((self.n as u128).pow(2 * self.k as u32 - 1), self.k as u32);
        main as usize + 2 * self.set_count + 4
    }

    pub fn members(&self, set: usize) -> std::ops::Range<usize> {
        let lo = (set * self.set_size).min(self.n);
        lo..((set + 1) * self.set_size).min(self.n)
    }

    pub fn comb_mask(&self, i: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.set_count];
        for &r in &self.combinations[i] {
            m[r] = 1.0;
        }
        m
    }

    /// Index of the combination an occurrence touching `support` is
    /// assigned to: the support padded with the smallest unused sets.
    pub fn canonical(&self, support: &[usize]) -> Option<usize> {
        let mut sets: Vec<usize> = support.to_vec();
        sets.sort_unstable();
        sets.dedup();
        let mut r = 0;
        while sets.len() < self.kappa {
            if !sets.contains(&r) {
                sets.push(r);
            }
            r += 1;
        }
        sets.sort_unstable();
        self.combinations.binary_search(&sets).ok()
    }
}

fn plan_from(params: &ExactMapParams) -> Result<PartitionPlan> {
    PartitionPlan::new(params.usize(0)?, params.usize(1)?)
}

/// Layer 1: `[packed row in slot i; w_i; z_i]`. The set one-hot and the
/// selector come from the interval indicator networks in `params.nets`.
fn partition_map(token: &[f64], _: usize, params: &ExactMapParams) -> Result<Vec<f64>> {
    let plan = plan_from(params)?;
    let (n, s) = (plan.n, plan.set_count);
    if token.len() != n + 1 || params.nets.len() != 2 * s {
        return Err(Error::DimensionMismatch(
            "subgraph partition: bad token".into(),
        ));
    }
    let i = token[n].round();
    if !(0.0..n as f64).contains(&i) {
        return Err(invalid("subgraph partition: index out of range"));
    }
    let e = plan.edge_dim();
    let mut out = vec![0.0; plan.width()];
    let slot = i as usize * plan.words;
    for (q, chunk) in token[..n].chunks(plan.bits).enumerate() {
        out[slot + q] = chunk
            .iter()
            .enumerate()
            .map(|(b, &a)| a * (1u64 << b) as f64)
            .sum();
    }
    for r in 0..s {
        out[e + r] = params.nets[r].eval_scalar(i);
        out[e + s + r] = params.nets[s + r].eval_scalar(i);
    }
    Ok(out)
}

/// Layer 2 MLP: rescale set tokens by their size, clear the rest, and
/// replace `w_i` with the combination mask of `B_i`.
fn aggregate_map(token: &[f64], i: usize, params: &ExactMapParams) -> Result<Vec<f64>> {
    let plan = plan_from(params)?;
    let (e, s) = (plan.edge_dim(), plan.set_count);
    if token.len() != plan.width() {
        return Err(Error::DimensionMismatch(
            "subgraph aggregate: bad token".into(),
        ));
    }
    let mut out = vec![0.0; plan.width()];
    if i < s {
        let size = plan.members(i).len() as f64;
        if size > 0.0 {
            for (o, &x) in out[..e].iter_mut().zip(&token[..e]) {
                *o = (size * x).round();
            }
        }
        out[e + s + i] = 1.0;
    }
    if i < plan.combination_count() {
        out[e..e + s].copy_from_slice(&plan.comb_mask(i));
    }
    Ok(out)
}

/// Decodes the packed region into neighbour lists of the nodes in `B_i` and
/// counts the occurrences assigned to `B_i`.
fn count_readout(token: &[f64], i: usize, params: &ExactMapParams) -> Result<Vec<f64>> {
    let plan = plan_from(params)?;
    if token.len() != plan.width() {
        return Err(Error::DimensionMismatch(
            "subgraph readout: bad token".into(),
        ));
    }
    if i >= plan.combination_count() {
        return Ok(vec![0.0]);
    }
    let pattern = params
        .matrices
        .first()
        .ok_or_else(|| invalid("subgraph readout needs the pattern"))?;
    let n = plan.n;
    let nodes: Vec<usize> = plan.combinations[i]
        .iter()
        .flat_map(|&r| plan.members(r))
        .collect();
    let mut adj = vec![false; n * n];
    for &v in &nodes {
        for q in 0..plan.words {
            let word = token[v * plan.words + q].round();
            if !(0.0..(1u64 << plan.bits) as f64).contains(&word) {
                return Err(Error::Malformed(format!("packed word {word} out of range")));
            }
            let word = word as u64;
            for b in 0..plan.bits {
                let u = q * plan.bits + b;
                if u < n && word >> b & 1 == 1 {
                    adj[v * n + u] = true;
                }
            }
        }
    }
    let count = count_assigned(&plan, i, &nodes, &adj, pattern);
    let aut = automorphism_count(&pattern_graph(pattern)?);
    Ok(vec![(count / aut) as f64])
}

fn pattern_graph(m: &Matrix) -> Result<Graph> {
    let k = m.rows();
    let mut g = Graph::empty(k, false);
    for a in 0..k {
        for b in a + 1..k {
            if m[(a, b)] != 0.0 {
                g.add_edge(a, b)?;
            }
        }
    }
    Ok(g)
}

/// Injective edge-preserving maps from the pattern into `nodes` whose image
/// is assigned to combination `i`.
fn count_assigned(
    plan: &PartitionPlan,
    i: usize,
    nodes: &[usize],
    adj: &[bool],
    pattern: &Matrix,
) -> u64 {
    let k = pattern.rows();
    let n = plan.n;
    // place pattern nodes so that each one after the first of its component
    // has an already placed neighbour
    let mut order = Vec::with_capacity(k);
    let mut placed = vec![false; k];
    while order.len() < k {
        let next = (0..k)
            .filter(|&a| !placed[a])
            .max_by_key(|&a| {
                (
                    order.iter().any(|&b| pattern[(a, b)] != 0.0),
                    std::cmp::Reverse(a),
                )
            })
            .expect("unplaced node");
        placed[next] = true;
        order.push(next);
    }
    let mut image = vec![usize::MAX; k];
    let mut used = vec![false; n];
    let mut count = 0;
    fn go(
        depth: usize,
        ctx: (&PartitionPlan, usize, &[usize], &[bool], &Matrix, &[usize]),
        image: &mut [usize],
        used: &mut [bool],
        count: &mut u64,
    ) {
        let (plan, i, nodes, adj, pattern, order) = ctx;
        let n = plan.n;
        if depth == order.len() {
            let support: Vec<usize> = image.iter().map(|&v| plan.node_set[v]).collect();
            if plan.canonical(&support) == Some(i) {
                *count += 1;
            }
            return;
        }
        let a = order[depth];
        for &v in nodes {
            if used[v] {
                continue;
            }
            let fits = order[..depth]
                .iter()
                .all(|&b| pattern[(a, b)] == 0.0 || adj[v * n + image[b]]);
            if fits {
                image[a] = v;
                used[v] = true;
                go(depth + 1, ctx, image, used, count);
                used[v] = false;
            }
        }
    }
    go(
        0,
        (plan, i, nodes, adj, pattern, &order),
        &mut image,
        &mut used,
        &mut count,
    );
    count
}

pub(crate) fn exact_maps() -> Vec<(&'static str, ExactFn)> {
    vec![
        ("subgraph-partition", Arc::new(partition_map) as ExactFn),
        ("subgraph-aggregate", Arc::new(aggregate_map)),
        ("subgraph-count-readout", Arc::new(count_readout)),
    ]
}

fn selector(rows: usize, dim: usize, from: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, dim);
    for r in 0..rows {
        m[(r, from + r)] = 1.0;
    }
    m
}

/// Builds the counter for `k`-node patterns on `n`-node undirected graphs.
/// Input tokens are adjacency rows with the node index appended.
pub fn build_subgraph_counter(n: usize, k: usize, pattern: &Graph) -> Result<TransformerSpec> {
    if pattern.n() != k {
        return Err(invalid(format!(
            "pattern has {} nodes, expected k = {k}",
            pattern.n()
        )));
    }
    if pattern.is_directed() || pattern.has_self_loop() || k > MAX_PATTERN_NODES {
        return Err(invalid("pattern must be a simple undirected graph"));
    }
    let plan = PartitionPlan::new(n, k)?;
    let (e, s, dim) = (plan.edge_dim(), plan.set_count, plan.width());
    let t = plan.set_size as i64;

    let mut nets: Vec<ReluStack> = (0..s as i64)
        .map(|r| indicator_stack(r * t, (r + 1) * t - 1))
        .collect::<Result<_>>()?;
    for r in 0..s as i64 {
        nets.push(indicator_stack(r, r)?);
    }
    let ints = vec![n as i64, k as i64];
    let partition = ExactMapParams {
        ints: ints.clone(),
        nets,
        ..ExactMapParams::default()
    };
    let mut pattern_adj = Matrix::zeros(k, k);
    for &(a, b) in pattern.edges() {
        pattern_adj[(a, b)] = 1.0;
        pattern_adj[(b, a)] = 1.0;
    }
    let readout = ExactMapParams {
        ints: ints.clone(),
        matrices: vec![pattern_adj],
        ..ExactMapParams::default()
    };

    // leakage per coordinate is below n · 2^bits · e^{-c} before the ×size
    // or ×κ rescale; keep it under 1e-6
    let c = ((1u64 << plan.bits) as f64 * (n * n) as f64 / 1e-6).ln();
    if c > LOGIT_CAP {
        return Err(Error::LogitOverflow {
            value: c,
            cap: LOGIT_CAP,
        });
    }
    let mut copy_edges = Matrix::zeros(dim, dim);
    for r in 0..e {
        copy_edges[(r, r)] = 1.0;
    }
    Ok(TransformerSpec {
        input_dim: n + 1,
        layers: vec![
            Layer {
                heads: vec![AttentionHead::silent(n + 1)],
                residual: true,
                mlp: MlpStage::exact("subgraph-partition", dim, partition),
            },
            Layer {
                heads: vec![AttentionHead {
                    key: selector(s, dim, e),
                    query: selector(s, dim, e + s),
                    value: copy_edges.clone(),
                    temperature: c,
                }],
                residual: false,
                mlp: MlpStage::exact(
                    "subgraph-aggregate",
                    dim,
                    ExactMapParams::ints(ints.clone()),
                ),
            },
            Layer {
                heads: vec![AttentionHead {
                    key: selector(s, dim, e + s),
                    query: selector(s, dim, e),
                    value: copy_edges.scale(plan.kappa as f64),
                    temperature: c,
                }],
                residual: false,
                mlp: MlpStage::exact("subgraph-count-readout", 1, readout),
            },
        ],
        output: "token i: occurrences assigned to combination i; the count is the sum".into(),
    })
}

/// Runs the counter and sums the token outputs.
pub fn run_subgraph_counter(spec: &TransformerSpec, g: &Graph) -> Result<u64> {
    let n = spec.input_dim - 1;
    if g.n() != n {
        return Err(invalid(format!(
            "model built for n = {n}, graph has {}",
            g.n()
        )));
    }
    if g.is_directed() {
        return Err(invalid("subgraph counting expects an undirected graph"));
    }
    let x = tokenize_adjacency(g, n, true)?.tokens;
    let out = transformer_forward(spec, &x)?;
    Ok(out.tokens().map(|t| t[0]).sum::<f64>() as u64)
}
