//! Simple graphs with a dense adjacency mirror, plus the seeded generators.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed;

/// Directed or undirected simple graph.
///
/// `adj` and `edges` always agree. Undirected edges are stored once, as
/// `(min, max)`; the adjacency matrix is symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    allow_self_loops: bool,
    adj: Vec<u8>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn empty(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            allow_self_loops: false,
            adj: vec![0; n * n],
            edges: Vec::new(),
        }
    }

    pub fn with_self_loops(mut self) -> Self {
        self.allow_self_loops = true;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v] == 1
    }

    pub fn adj_row(&self, u: usize) -> &[u8] {
        &self.adj[u * self.n..(u + 1) * self.n]
    }

    /// Out-neighbours (all neighbours when undirected), ascending.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj_row(u)
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == 1)
            .map(|(v, _)| v)
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.adj_row(u).iter().map(|&a| a as usize).sum()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.has_edge(u, v)).count()
    }

    pub fn has_self_loop(&self) -> bool {
        (0..self.n).any(|v| self.has_edge(v, v))
    }

    /// Adds an edge, rejecting duplicates, out-of-range endpoints and
    /// disallowed self-loops.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(invalid(format!(
                "edge ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        if u == v && !self.allow_self_loops {
            return Err(invalid(format!("self-loop at {u} not allowed")));
        }
        let (u, v) = if self.directed {
            (u, v)
        } else {
            (u.min(v), u.max(v))
        };
        if self.has_edge(u, v) {
            return Err(invalid(format!("duplicate edge ({u}, {v})")));
        }
        self.adj[u * self.n + v] = 1;
        self.adj[v * self.n + u] |= u8::from(!self.directed);
        self.edges.push((u, v));
        Ok(())
    }

    /// Inserts the edge unless it is already present. Returns whether it was new.
    pub(crate) fn insert_edge(&mut self, u: usize, v: usize) -> bool {
        let present = if self.directed {
            self.has_edge(u, v)
        } else {
            self.has_edge(u.min(v), u.max(v))
        };
        !present && self.add_edge(u, v).is_ok()
    }

    /// `perm[v]` is the new label of node `v`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(invalid("permutation length differs from n"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("not a permutation"));
            }
        }
        let mut g = Graph::empty(self.n, self.directed);
        g.allow_self_loops = self.allow_self_loops;
        for &(u, v) in &self.edges {
            g.add_edge(perm[u], perm[v])?;
        }
        Ok(g)
    }

    /// Disjoint union; nodes of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Result<Graph> {
        if self.directed != other.directed {
            return Err(invalid("cannot union directed with undirected graphs"));
        }
        let mut g = Graph::empty(self.n + other.n, self.directed);
        g.allow_self_loops = self.allow_self_loops || other.allow_self_loops;
        for &(u, v) in &self.edges {
            g.add_edge(u, v)?;
        }
        for &(u, v) in &other.edges {
            g.add_edge(u + self.n, v + self.n)?;
        }
        Ok(g)
    }

    /// Cross-checks `adj` against `edges`.
    pub fn is_consistent(&self) -> bool {
        let mut expect = vec![0u8; self.n * self.n];
        for &(u, v) in &self.edges {
            if u >= self.n || v >= self.n || (u == v && !self.allow_self_loops) {
                return false;
            }
            if !self.directed && u > v {
                return false;
            }
            if expect[u * self.n + v] == 1 {
                return false;
            }
            expect[u * self.n + v] = 1;
            if !self.directed {
                expect[v * self.n + u] = 1;
            }
        }
        expect == self.adj
    }
}

/// Builds a graph from an edge list. Self-loops are accepted only through
/// [`Graph::with_self_loops`].
pub fn graph_from_edges(n: usize, edges: &[(usize, usize)], directed: bool) -> Result<Graph> {
    let mut g = Graph::empty(n, directed);
    for &(u, v) in edges {
        g.add_edge(u, v)?;
    }
    Ok(g)
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    directed: bool,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_self_loops: bool,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            directed: self.directed,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            allow_self_loops: self.allow_self_loops,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GraphRepr::deserialize(d)?;
        let mut g = Graph::empty(r.n, r.directed);
        g.allow_self_loops = r.allow_self_loops;
        for [u, v] in r.edges {
            g.add_edge(u, v).map_err(serde::de::Error::custom)?;
        }
        Ok(g)
    }
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut seed::rng(seed));
    p
}

/// One `n`-cycle (`parts = 1`) or two `n/2`-cycles (`parts = 2`) with node
/// labels randomly permuted.
pub fn gen_cycles(n: usize, parts: usize, seed: u64) -> Result<Graph> {
    if n % 2 == 1 {
        return Err(invalid(format!("cycle graph size must be even, got {n}")));
    }
    match parts {
        1 if n < 4 => return Err(invalid("a single cycle needs n >= 4")),
        2 if n < 6 => return Err(invalid("two cycles need n >= 6")),
        1 | 2 => {}
        _ => return Err(invalid(format!("parts must be 1 or 2, got {parts}"))),
    }
    let perm = random_permutation(n, seed);
    let len = n / parts;
    let mut g = Graph::empty(n, false);
    for p in 0..parts {
        let base = p * len;
        for k in 0..len {
            g.add_edge(perm[base + k], perm[base + (k + 1) % len])?;
        }
    }
    Ok(g)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is not a probability")))
    }
}

/// G(n, p): each unordered pair independently with probability `p`.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability("p", p)?;
    let mut rng = seed::rng(seed);
    let mut g = Graph::empty(n, false);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Connectivity threshold radius `sqrt(ln n / (pi n))` for random geometric
/// graphs in the unit square.
pub fn rgg_critical_radius(n: usize) -> f64 {
    let n = n.max(2) as f64;
    (n.ln() / (std::f64::consts::PI * n)).sqrt()
}

/// Random geometric graph: `n` uniform points in the unit square, joined when
/// within Euclidean distance `radius`.
pub fn gen_random_geometric(n: usize, radius: f64, seed: u64) -> Result<Graph> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius {radius} must be finite and >= 0")));
    }
    let mut rng = seed::rng(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut g = Graph::empty(n, false);
    let r2 = radius * radius;
    for u in 0..n {
        for v in u + 1..n {
            let (dx, dy) = (pts[u].0 - pts[v].0, pts[u].1 - pts[v].1);
            if dx * dx + dy * dy <= r2 {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Preferential attachment starting from an `(m+1)`-clique; each new node
/// attaches to `m` distinct existing nodes chosen proportionally to degree.
pub fn gen_barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || n < m + 1 {
        return Err(invalid(format!(
            "need m >= 1 and n >= m + 1 (n = {n}, m = {m})"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut g = Graph::empty(n, false);
    // every edge endpoint is listed once, so uniform picks are degree-weighted
    let mut targets: Vec<usize> = Vec::new();
    for u in 0..=m {
        for v in u + 1..=m {
            g.add_edge(u, v)?;
            targets.extend([u, v]);
        }
    }
    for new in m + 1..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        while chosen.len() < m {
            let t = targets[rng.random_range(0..targets.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for t in chosen {
            g.add_edge(t, new)?;
            targets.extend([t, new]);
        }
    }
    Ok(g)
}

/// Stochastic block model with `blocks` near-equal blocks (node `v` in block
/// `v * blocks / n`).
pub fn gen_stochastic_block(
    n: usize,
    blocks: usize,
    p_intra: f64,
    p_inter: f64,
    seed: u64,
) -> Result<Graph> {
    check_probability("p_intra", p_intra)?;
    check_probability("p_inter", p_inter)?;
    if blocks == 0 || blocks > n.max(1) {
        return Err(invalid(format!("blocks = {blocks} must be in 1..=n")));
    }
    let block = |v: usize| v * blocks / n;
    let mut rng = seed::rng(seed);
    let mut g = Graph::empty(n, false);
    for u in 0..n {
        for v in u + 1..n {
            let p = if block(u) == block(v) {
                p_intra
            } else {
                p_inter
            };
            if rng.random_bool(p) {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Directed bipartite gadget on `2n` nodes. Bit `q = i*d + t` of `a` adds the
/// edge `i -> n + (i+t) mod n`; the same bit of `b` adds the reverse edge.
/// A directed 2-cycle exists iff `a` and `b` share a set bit.
pub fn gen_disjointness_gadget(a: &[bool], b: &[bool], n: usize, d: usize) -> Result<Graph> {
    if d > n {
        return Err(invalid(format!("template degree d = {d} exceeds n = {n}")));
    }
    if a.len() != n * d || b.len() != n * d {
        return Err(invalid(format!(
            "bit vectors must have length n*d = {} (got {} and {})",
            n * d,
            a.len(),
            b.len()
        )));
    }
    let mut g = Graph::empty(2 * n, true);
    for i in 0..n {
        for t in 0..d {
            let q = i * d + t;
            let j = n + (i + t) % n;
            if a[q] {
                g.add_edge(i, j)?;
            }
            if b[q] {
                g.add_edge(j, i)?;
            }
        }
    }
    Ok(g)
}

/// Random digraph without self-loops: each ordered pair with probability `p`,
/// then nodes below `min_out_degree` receive extra random out-edges.
pub fn gen_random_digraph(n: usize, p: f64, min_out_degree: usize, seed: u64) -> Result<Graph> {
    check_probability("p", p)?;
    if min_out_degree >= n {
        return Err(invalid("min_out_degree must be below n"));
    }
    let mut rng = seed::rng(seed);
    let mut g = Graph::empty(n, true);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(p) {
                g.add_edge(u, v)?;
            }
        }
    }
    for u in 0..n {
        while g.out_degree(u) < min_out_degree {
            let v = rng.random_range(0..n);
            if v != u {
                g.insert_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Random digraph with every in- and out-degree at most `d`: node out-degrees
/// are uniform in `0..=d`, targets drawn among nodes with spare in-capacity.
pub fn gen_bounded_degree_digraph(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(invalid("need at least two nodes"));
    }
    let mut rng = seed::rng(seed);
    let mut g = Graph::empty(n, true);
    let mut in_deg = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &u in &order {
        let want = rng.random_range(0..=d);
        let mut candidates: Vec<usize> = (0..n).filter(|&v| v != u && in_deg[v] < d).collect();
        candidates.shuffle(&mut rng);
        for &v in candidates.iter().take(want) {
            g.add_edge(u, v)?;
            in_deg[v] += 1;
        }
    }
    Ok(g)
}
