//! Brute-force ground truth. Nothing here shares code with the constructions.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` when two distinct components were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// Number of connected components (directed edges read as undirected), by
/// union-find.
pub fn component_count(g: &Graph) -> usize {
    let mut uf = UnionFind::new(g.n());
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    uf.components()
}

/// Connectivity by breadth-first search over the underlying undirected graph.
/// Graphs with at most one node count as connected.
pub fn oracle_connected(g: &Graph) -> bool {
    let n = g.n();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !seen[v] && (g.has_edge(u, v) || g.has_edge(v, u)) {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}

/// Square matrix of exact non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub n: usize,
    pub data: Vec<u64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { n, data }
    }

    pub fn adjacency(g: &Graph) -> Self {
        let n = g.n();
        let data = (0..n)
            .flat_map(|u| g.adj_row(u).iter().map(|&a| a as u64))
            .collect();
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        IntMatrix { n, data }
    }
}

/// Largest integer magnitude that `f64` represents exactly.
pub const EXACT_LIMIT: u64 = 1 << 53;

/// `A^L` by repeated multiplication. Refuses inputs where `n^L >= 2^53`, the
/// bound under which every walk count is exactly representable as `f64`.
pub fn oracle_matrix_power(g: &Graph, l: u32) -> Result<IntMatrix> {
    if l == 0 {
        return Err(invalid("power must be at least 1"));
    }
    let n = g.n() as u64;
    match n.checked_pow(l) {
        Some(v) if v < EXACT_LIMIT => {}
        _ => {
            return Err(Error::ExactOverflow(format!(
                "n^L = {n}^{l} does not fit in 53 bits"
            )))
        }
    }
    let a = IntMatrix::adjacency(g);
    let mut acc = a.clone();
    for _ in 1..l {
        acc = acc.mul(&a);
    }
    Ok(acc)
}

/// Bit `i` is set iff node `i` lies on a directed 2-cycle.
pub fn oracle_two_cycle_indicator(g: &Graph) -> Result<Vec<bool>> {
    if !g.is_directed() {
        return Err(invalid("two-cycle indicator needs a directed graph"));
    }
    if g.has_self_loop() {
        return Err(invalid("two-cycle indicator is undefined with self-loops"));
    }
    let n = g.n();
    Ok((0..n)
        .map(|i| (0..n).any(|j| j != i && g.has_edge(i, j) && g.has_edge(j, i)))
        .collect())
}

/// Largest pattern size the brute-force counter accepts.
pub const MAX_PATTERN_NODES: usize = 8;

/// Rearranges `p` into the next lexicographic permutation; `false` once the
/// last permutation has been passed (and `p` is reset to ascending order).
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        p.reverse();
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn preserves_edges(pattern: &Graph, g: &Graph, map: &[usize]) -> bool {
    pattern
        .edges()
        .iter()
        .all(|&(a, b)| g.has_edge(map[a], map[b]))
}

/// Size of the automorphism group, by checking all `k!` permutations.
pub fn automorphism_count(pattern: &Graph) -> u64 {
    let k = pattern.n();
    let mut p: Vec<usize> = (0..k).collect();
    let mut count = 0;
    loop {
        if preserves_edges(pattern, pattern, &p) {
            count += 1;
        }
        if !next_permutation(&mut p) {
            return count;
        }
    }
}

/// Number of (not necessarily induced) copies of `pattern` in `g`: the number
/// of injective edge-preserving maps divided by `|Aut(pattern)|`.
///
/// Enumerates every `k`-subset of host nodes and every bijection onto it.
pub fn oracle_subgraph_count(g: &Graph, pattern: &Graph) -> Result<u64> {
    let k = pattern.n();
    if k > MAX_PATTERN_NODES {
        return Err(invalid(format!(
            "pattern has {k} nodes; the brute-force bound is {MAX_PATTERN_NODES}"
        )));
    }
    if pattern.is_directed() != g.is_directed() {
        return Err(invalid("pattern and host must agree on directedness"));
    }
    let n = g.n();
    if k == 0 || k > n {
        return Ok(u64::from(k == 0));
    }
    let need = pattern.edge_count();
    let mut maps: u64 = 0;
    let mut subset: Vec<usize> = (0..k).collect();
    let mut image = vec![0usize; k];
    loop {
        let present = subset
            .iter()
            .flat_map(|&u| subset.iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| g.has_edge(u, v) && (g.is_directed() || u <= v))
            .count();
        if present >= need {
            let mut p: Vec<usize> = (0..k).collect();
            loop {
                for (slot, &pi) in image.iter_mut().zip(&p) {
                    *slot = subset[pi];
                }
                if preserves_edges(pattern, g, &image) {
                    maps += 1;
                }
                if !next_permutation(&mut p) {
                    break;
                }
            }
        }
        // advance to the next k-subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(maps / automorphism_count(pattern));
            }
            i -= 1;
            if subset[i] < n - k + i {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Complete graph on `k` nodes.
pub fn complete_graph(k: usize) -> Graph {
    let mut g = Graph::empty(k, false);
    for u in 0..k {
        for v in u + 1..k {
            g.add_edge(u, v).expect("fresh edge");
        }
    }
    g
}

/// Undirected cycle `0-1-...-(k-1)-0`.
pub fn cycle_graph(k: usize) -> Graph {
    let mut g = Graph::empty(k, false);
    for u in 0..k {
        g.add_edge(u, (u + 1) % k).expect("fresh edge");
    }
    g
}
