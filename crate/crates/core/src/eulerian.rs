//! Eulerian cycle verification on labelled multigraphs, and the reduction
//! from "one cycle or two?" instances.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::oracles::UnionFind;

/// Directed multigraph with labelled edges (self-loops allowed) and path
/// fragments, each an ordered pair of successive edge labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerianInstance {
    pub n: usize,
    /// `[from, to, label]`.
    pub edges: Vec<(usize, usize, i64)>,
    /// `[first, second]` edge labels.
    pub fragments: Vec<(i64, i64)>,
}

impl EulerianInstance {
    fn edge_index(&self) -> Result<HashMap<i64, (usize, usize)>> {
        let mut idx = HashMap::with_capacity(self.edges.len());
        for &(u, v, l) in &self.edges {
            if u >= self.n || v >= self.n {
                return Err(Error::Malformed(format!(
                    "edge {l} has an endpoint outside 0..{}",
                    self.n
                )));
            }
            if idx.insert(l, (u, v)).is_some() {
                return Err(Error::Malformed(format!("label {l} is used twice")));
            }
        }
        Ok(idx)
    }

    /// Checks that fragment edges exist and are successive.
    pub fn validate(&self) -> Result<()> {
        let idx = self.edge_index()?;
        for &(a, b) in &self.fragments {
            let ea = idx
                .get(&a)
                .ok_or_else(|| Error::Malformed(format!("dangling label {a}")))?;
            let eb = idx
                .get(&b)
                .ok_or_else(|| Error::Malformed(format!("dangling label {b}")))?;
            if ea.1 != eb.0 {
                return Err(Error::Malformed(format!(
                    "fragment ({a}, {b}) is not a pair of successive edges"
                )));
            }
        }
        Ok(())
    }

    /// Every edge label occupies exactly two fragment slots.
    pub fn condition_one(&self) -> Result<bool> {
        let idx = self.edge_index()?;
        let mut uses: HashMap<i64, usize> = idx.keys().map(|&l| (l, 0)).collect();
        for &(a, b) in &self.fragments {
            for l in [a, b] {
                *uses
                    .get_mut(&l)
                    .ok_or_else(|| Error::Malformed(format!("dangling label {l}")))? += 1;
            }
        }
        Ok(uses.values().all(|&c| c == 2))
    }

    /// `succ[f]` is the fragment whose first edge is `f`'s second edge, if any.
    /// An edge that heads two fragments makes the chaining ambiguous.
    fn successors(&self) -> Result<Vec<Option<usize>>> {
        let mut head: HashMap<i64, usize> = HashMap::with_capacity(self.fragments.len());
        for (f, &(a, _)) in self.fragments.iter().enumerate() {
            if head.insert(a, f).is_some() {
                return Err(Error::Malformed(format!("edge {a} heads two fragments")));
            }
        }
        Ok(self
            .fragments
            .iter()
            .map(|&(_, b)| head.get(&b).copied())
            .collect())
    }
}

/// True iff both conditions hold: each edge appears in exactly two fragment
/// slots, and the successor relation chains all fragments into one cycle.
pub fn verify_eulerian(inst: &EulerianInstance) -> Result<bool> {
    inst.validate()?;
    let succ = inst.successors()?;
    if !inst.condition_one()? || inst.fragments.is_empty() {
        return Ok(false);
    }
    if succ.iter().any(Option::is_none) {
        return Ok(false);
    }
    let m = inst.fragments.len();
    let mut cur = 0;
    for step in 1..=m {
        cur = succ[cur].expect("checked above");
        if cur == 0 {
            return Ok(step == m);
        }
    }
    Ok(false)
}

/// Lengths of the disjoint cycles of the fragment-successor permutation,
/// longest first.
pub fn fragment_cycle_census(inst: &EulerianInstance) -> Result<Vec<usize>> {
    inst.validate()?;
    if !inst.condition_one()? {
        return Err(Error::Malformed(
            "an edge does not occupy exactly two fragment slots".into(),
        ));
    }
    let succ = inst.successors()?;
    let m = inst.fragments.len();
    let mut indeg = vec![0usize; m];
    for s in &succ {
        match s {
            Some(t) => indeg[*t] += 1,
            None => return Err(Error::Malformed("a fragment has no successor".into())),
        }
    }
    if indeg.iter().any(|&d| d != 1) {
        return Err(Error::Malformed(
            "successor relation is not a perfect matching".into(),
        ));
    }
    let mut seen = vec![false; m];
    let mut lengths = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            len += 1;
            cur = succ[cur].expect("checked above");
        }
        lengths.push(len);
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    Ok(lengths)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turnaround {
    /// Smallest edge (lexicographically) in the component of node 0.
    Auto,
    /// Index into the lexicographically sorted edge list.
    Edge(usize),
}

/// Maps an `N`-node union of one or two cycles, `N = n²/2`, to a multigraph
/// on `n` nodes whose fragments form a single cycle iff the input is a single
/// cycle.
///
/// Edge `k` of the sorted edge list `{v1 < v2}` yields darts `+(k+1)` from
/// `φ(v1)` to `φ(v2)` and `-(k+1)` back, with `φ(v) = v mod n/2`. The
/// turnaround edge instead yields self-loops: `+` at `φ(v2)`, `-` at `φ(v1)`.
/// Each dart is paired with the dart that continues the walk; arriving at an
/// endpoint of the turnaround edge continues onto that endpoint's self-loop,
/// and leaving a self-loop heads back along the endpoint's other edge.
pub fn reduce_cycles_to_eulerian(g: &Graph, turnaround: Turnaround) -> Result<EulerianInstance> {
    let big_n = g.n();
    let n = (2.0 * big_n as f64).sqrt().round() as usize;
    if g.is_directed() || n < 4 || n % 2 == 1 || n * n != 2 * big_n {
        return Err(invalid(format!(
            "cycle graph must be undirected with N = n^2/2 nodes for even n >= 4 (N = {big_n})"
        )));
    }
    if let Some(v) = (0..big_n).find(|&v| g.out_degree(v) != 2) {
        return Err(invalid(format!(
            "node {v} has degree {} instead of 2",
            g.out_degree(v)
        )));
    }
    let mut uf = UnionFind::new(big_n);
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    if uf.components() > 2 {
        return Err(invalid(format!(
            "expected one or two cycles, found {} components",
            uf.components()
        )));
    }
    let edges = g.sorted_edges();
    let star = match turnaround {
        Turnaround::Edge(k) if k < edges.len() => k,
        Turnaround::Edge(k) => return Err(invalid(format!("turnaround index {k} out of range"))),
        Turnaround::Auto => {
            let root = uf.find(0);
            (0..edges.len())
                .find(|&k| uf.find(edges[k].0) == root)
                .expect("node 0 has incident edges")
        }
    };
    let half = n / 2;
    let phi = |v: usize| v % half;
    let label = |k: usize| (k + 1) as i64;

    // edges incident to each node, as indices into `edges`
    let mut incident: Vec<Vec<usize>> = vec![Vec::with_capacity(2); big_n];
    for (k, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(k);
        incident[v].push(k);
    }
    let other_edge = |v: usize, k: usize| -> usize {
        let inc = &incident[v];
        if inc[0] == k {
            inc[1]
        } else {
            inc[0]
        }
    };
    // the dart leaving `v` along edge `k`
    let leaving = |v: usize, k: usize| -> i64 {
        if edges[k].0 == v {
            label(k)
        } else {
            -label(k)
        }
    };
    let (t1, t2) = edges[star];

    let mut inst_edges = Vec::with_capacity(2 * edges.len());
    let mut fragments = Vec::with_capacity(2 * edges.len());
    for (k, &(v1, v2)) in edges.iter().enumerate() {
        if k == star {
            inst_edges.push((phi(v2), phi(v2), label(k)));
            inst_edges.push((phi(v1), phi(v1), -label(k)));
            // each self-loop sends the walk back along its node's other edge
            fragments.push((label(k), leaving(t2, other_edge(t2, k))));
            fragments.push((-label(k), leaving(t1, other_edge(t1, k))));
            continue;
        }
        inst_edges.push((phi(v1), phi(v2), label(k)));
        inst_edges.push((phi(v2), phi(v1), -label(k)));
        for (dart, end) in [(label(k), v2), (-label(k), v1)] {
            let next_edge = other_edge(end, k);
            let next = if next_edge == star {
                if end == t1 {
                    -label(star)
                } else {
                    label(star)
                }
            } else {
                leaving(end, next_edge)
            };
            fragments.push((dart, next));
        }
    }
    Ok(EulerianInstance {
        n,
        edges: inst_edges,
        fragments,
    })
}
