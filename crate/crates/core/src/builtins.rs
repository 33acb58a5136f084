//! Exact maps available in every process: generic helpers plus the per-token
//! steps the constructions rely on.

use std::sync::Arc;

use crate::error::Result;
use crate::nn::{ExactFn, ExactMapParams};
use crate::oracles::UnionFind;

fn wrap<F>(f: F) -> ExactFn
where
    F: Fn(&[f64], usize, &ExactMapParams) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Union-find connectivity of a summed edge-pair encoding: block `i` of three
/// coordinates holds `(u+1, v+1, i+1)` for node `i` with neighbours `u, v`.
/// Returns `[1]` for a connected graph, `[0]` otherwise.
pub fn connectivity_of_edge_list(token: &[f64]) -> Vec<f64> {
    let n = token.len() / 3;
    let mut uf = UnionFind::new(n);
    for block in token.chunks_exact(3) {
        let id = block[2].round();
        if id < 1.0 || id > n as f64 {
            continue;
        }
        let node = id as usize - 1;
        for &nb in &block[..2] {
            let nb = nb.round();
            if nb >= 1.0 && nb <= n as f64 {
                uf.union(node, nb as usize - 1);
            }
        }
    }
    vec![f64::from(u8::from(uf.components() == 1))]
}

pub(crate) fn builtin_maps() -> Vec<(&'static str, ExactFn)> {
    let mut maps: Vec<(&'static str, ExactFn)> = vec![
        ("identity", wrap(|t, _, _| Ok(t.to_vec()))),
        (
            "round-to-int",
            wrap(|t, _, _| Ok(t.iter().map(|v| v.round()).collect())),
        ),
        (
            "connectivity-of-edge-list",
            wrap(|t, _, _| Ok(connectivity_of_edge_list(t))),
        ),
        (
            "connectivity-readout",
            wrap(|t, _, _| Ok(connectivity_of_edge_list(t))),
        ),
    ];
    maps.extend(crate::constructions::exact_maps());
    maps
}
