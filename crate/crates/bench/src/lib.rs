//! Fixed benchmark inputs, shared so that every run measures the same graphs.

use grtl_core::graph::{gen_bounded_degree_digraph, gen_random_digraph};
use grtl_core::{gen_cycles, gen_erdos_renyi, Graph};

const SEED: u64 = 0x6772_746c;

/// Directed G(n, 0.1) with every out-degree at least 1.
pub fn power_input(n: usize) -> Graph {
    gen_random_digraph(n, 0.1, 1, SEED).expect("valid generator parameters")
}

/// Two cycles on `n` nodes.
pub fn cycles_input(n: usize) -> Graph {
    gen_cycles(n, 2, SEED).expect("valid generator parameters")
}

/// Directed graph with in/out degree at most `d`.
pub fn sparse_input(n: usize, d: usize) -> Graph {
    gen_bounded_degree_digraph(n, d, SEED).expect("valid generator parameters")
}

/// Undirected G(n, p).
pub fn er_input(n: usize, p: f64) -> Graph {
    gen_erdos_renyi(n, p, SEED).expect("valid generator parameters")
}
