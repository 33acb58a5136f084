//! Constructed transformers for graph problems, checked against brute-force
//! oracles.
//!
//! The pieces:
//! - [`graph`] and [`corpus`]: graphs, seeded families, hard-instance gadgets;
//! - [`oracles`]: independent ground truth (BFS, union-find, exact powers,
//!   subgraph enumeration);
//! - [`nn`] and [`gadgets`]: the forward pass, the exact-map registry and
//!   explicit ReLU networks;
//! - [`rip`]: random sign embeddings with least-norm dual witnesses;
//! - [`tokenize`]: adjacency, edge-list and Laplacian encodings plus export;
//! - [`constructions`]: weight-level builders and the verification harness;
//! - [`eulerian`]: fragment-chaining verification and the cycle reduction.

pub mod builtins;
pub mod constructions;
pub mod corpus;
pub mod error;
pub mod eulerian;
pub mod gadgets;
pub mod graph;
pub mod linalg;
pub mod nn;
pub mod oracles;
pub mod rip;
pub mod seed;
pub mod tokenize;

pub use constructions::{
    build_one_vs_two, build_power_transformer, build_sparse_two_cycle, build_subgraph_counter,
    verify_construction, ConstructionId, ConstructionReport, Mode, PartitionPlan, VerifyParams,
};
pub use corpus::{gen_corpus, CorpusSpec, Family, LabeledGraph, TargetLabel};
pub use error::{Error, Result};
pub use eulerian::{
    fragment_cycle_census, reduce_cycles_to_eulerian, verify_eulerian, EulerianInstance, Turnaround,
};
pub use graph::{gen_cycles, gen_disjointness_gadget, gen_erdos_renyi, graph_from_edges, Graph};
pub use linalg::Matrix;
pub use nn::{
    attention_forward, mlp_forward, transformer_forward, AttentionHead, ExactMapParams, Layer,
    MlpStage, ReluStack, TokenMatrix, TransformerSpec,
};
pub use oracles::{
    oracle_connected, oracle_matrix_power, oracle_subgraph_count, oracle_two_cycle_indicator,
    IntMatrix,
};
pub use rip::{compute_phi, sample_rip_vectors, RipSystem};
pub use tokenize::{Format, Scheme, TokenizedGraph};
