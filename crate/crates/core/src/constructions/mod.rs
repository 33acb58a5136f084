//! Weight-level transformer builders and the harness that checks them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::nn::ExactFn;

pub mod one_vs_two;
pub mod power;
pub mod sparse_two_cycle;
pub mod subgraph;
mod verify;

pub use one_vs_two::build_one_vs_two;
pub use power::build_power_transformer;
pub use sparse_two_cycle::build_sparse_two_cycle;
pub use subgraph::{build_subgraph_counter, PartitionPlan};
pub use verify::{verify_construction, ConstructionId, ConstructionReport, VerifyParams};

/// How per-token steps without a closed-form network are realised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Registered exact maps.
    #[default]
    ExactMap,
    /// Explicit ReLU networks where a formula exists.
    ExplicitNet,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "exact" | "exact_map" | "exact-map" => Ok(Mode::ExactMap),
            "explicit" | "explicit_net" | "explicit-net" => Ok(Mode::ExplicitNet),
            other => Err(invalid(format!("unknown mode `{other}`"))),
        }
    }
}

pub(crate) fn exact_maps() -> Vec<(&'static str, ExactFn)> {
    let mut maps = Vec::new();
    maps.extend(one_vs_two::exact_maps());
    maps.extend(power::exact_maps());
    maps.extend(sparse_two_cycle::exact_maps());
    maps.extend(subgraph::exact_maps());
    maps
}

/// Smallest `r` with `r^k >= x`, i.e. `⌈x^{1/k}⌉` without floating point.
pub fn ceil_root(x: u128, k: u32) -> u128 {
    if x <= 1 || k == 1 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64).floor() as u128;
    r = r.saturating_sub(2);
    while r.checked_pow(k).is_some_and(|p| p < x) {
        r += 1;
    }
    r
}
