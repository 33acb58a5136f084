//! Explicit ReLU networks: interval indicators, bump memorizers and the
//! identity trick.

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::nn::{Affine, MlpStage, ReluStack};

fn scalar_stack(hidden_w: Vec<f64>, hidden_b: Vec<f64>, out_w: Vec<f64>) -> ReluStack {
    let h = hidden_w.len();
    ReluStack::new(vec![
        Affine::new(Matrix::from_vec(h, 1, hidden_w), hidden_b),
        Affine::new(Matrix::from_vec(1, h, out_w), vec![0.0]),
    ])
    .expect("shapes chain by construction")
}

/// `f(z) = σ(z-(r-1)) - σ(z-r) + σ(z-(s+1)) - σ(z-s)`: 1 on integers in
/// `[r, s]`, 0 on all other integers.
pub fn indicator_stack(r: i64, s: i64) -> Result<ReluStack> {
    if r > s {
        return Err(invalid(format!(
            "indicator needs r <= s (r = {r}, s = {s})"
        )));
    }
    let (r, s) = (r as f64, s as f64);
    Ok(scalar_stack(
        vec![1.0; 4],
        vec![-(r - 1.0), -r, -(s + 1.0), -s],
        vec![1.0, -1.0, 1.0, -1.0],
    ))
}

pub fn build_indicator_net(r: i64, s: i64) -> Result<MlpStage> {
    indicator_stack(r, s).map(MlpStage::ReluStack)
}

/// Two-layer network hitting `b_i` exactly at each anchor `a_i`.
///
/// Each anchor gets a trapezoid bump
/// `(1/δ)[σ(x-a+2δ) - σ(x-a+δ) - σ(x-a-δ) + σ(x-a-2δ)]` with
/// `δ` the largest power of two not above `min_gap / 4`: value 1 on
/// `[a-δ, a+δ]`, 0 outside `(a-2δ, a+2δ)`, so neighbouring bumps never
/// overlap. A power-of-two `δ` keeps `b/δ` and the shifted biases exact, so
/// dyadic anchors are hit without rounding. Width is `4k`.
pub fn bump_memorizer_stack(pairs: &[(f64, f64)]) -> Result<ReluStack> {
    if pairs.is_empty() {
        return Err(invalid("memorizer needs at least one anchor"));
    }
    if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(invalid("anchors and targets must be finite"));
    }
    let mut anchors: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    anchors.sort_by(f64::total_cmp);
    let min_gap = anchors
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap <= 0.0 {
        return Err(invalid("memorizer anchors must be pairwise distinct"));
    }
    let delta = if min_gap.is_finite() {
        2f64.powi((min_gap / 4.0).log2().floor() as i32)
    } else {
        1.0
    };
    let mut w = Vec::with_capacity(4 * pairs.len());
    let mut bias = Vec::with_capacity(4 * pairs.len());
    let mut out = Vec::with_capacity(4 * pairs.len());
    for &(a, b) in pairs {
        for (shift, sign) in [(2.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-2.0, 1.0)] {
            w.push(1.0);
            bias.push(-a + shift * delta);
            out.push(sign * b / delta);
        }
    }
    Ok(scalar_stack(w, bias, out))
}

pub fn build_bump_memorizer(pairs: &[(f64, f64)]) -> Result<MlpStage> {
    bump_memorizer_stack(pairs).map(MlpStage::ReluStack)
}

/// `z ↦ σ(z) - σ(-z)` on `dim` coordinates.
pub fn identity_stack(dim: usize) -> ReluStack {
    let mut w = Matrix::zeros(2 * dim, dim);
    let mut o = Matrix::zeros(dim, 2 * dim);
    for i in 0..dim {
        w[(2 * i, i)] = 1.0;
        w[(2 * i + 1, i)] = -1.0;
        o[(i, 2 * i)] = 1.0;
        o[(i, 2 * i + 1)] = -1.0;
    }
    ReluStack::new(vec![
        Affine::new(w, vec![0.0; 2 * dim]),
        Affine::new(o, vec![0.0; dim]),
    ])
    .expect("shapes chain by construction")
}
