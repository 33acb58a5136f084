//! Two layers that decide whether a 2-regular graph is one cycle or two.
//!
//! Layer 1 leaves the tokens `(a_i, i)` untouched (`V = 0`, residual) and its
//! MLP turns each adjacency row into the neighbour pair: it forms
//! `s1 = Σ j·a_ij` and `s2 = Σ j²·a_ij` over 1-based `j`, decodes
//! `(s1, s2) → (u, v)`, and writes `(u, v, i+1)` into block `i` of a `3n`
//! vector. Layer 2 averages all tokens with `V = n·I`, so every token holds
//! the whole edge list, and the readout runs union-find on it.

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::nn::{
    transformer_forward, Affine, AttentionHead, ExactFn, ExactMapParams, Layer, MlpStage,
    ReluStack, TransformerSpec,
};
use crate::tokenize::tokenize_adjacency;

use super::Mode;

/// Largest `n` for which the explicit decode network is built.
pub const EXPLICIT_MAX_N: usize = 32;

/// Decodes a degree-2 adjacency row `(a, i)` into block `i` of a `3n` vector.
fn edge_pair_decode(token: &[f64], params: &ExactMapParams) -> Result<Vec<f64>> {
    let n = params.usize(0)?;
    if token.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "edge-pair decode expects {} coordinates, got {}",
            n + 1,
            token.len()
        )));
    }
    let (mut deg, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (j, &a) in token[..n].iter().enumerate() {
        let j = (j + 1) as f64;
        deg += a;
        s1 += j * a;
        s2 += j * j * a;
    }
    let i = token[n].round();
    if deg != 2.0 || !(0.0..n as f64).contains(&i) {
        return Err(Error::Malformed(format!(
            "edge-pair decode needs a degree-2 row with a valid index (degree {deg}, index {i})"
        )));
    }
    // (v - u)^2 = 2 s2 - s1^2
    let disc = 2.0 * s2 - s1 * s1;
    let gap = disc.sqrt().round();
    if gap * gap != disc || gap < 1.0 {
        return Err(Error::Malformed("row sums do not decode to a pair".into()));
    }
    let (u, v) = ((s1 - gap) / 2.0, (s1 + gap) / 2.0);
    let mut out = vec![0.0; 3 * n];
    let b = 3 * i as usize;
    out[b..b + 3].copy_from_slice(&[u, v, i + 1.0]);
    Ok(out)
}

pub(crate) fn exact_maps() -> Vec<(&'static str, ExactFn)> {
    vec![(
        "edge-pair-decode",
        std::sync::Arc::new(|t: &[f64], _i: usize, p: &ExactMapParams| edge_pair_decode(t, p)),
    )]
}

/// Builds the six-affine decode network: integer indicators on `s1`, `s2`
/// and the index, conjunctions per candidate pair, linear read-out of
/// `(u, v, i+1)`, and a big-M gate that places the triple into block `i`.
pub fn explicit_decode_net(n: usize) -> Result<ReluStack> {
    if !(3..=EXPLICIT_MAX_N).contains(&n) {
        return Err(invalid(format!(
            "explicit decode network supports 3 <= n <= {EXPLICIT_MAX_N}, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
        .collect();
    let mut s1_vals: Vec<usize> = pairs.iter().map(|&(u, v)| u + v).collect();
    let mut s2_vals: Vec<usize> = pairs.iter().map(|&(u, v)| u * u + v * v).collect();
    s1_vals.sort_unstable();
    s1_vals.dedup();
    s2_vals.sort_unstable();
    s2_vals.dedup();
    let f_count = s1_vals.len() + s2_vals.len() + n;
    let input = n + 1;

    // 1: four shifted ReLU units per integer indicator
    let mut w1 = Matrix::zeros(4 * f_count, input);
    let mut b1 = vec![0.0; 4 * f_count];
    let mut unit = 0;
    let mut add_indicator = |coef: &dyn Fn(usize) -> f64, target: f64| {
        for (k, shift) in [target - 1.0, target, target + 1.0, target]
            .into_iter()
            .enumerate()
        {
            for c in 0..input {
                w1[(unit + k, c)] = coef(c);
            }
            b1[unit + k] = -shift;
        }
        unit += 4;
    };
    let lin = |c: usize| if c < n { (c + 1) as f64 } else { 0.0 };
    let sq = |c: usize| {
        if c < n {
            ((c + 1) * (c + 1)) as f64
        } else {
            0.0
        }
    };
    let idx = |c: usize| if c == n { 1.0 } else { 0.0 };
    for &a in &s1_vals {
        add_indicator(&lin, a as f64);
    }
    for &b in &s2_vals {
        add_indicator(&sq, b as f64);
    }
    for k in 0..n {
        add_indicator(&idx, k as f64);
    }

    // 2: indicator values f = σ(z-(r-1)) - σ(z-r) + σ(z-(r+1)) - σ(z-r)
    let mut w2 = Matrix::zeros(f_count, 4 * f_count);
    for f in 0..f_count {
        for (k, sign) in [1.0, -1.0, 1.0, -1.0].into_iter().enumerate() {
            w2[(f, 4 * f + k)] = sign;
        }
    }

    // 3: pair conjunctions σ(F1 + F2 - 1); index indicators pass through
    let p = pairs.len();
    let s2_base = s1_vals.len();
    let g_base = s2_base + s2_vals.len();
    let mut w3 = Matrix::zeros(p + n, f_count);
    let mut b3 = vec![0.0; p + n];
    for (q, &(u, v)) in pairs.iter().enumerate() {
        let a = s1_vals.binary_search(&(u + v)).expect("listed");
        let b = s2_vals.binary_search(&(u * u + v * v)).expect("listed");
        w3[(q, a)] = 1.0;
        w3[(q, s2_base + b)] = 1.0;
        b3[q] = -1.0;
    }
    for k in 0..n {
        w3[(p + k, g_base + k)] = 1.0;
    }

    // 4: (u, v, i+1) and the index indicators again
    let mut w4 = Matrix::zeros(3 + n, p + n);
    for (q, &(u, v)) in pairs.iter().enumerate() {
        w4[(0, q)] = u as f64;
        w4[(1, q)] = v as f64;
    }
    for k in 0..n {
        w4[(2, p + k)] = (k + 1) as f64;
        w4[(3 + k, p + k)] = 1.0;
    }

    // 5: σ(value - M(1 - G_k)) keeps block k only for the token's own index
    let big_m = (n + 1) as f64;
    let mut w5 = Matrix::zeros(3 * n, 3 + n);
    let mut b5 = vec![0.0; 3 * n];
    for k in 0..n {
        for c in 0..3 {
            w5[(3 * k + c, c)] = 1.0;
            w5[(3 * k + c, 3 + k)] = big_m;
            b5[3 * k + c] = -big_m;
        }
    }

    // 6: linear read-out
    let w6 = Matrix::identity(3 * n);

    ReluStack::new(vec![
        Affine::new(w1, b1),
        Affine::new(w2, vec![0.0; f_count]),
        Affine::new(w3, b3),
        Affine::new(w4, vec![0.0; 3 + n]),
        Affine::new(w5, b5),
        Affine::new(w6, vec![0.0; 3 * n]),
    ])
}

/// Input tokens: adjacency rows with the node index appended (`n + 1` dims).
pub fn build_one_vs_two(n: usize, mode: Mode) -> Result<TransformerSpec> {
    if n < 6 || n % 2 == 1 {
        return Err(invalid(format!("n must be even and at least 6, got {n}")));
    }
    let decode = match mode {
        Mode::ExactMap => MlpStage::exact(
            "edge-pair-decode",
            3 * n,
            ExactMapParams::ints(vec![n as i64]),
        ),
        Mode::ExplicitNet => MlpStage::ReluStack(explicit_decode_net(n)?),
    };
    Ok(TransformerSpec {
        input_dim: n + 1,
        layers: vec![
            Layer {
                heads: vec![AttentionHead::silent(n + 1)],
                residual: true,
                mlp: decode,
            },
            Layer {
                heads: vec![AttentionHead::uniform(
                    3 * n,
                    Matrix::identity(3 * n).scale(n as f64),
                )],
                residual: false,
                mlp: MlpStage::exact("connectivity-of-edge-list", 1, ExactMapParams::default()),
            },
        ],
        output: "every token: 1 if the graph is a single cycle, else 0".into(),
    })
}

/// Runs the model on `g` and returns the value in token 0.
pub fn run_one_vs_two(spec: &TransformerSpec, g: &Graph) -> Result<f64> {
    let n = spec.input_dim - 1;
    if g.n() != n {
        return Err(invalid(format!(
            "model built for n = {n}, graph has {}",
            g.n()
        )));
    }
    let x = tokenize_adjacency(g, n, true)?.tokens;
    let out = transformer_forward(spec, &x)?;
    Ok(out.token(0)[0])
}
