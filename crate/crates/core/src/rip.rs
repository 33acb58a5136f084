//! Random sign embeddings `y_1..y_n ∈ R^p` and least-norm dual witnesses φ
//! with `<φ, y_i> = 1` on a support and small inner products elsewhere.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_solve, dot, Matrix};
use crate::seed;

/// Off-support margins must stay at or below this magnitude.
pub const MARGIN_BOUND: f64 = 0.5;

const GRAM_PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RipSystem {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub rip_dim: usize,
    /// `rip_dim × n`; column `i` is `y_i`.
    pub y: Matrix,
    pub seed: u64,
    /// Transposed copy so each `y_i` is a contiguous row.
    #[serde(skip)]
    cols: Vec<Vec<f64>>,
}

/// `max(d, ⌈α·d·ln n⌉)`.
pub fn rip_dim(n: usize, d: usize, alpha: f64) -> usize {
    ((alpha * d as f64 * (n as f64).ln()).ceil() as usize)
        .max(d)
        .max(1)
}

/// Samples `Y` with i.i.d. entries `±1/√p`.
pub fn sample_rip_vectors(n: usize, d: usize, alpha: f64, seed: u64) -> Result<RipSystem> {
    if n < 2 {
        return Err(invalid("embedding universe needs n >= 2"));
    }
    if d > n {
        return Err(invalid(format!("support bound d = {d} exceeds n = {n}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha = {alpha} must be positive")));
    }
    let p = rip_dim(n, d, alpha);
    let scale = 1.0 / (p as f64).sqrt();
    let mut rng = seed::rng(seed);
    let mut y = Matrix::zeros(p, n);
    for j in 0..n {
        for r in 0..p {
            y[(r, j)] = if rng.random_bool(0.5) { scale } else { -scale };
        }
    }
    let cols = (0..n).map(|j| y.column(j)).collect();
    Ok(RipSystem {
        n,
        d,
        alpha,
        rip_dim: p,
        y,
        seed,
        cols,
    })
}

impl RipSystem {
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.cols[i]
    }

    /// Wraps an existing `p × n` embedding matrix.
    pub fn from_matrix(y: Matrix, d: usize, alpha: f64, seed: u64) -> Self {
        let n = y.cols();
        let cols = (0..n).map(|j| y.column(j)).collect();
        RipSystem {
            n,
            d,
            alpha,
            rip_dim: y.rows(),
            y,
            seed,
            cols,
        }
    }

    /// Rebuilds the column cache after deserialisation.
    pub fn refresh(mut self) -> Self {
        self.cols = (0..self.n).map(|j| self.y.column(j)).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiResult {
    pub phi: Vec<f64>,
    /// `<φ, y_j>` for every `j`.
    pub margins: Vec<f64>,
    /// All off-support margins have magnitude at most 1/2.
    pub success: bool,
}

/// Least-norm `φ = Y_S (Y_Sᵀ Y_S)⁻¹ 1`. The support is sorted first, so the
/// result does not depend on the order indices are listed in.
pub fn compute_phi(sys: &RipSystem, support: &[usize]) -> Result<PhiResult> {
    let mut s = support.to_vec();
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("support has repeated indices"));
    }
    if s.len() > sys.d {
        return Err(invalid(format!(
            "support size {} exceeds d = {}",
            s.len(),
            sys.d
        )));
    }
    if s.last().is_some_and(|&i| i >= sys.n) {
        return Err(invalid("support index out of range"));
    }
    let p = sys.rip_dim;
    let mut phi = vec![0.0; p];
    if !s.is_empty() {
        let k = s.len();
        let mut gram = Matrix::zeros(k, k);
        for a in 0..k {
            for b in 0..=a {
                let g = dot(sys.vector(s[a]), sys.vector(s[b]));
                gram[(a, b)] = g;
                gram[(b, a)] = g;
            }
        }
        let coef =
            cholesky_solve(&gram, &vec![1.0; k], GRAM_PIVOT_TOL).ok_or(Error::SingularGram(k))?;
        for (&i, &c) in s.iter().zip(&coef) {
            for (f, &v) in phi.iter_mut().zip(sys.vector(i)) {
                *f += c * v;
            }
        }
    }
    let margins: Vec<f64> = (0..sys.n).map(|j| dot(&phi, sys.vector(j))).collect();
    let success = margins
        .iter()
        .enumerate()
        .all(|(j, m)| s.binary_search(&j).is_ok() || m.abs() <= MARGIN_BOUND);
    Ok(PhiResult {
        phi,
        margins,
        success,
    })
}

/// Fraction of uniformly random size-`d` supports whose off-support margins
/// all stay within 1/2, on one system sampled from `seed`.
pub fn margin_census(n: usize, d: usize, alpha: f64, trials: usize, seed: u64) -> Result<f64> {
    let sys = sample_rip_vectors(n, d, alpha, seed)?;
    let mut hits = 0usize;
    for t in 0..trials {
        let mut rng = seed::rng(seed::derive(seed, 0x5u64, t as u64));
        let support = sample(&mut rng, n, d).into_vec();
        match compute_phi(&sys, &support) {
            Ok(r) if r.success => hits += 1,
            Ok(_) | Err(Error::SingularGram(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(hits as f64 / trials.max(1) as f64)
}
