//! Transformer forward pass with columns-as-tokens semantics.
//!
//! For a head `(K, Q, V, c)` the output token `i` is
//! `sum_j softmax_j(c * <K x_j, Q x_i>) V x_j`: each query token normalises
//! its weights over the key tokens, so the all-zero `K = Q` head with
//! `V = N * I` returns the column sum of `X` in every token.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{compensated_dot, dot, Matrix};

/// Largest scaled logit magnitude accepted before exponentiation.
pub const LOGIT_CAP: f64 = 700.0;

/// `dim × count` real matrix whose columns are tokens. Storage is
/// token-contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenMatrix {
    dim: usize,
    count: usize,
    data: Vec<f64>,
}

impl TokenMatrix {
    pub fn zeros(dim: usize, count: usize) -> Self {
        Self {
            dim,
            count,
            data: vec![0.0; dim * count],
        }
    }

    /// Builds from a list of tokens (columns). All tokens must share `dim`.
    pub fn from_tokens(dim: usize, tokens: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "token {i} has length {} but dim is {dim}",
                    t.len()
                )));
            }
            data.extend_from_slice(t);
        }
        Ok(Self {
            dim,
            count: tokens.len(),
            data,
        })
    }

    /// Builds from a row-major `dim × count` array, one row per coordinate.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let count = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(dim, count);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != count {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                m.token_mut(c)[r] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of tokens.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn token(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn token_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.count).map(move |i| self.token(i))
    }

    /// Entry at embedding row `r` of token `c`.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.dim + r]
    }

    pub fn to_tokens(&self) -> Vec<Vec<f64>> {
        self.tokens().map(<[f64]>::to_vec).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|r| (0..self.count).map(|c| self.get(r, c)).collect())
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &TokenMatrix) -> f64 {
        assert_eq!((self.dim, self.count), (other.dim, other.count));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Serialize, Deserialize)]
struct TokenMatrixRepr {
    dim: usize,
    tokens: Vec<Vec<f64>>,
}

impl Serialize for TokenMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TokenMatrixRepr {
            dim: self.dim,
            tokens: self.to_tokens(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TokenMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TokenMatrixRepr::deserialize(d)?;
        TokenMatrix::from_tokens(r.dim, &r.tokens).map_err(serde::de::Error::custom)
    }
}

/// One attention head. `key` and `query` map tokens into a shared score space
/// (same row count); `value` maps tokens into the output space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionHead {
    pub key: Matrix,
    pub query: Matrix,
    pub value: Matrix,
    pub temperature: f64,
}

impl AttentionHead {
    /// Head with `K = Q = 0` (uniform attention).
    pub fn uniform(dim: usize, value: Matrix) -> Self {
        Self {
            key: Matrix::zeros(1, dim),
            query: Matrix::zeros(1, dim),
            value,
            temperature: 1.0,
        }
    }

    /// Head that contributes nothing (`V = 0`).
    pub fn silent(dim: usize) -> Self {
        Self::uniform(dim, Matrix::zeros(dim, dim))
    }

    fn check(&self, dim: usize) -> Result<()> {
        let ok = self.key.cols() == dim
            && self.query.cols() == dim
            && self.value.cols() == dim
            && self.key.rows() == self.query.rows();
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "head K {}x{}, Q {}x{}, V {}x{} against token dim {dim}",
                self.key.rows(),
                self.key.cols(),
                self.query.rows(),
                self.query.cols(),
                self.value.rows(),
                self.value.cols()
            )));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::NonFinite(format!(
                "temperature {} must be positive and finite",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Max-subtracted softmax. Rejects non-finite logits and any logit beyond
/// [`LOGIT_CAP`].
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    let mut max = f64::NEG_INFINITY;
    for &l in logits {
        if !l.is_finite() {
            return Err(Error::NonFinite(format!("logit {l}")));
        }
        if l.abs() > LOGIT_CAP {
            return Err(Error::LogitOverflow {
                value: l,
                cap: LOGIT_CAP,
            });
        }
        max = max.max(l);
    }
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Attention weights of one head: row `i` holds query token `i`'s
/// distribution over key tokens.
pub fn attention_weights(head: &AttentionHead, x: &TokenMatrix) -> Result<Matrix> {
    head.check(x.dim())?;
    let n = x.count();
    let keys: Vec<Vec<f64>> = x.tokens().map(|t| head.key.matvec(t)).collect();
    let queries: Vec<Vec<f64>> = x.tokens().map(|t| head.query.matvec(t)).collect();
    let mut w = Matrix::zeros(n, n);
    for (i, q) in queries.iter().enumerate() {
        let logits: Vec<f64> = keys.iter().map(|k| head.temperature * dot(k, q)).collect();
        w.row_mut(i).copy_from_slice(&softmax(&logits)?);
    }
    Ok(w)
}

fn value_tokens(head: &AttentionHead, x: &TokenMatrix) -> Vec<Vec<f64>> {
    // nothing to compute for V = 0 heads, the common case in these circuits
    if head.value.is_zero() {
        return vec![vec![0.0; head.value.rows()]; x.count()];
    }
    x.tokens().map(|t| head.value.matvec(t)).collect()
}

fn attention_with_weights(
    heads: &[AttentionHead],
    x: &TokenMatrix,
    residual: bool,
) -> Result<(TokenMatrix, Vec<Matrix>)> {
    let out_dim = match heads.first() {
        Some(h) => h.value.rows(),
        None => x.dim(),
    };
    if heads.iter().any(|h| h.value.rows() != out_dim) {
        return Err(Error::DimensionMismatch(
            "heads disagree on output dim".into(),
        ));
    }
    if residual && out_dim != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "residual needs output dim {out_dim} to equal input dim {}",
            x.dim()
        )));
    }
    let mut z = TokenMatrix::zeros(out_dim, x.count());
    let mut all_weights = Vec::with_capacity(heads.len());
    for head in heads {
        let w = attention_weights(head, x)?;
        let values = value_tokens(head, x);
        if !head.value.is_zero() {
            for i in 0..x.count() {
                let out = z.token_mut(i);
                for (j, v) in values.iter().enumerate() {
                    let wij = w[(i, j)];
                    if wij == 0.0 {
                        continue;
                    }
                    for (o, &vv) in out.iter_mut().zip(v) {
                        *o += wij * vv;
                    }
                }
            }
        }
        all_weights.push(w);
    }
    if residual {
        for (o, &xi) in z.data.iter_mut().zip(&x.data) {
            *o += xi;
        }
    }
    if !z.is_finite() {
        return Err(Error::NonFinite("attention output".into()));
    }
    Ok((z, all_weights))
}

/// Multi-head attention, optionally adding the residual `X`.
pub fn attention_forward(
    heads: &[AttentionHead],
    x: &TokenMatrix,
    residual: bool,
) -> Result<TokenMatrix> {
    attention_with_weights(heads, x, residual).map(|(z, _)| z)
}

/// Affine map `W x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Affine {
    pub fn new(weight: Matrix, bias: Vec<f64>) -> Self {
        assert_eq!(weight.rows(), bias.len(), "bias length must match rows");
        Self { weight, bias }
    }

    /// Each output is accumulated with compensated summation, so the
    /// large cancelling terms of bump and indicator networks leave no
    /// rounding residue.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.weight.rows())
            .map(|r| compensated_dot(self.weight.row(r), x, self.bias[r]))
            .collect()
    }
}

/// Affine layers with ReLU between consecutive layers (none after the last).
/// A position-aware stack reads `[token; index]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReluStack {
    pub layers: Vec<Affine>,
    #[serde(default)]
    pub position_aware: bool,
}

impl ReluStack {
    pub fn new(layers: Vec<Affine>) -> Result<Self> {
        for w in layers.windows(2) {
            if w[0].weight.rows() != w[1].weight.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "layer output {} does not feed input {}",
                    w[0].weight.rows(),
                    w[1].weight.cols()
                )));
            }
        }
        if layers.is_empty() {
            return Err(Error::DimensionMismatch("empty ReLU stack".into()));
        }
        Ok(Self {
            layers,
            position_aware: false,
        })
    }

    pub fn position_aware(mut self) -> Self {
        self.position_aware = true;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").weight.rows()
    }

    /// Widest hidden or output layer.
    pub fn width(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.rows())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            h = layer.apply(&h);
            if k < last {
                h.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        h
    }

    /// Scalar convenience for one-in/one-out stacks.
    pub fn eval_scalar(&self, x: f64) -> f64 {
        self.eval(&[x])[0]
    }

    fn apply_token(&self, token: &[f64], index: usize) -> Result<Vec<f64>> {
        let expected = self.input_dim() - usize::from(self.position_aware);
        if token.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "ReLU stack expects tokens of dim {expected}, got {}",
                token.len()
            )));
        }
        if self.position_aware {
            let mut x = token.to_vec();
            x.push(index as f64);
            Ok(self.eval(&x))
        } else {
            Ok(self.eval(token))
        }
    }
}

/// Immutable parameters handed to an exact map.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactMapParams {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ints: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nets: Vec<ReluStack>,
}

impl ExactMapParams {
    pub fn ints(ints: Vec<i64>) -> Self {
        Self {
            ints,
            ..Self::default()
        }
    }

    pub(crate) fn int(&self, k: usize) -> Result<i64> {
        self.ints.get(k).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("exact map is missing int parameter {k}"))
        })
    }

    pub(crate) fn usize(&self, k: usize) -> Result<usize> {
        usize::try_from(self.int(k)?)
            .map_err(|_| Error::InvalidParameter(format!("int parameter {k} is negative")))
    }
}

/// Per-token MLP stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MlpStage {
    ReluStack(ReluStack),
    /// A registered pure function of `(token, index, params)` with a declared
    /// output dimension.
    ExactMap {
        id: String,
        out_dim: usize,
        #[serde(default)]
        params: ExactMapParams,
    },
}

impl MlpStage {
    pub fn exact(id: &str, out_dim: usize, params: ExactMapParams) -> Self {
        MlpStage::ExactMap {
            id: id.to_string(),
            out_dim,
            params,
        }
    }

    /// The `identity` exact map on tokens of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        Self::exact("identity", dim, ExactMapParams::default())
    }

    pub fn output_dim(&self) -> usize {
        match self {
            MlpStage::ReluStack(s) => s.output_dim(),
            MlpStage::ExactMap { out_dim, .. } => *out_dim,
        }
    }
}

/// Applies the stage to every token separately; token `i` receives index `i`.
pub fn mlp_forward(stage: &MlpStage, x: &TokenMatrix) -> Result<TokenMatrix> {
    let out_dim = stage.output_dim();
    let mut out = TokenMatrix::zeros(out_dim, x.count());
    let exact = match stage {
        MlpStage::ExactMap { id, .. } => Some(lookup(id)?),
        MlpStage::ReluStack(_) => None,
    };
    for i in 0..x.count() {
        let y = match (stage, &exact) {
            (MlpStage::ReluStack(s), _) => s.apply_token(x.token(i), i)?,
            (MlpStage::ExactMap { params, .. }, Some(f)) => f(x.token(i), i, params)?,
            _ => unreachable!(),
        };
        if y.len() != out_dim {
            return Err(Error::DimensionMismatch(format!(
                "MLP produced {} values for token {i}, declared {out_dim}",
                y.len()
            )));
        }
        out.token_mut(i).copy_from_slice(&y);
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("MLP output".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub heads: Vec<AttentionHead>,
    pub residual: bool,
    pub mlp: MlpStage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformerSpec {
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    /// Human-readable description of what the final tokens hold.
    #[serde(default)]
    pub output: String,
}

impl TransformerSpec {
    /// Embedding dimension: the widest per-token vector produced by any MLP
    /// stage (the input dimension is not counted).
    pub fn embedding_width(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.mlp.output_dim())
            .max()
            .unwrap_or(self.input_dim)
    }
}

/// Everything observable about one layer of a forward pass.
#[derive(Clone, Debug)]
pub struct LayerTrace {
    /// Attention output (with residual when enabled), the MLP input.
    pub post_attention: TokenMatrix,
    pub output: TokenMatrix,
    /// One matrix per head; row `i` is query token `i`'s weights.
    pub weights: Vec<Matrix>,
}

pub fn transformer_forward(spec: &TransformerSpec, x0: &TokenMatrix) -> Result<TokenMatrix> {
    let mut x = check_input(spec, x0)?;
    for layer in &spec.layers {
        let z = attention_forward(&layer.heads, &x, layer.residual)?;
        x = mlp_forward(&layer.mlp, &z)?;
    }
    Ok(x)
}

pub fn transformer_forward_traced(
    spec: &TransformerSpec,
    x0: &TokenMatrix,
) -> Result<Vec<LayerTrace>> {
    let mut x = check_input(spec, x0)?;
    let mut trace = Vec::with_capacity(spec.layers.len());
    for layer in &spec.layers {
        let (z, weights) = attention_with_weights(&layer.heads, &x, layer.residual)?;
        x = mlp_forward(&layer.mlp, &z)?;
        trace.push(LayerTrace {
            post_attention: z,
            output: x.clone(),
            weights,
        });
    }
    Ok(trace)
}

fn check_input(spec: &TransformerSpec, x0: &TokenMatrix) -> Result<TokenMatrix> {
    if x0.dim() != spec.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "input tokens have dim {} but the model expects {}",
            x0.dim(),
            spec.input_dim
        )));
    }
    if !x0.is_finite() {
        return Err(Error::NonFinite("input tokens".into()));
    }
    Ok(x0.clone())
}

/// Signature of a registered per-token map.
pub type ExactFn = Arc<dyn Fn(&[f64], usize, &ExactMapParams) -> Result<Vec<f64>> + Send + Sync>;

fn registry() -> &'static RwLock<HashMap<String, ExactFn>> {
    static REGISTRY: OnceLock<RwLock<HashMap<String, ExactFn>>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut map: HashMap<String, ExactFn> = HashMap::new();
        for (id, f) in crate::builtins::builtin_maps() {
            map.insert(id.to_string(), f);
        }
        RwLock::new(map)
    })
}

/// Registers a new map. Ids are write-once.
pub fn register_exact_map<F>(id: &str, f: F) -> Result<()>
where
    F: Fn(&[f64], usize, &ExactMapParams) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    let mut reg = registry().write().expect("exact-map registry poisoned");
    if reg.contains_key(id) {
        return Err(Error::DuplicateExactMap(id.to_string()));
    }
    reg.insert(id.to_string(), Arc::new(f));
    Ok(())
}

fn lookup(id: &str) -> Result<ExactFn> {
    registry()
        .read()
        .expect("exact-map registry poisoned")
        .get(id)
        .cloned()
        .ok_or_else(|| Error::UnknownExactMap(id.to_string()))
}

pub fn is_registered(id: &str) -> bool {
    lookup(id).is_ok()
}

pub fn exact_map_apply(
    id: &str,
    token: &[f64],
    index: usize,
    params: &ExactMapParams,
) -> Result<Vec<f64>> {
    lookup(id)?(token, index, params)
}
