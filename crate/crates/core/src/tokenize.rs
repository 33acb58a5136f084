//! Graph-to-token encodings and dataset export/import.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::linalg::{symmetric_eigen, Matrix, SymmetricEigen};
use crate::nn::TokenMatrix;

/// Off-diagonal convergence tolerance for the Laplacian eigensolver.
pub const EIGEN_TOL: f64 = 1e-12;
pub const EIGEN_MAX_SWEEPS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Adjacency,
    EdgeList,
    Laplacian,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Adjacency => "adjacency",
            Scheme::EdgeList => "edge_list",
            Scheme::Laplacian => "laplacian",
        }
    }

    pub fn parse(s: &str) -> Result<Scheme> {
        match s {
            "adjacency" => Ok(Scheme::Adjacency),
            "edge_list" | "edgelist" | "edge-list" => Ok(Scheme::EdgeList),
            "laplacian" => Ok(Scheme::Laplacian),
            other => Err(invalid(format!("unknown tokenizer `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenizedGraph {
    pub graph_id: String,
    pub n: usize,
    pub scheme: Scheme,
    pub pad_n: usize,
    pub tokens: TokenMatrix,
    pub label: Option<f64>,
}

impl TokenizedGraph {
    pub fn with_label(mut self, label: f64) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.graph_id = id.into();
        self
    }
}

fn check_pad(g: &Graph, pad_n: usize) -> Result<()> {
    if pad_n < g.n() {
        Err(invalid(format!(
            "pad_n = {pad_n} is smaller than n = {}",
            g.n()
        )))
    } else {
        Ok(())
    }
}

/// Token `i` is row `i` of the adjacency matrix zero-padded to `pad_n`,
/// followed by the scalar `i` when `with_index` is set. Padding tokens are
/// entirely zero.
pub fn tokenize_adjacency(g: &Graph, pad_n: usize, with_index: bool) -> Result<TokenizedGraph> {
    check_pad(g, pad_n)?;
    let dim = pad_n + usize::from(with_index);
    let mut tokens = TokenMatrix::zeros(dim, pad_n);
    for i in 0..g.n() {
        let t = tokens.token_mut(i);
        for (slot, &a) in t.iter_mut().zip(g.adj_row(i)) {
            *slot = f64::from(a);
        }
        if with_index {
            t[pad_n] = i as f64;
        }
    }
    Ok(TokenizedGraph {
        graph_id: String::new(),
        n: g.n(),
        scheme: Scheme::Adjacency,
        pad_n,
        tokens,
        label: None,
    })
}

/// Rebuilds the graph from adjacency tokens (the first `n` tokens, first `n`
/// coordinates).
pub fn graph_from_adjacency_tokens(tg: &TokenizedGraph, directed: bool) -> Result<Graph> {
    if tg.scheme != Scheme::Adjacency {
        return Err(invalid("not an adjacency tokenization"));
    }
    let mut g = Graph::empty(tg.n, directed);
    for u in 0..tg.n {
        let t = tg.tokens.token(u);
        for v in 0..tg.n {
            if t[v] == 1.0 && (directed || u <= v) {
                if u == v {
                    g = g.with_self_loops();
                }
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// One token per edge: `one_hot(u) ++ one_hot(v)`, edges in lexicographic order.
pub fn tokenize_edgelist(g: &Graph, pad_n: usize) -> Result<TokenizedGraph> {
    check_pad(g, pad_n)?;
    let edges = g.sorted_edges();
    let mut tokens = TokenMatrix::zeros(2 * pad_n, edges.len());
    for (k, &(u, v)) in edges.iter().enumerate() {
        let t = tokens.token_mut(k);
        t[u] = 1.0;
        t[pad_n + v] = 1.0;
    }
    Ok(TokenizedGraph {
        graph_id: String::new(),
        n: g.n(),
        scheme: Scheme::EdgeList,
        pad_n,
        tokens,
        label: None,
    })
}

pub fn laplacian(g: &Graph) -> Result<Matrix> {
    if g.is_directed() {
        return Err(invalid("Laplacian tokenization needs an undirected graph"));
    }
    let n = g.n();
    let mut l = Matrix::zeros(n, n);
    for &(u, v) in g.edges() {
        if u == v {
            continue;
        }
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
    }
    Ok(l)
}

/// Full eigen-decomposition of `L = D - A` (ascending, sign-normalised).
pub fn laplacian_eigen(g: &Graph) -> Result<SymmetricEigen> {
    Ok(symmetric_eigen(&laplacian(g)?, EIGEN_TOL, EIGEN_MAX_SWEEPS))
}

/// Token `i < n` holds node `i`'s coordinates in the `m` lowest eigenvectors;
/// the final token holds those `m` eigenvalues.
pub fn tokenize_laplacian(g: &Graph, m: usize) -> Result<TokenizedGraph> {
    let n = g.n();
    if m == 0 || m > n {
        return Err(invalid(format!("need 1 <= m <= n (m = {m}, n = {n})")));
    }
    let eig = laplacian_eigen(g)?;
    let mut tokens = TokenMatrix::zeros(m, n + 1);
    for i in 0..n {
        let t = tokens.token_mut(i);
        for (k, slot) in t.iter_mut().enumerate() {
            *slot = eig.vectors[(i, k)];
        }
    }
    tokens.token_mut(n).copy_from_slice(&eig.values[..m]);
    Ok(TokenizedGraph {
        graph_id: String::new(),
        n,
        scheme: Scheme::Laplacian,
        pad_n: n,
        tokens,
        label: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// `.csv` selects CSV; everything else is JSON lines.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

fn check_homogeneous(items: &[TokenizedGraph]) -> Result<()> {
    if let Some(first) = items.first() {
        let dim = first.tokens.dim();
        if items
            .iter()
            .any(|t| t.scheme != first.scheme || t.pad_n != first.pad_n || t.tokens.dim() != dim)
        {
            return Err(invalid("dataset mixes schemes or padding"));
        }
    }
    Ok(())
}

/// Writes the dataset and returns the number of records.
///
/// CSV columns: `graph_id,n,scheme,label,pad_n,dim,count,x0,x1,...` where the
/// `x` columns flatten the `dim × count` token matrix row-major. Rows of
/// edge-list datasets vary in length.
pub fn export_dataset(items: &[TokenizedGraph], path: &Path, format: Format) -> Result<usize> {
    check_homogeneous(items)?;
    let mut out = Vec::new();
    write_dataset(items, &mut out, format)?;
    std::fs::write(path, out)?;
    Ok(items.len())
}

/// Serialises to any writer; used by [`export_dataset`].
pub fn write_dataset(items: &[TokenizedGraph], w: impl Write, format: Format) -> Result<()> {
    check_homogeneous(items)?;
    match format {
        Format::Jsonl => {
            let mut w = BufWriter::new(w);
            for it in items {
                serde_json::to_writer(&mut w, &JsonRecord::from(it))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(w);
            if !items.is_empty() {
                let width = items
                    .iter()
                    .map(|t| t.tokens.dim() * t.tokens.count())
                    .max()
                    .unwrap_or(0);
                let mut header: Vec<String> =
                    ["graph_id", "n", "scheme", "label", "pad_n", "dim", "count"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect();
                header.extend((0..width).map(|k| format!("x{k}")));
                w.write_record(&header)?;
            }
            for it in items {
                let mut rec = vec![
                    it.graph_id.clone(),
                    it.n.to_string(),
                    it.scheme.as_str().to_string(),
                    it.label.map(|l| l.to_string()).unwrap_or_default(),
                    it.pad_n.to_string(),
                    it.tokens.dim().to_string(),
                    it.tokens.count().to_string(),
                ];
                for row in it.tokens.to_rows() {
                    rec.extend(row.iter().map(|v| v.to_string()));
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    graph_id: String,
    n: usize,
    scheme: Scheme,
    pad_n: usize,
    dim: usize,
    tokens: Vec<Vec<f64>>,
    label: Option<f64>,
}

impl From<&TokenizedGraph> for JsonRecord {
    fn from(t: &TokenizedGraph) -> Self {
        JsonRecord {
            graph_id: t.graph_id.clone(),
            n: t.n,
            scheme: t.scheme,
            pad_n: t.pad_n,
            dim: t.tokens.dim(),
            tokens: t.tokens.to_tokens(),
            label: t.label,
        }
    }
}

pub fn import_dataset(path: &Path, format: Format) -> Result<Vec<TokenizedGraph>> {
    let file = File::open(path)?;
    match format {
        Format::Jsonl => {
            let mut items = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: JsonRecord = serde_json::from_str(&line)?;
                items.push(TokenizedGraph {
                    graph_id: r.graph_id,
                    n: r.n,
                    scheme: r.scheme,
                    pad_n: r.pad_n,
                    tokens: TokenMatrix::from_tokens(r.dim, &r.tokens)?,
                    label: r.label,
                });
            }
            Ok(items)
        }
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
            let mut items = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                let field = |k: usize| {
                    rec.get(k)
                        .ok_or_else(|| Error::Malformed(format!("missing CSV field {k}")))
                };
                let num = |k: usize| -> Result<usize> {
                    field(k)?
                        .parse()
                        .map_err(|_| Error::Malformed(format!("bad integer in CSV field {k}")))
                };
                let label = match field(3)? {
                    "" => None,
                    s => Some(
                        s.parse::<f64>()
                            .map_err(|_| Error::Malformed("bad label".into()))?,
                    ),
                };
                let (dim, count) = (num(5)?, num(6)?);
                let vals = (7..7 + dim * count)
                    .map(|k| {
                        field(k)?
                            .parse::<f64>()
                            .map_err(|_| Error::Malformed(format!("bad value in CSV field {k}")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let rows: Vec<Vec<f64>> = vals.chunks(count.max(1)).map(<[f64]>::to_vec).collect();
                let tokens = if count == 0 {
                    TokenMatrix::zeros(dim, 0)
                } else {
                    TokenMatrix::from_rows(&rows)?
                };
                items.push(TokenizedGraph {
                    graph_id: field(0)?.to_string(),
                    n: num(1)?,
                    scheme: Scheme::parse(field(2)?)?,
                    pad_n: num(4)?,
                    tokens,
                    label,
                });
            }
            Ok(items)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_from_edges;
    use crate::oracles::complete_graph;

    #[test]
    fn adjacency_two_cycle_with_index() {
        let g = graph_from_edges(2, &[(0, 1), (1, 0)], true).unwrap();
        let t = tokenize_adjacency(&g, 2, true).unwrap();
        assert_eq!(
            t.tokens.to_rows(),
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        assert_eq!(t.tokens.token(0), &[0.0, 1.0, 0.0]);
        assert_eq!(t.tokens.token(1), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn adjacency_padding_is_zero() {
        let t = tokenize_adjacency(&complete_graph(3), 5, false).unwrap();
        assert_eq!(t.tokens.count(), 5);
        assert!(t
            .tokens
            .token(3)
            .iter()
            .chain(t.tokens.token(4))
            .all(|&v| v == 0.0));
        let e = tokenize_adjacency(&Graph::empty(3, false), 3, false).unwrap();
        assert!(e.tokens.as_slice().iter().all(|&v| v == 0.0));
        assert!(tokenize_adjacency(&complete_graph(3), 2, false).is_err());
    }

    #[test]
    fn edgelist_examples() {
        let g = graph_from_edges(3, &[(0, 1)], false).unwrap();
        let t = tokenize_edgelist(&g, 3).unwrap();
        assert_eq!(t.tokens.token(0), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            tokenize_edgelist(&complete_graph(3), 3)
                .unwrap()
                .tokens
                .count(),
            3
        );
        assert_eq!(
            tokenize_edgelist(&Graph::empty(4, false), 4)
                .unwrap()
                .tokens
                .count(),
            0
        );
    }

    #[test]
    fn laplacian_kernel_of_connected_graph() {
        let g = complete_graph(5);
        let t = tokenize_laplacian(&g, 3).unwrap();
        assert_eq!(t.tokens.count(), 6);
        assert!(t.tokens.token(5)[0].abs() < 1e-9);
        assert!((0..5).all(|i| t.tokens.token(i)[0] > 0.0));
        assert!(tokenize_laplacian(&graph_from_edges(2, &[(0, 1)], true).unwrap(), 1).is_err());
    }

    #[test]
    fn jsonl_and_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let items: Vec<TokenizedGraph> = (3..6)
            .map(|k| {
                tokenize_laplacian(&complete_graph(k), 2)
                    .unwrap()
                    .with_id(format!("g{k}"))
                    .with_label(k as f64 / 3.0)
            })
            .map(|mut t| {
                t.pad_n = 0;
                t
            })
            .collect();
        // heterogeneous token counts are fine as long as scheme and dim agree
        for (name, fmt) in [("d.jsonl", Format::Jsonl), ("d.csv", Format::Csv)] {
            let path = dir.path().join(name);
            assert_eq!(Format::from_path(&path), fmt);
            assert_eq!(export_dataset(&items, &path, fmt).unwrap(), 3);
            assert_eq!(import_dataset(&path, fmt).unwrap(), items);
        }
    }

    #[test]
    fn empty_export_writes_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        assert_eq!(export_dataset(&[], &path, Format::Jsonl).unwrap(), 0);
        assert_eq!(std::fs::read(&path).unwrap().len(), 0);
    }

    #[test]
    fn heterogeneous_export_is_rejected() {
        let a = tokenize_adjacency(&complete_graph(3), 3, false).unwrap();
        let b = tokenize_edgelist(&complete_graph(3), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(export_dataset(&[a, b], &dir.path().join("x.jsonl"), Format::Jsonl).is_err());
    }
}
