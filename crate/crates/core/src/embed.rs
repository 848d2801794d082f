//! Node embedding files and node-pair to edge feature operators.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, Pair};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} values, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: '{token}' is not a number")]
    NotNumeric { line: usize, token: String },
    #[error("line {line}: non-finite value '{token}'")]
    NonFinite { line: usize, token: String },
    #[error("line {line}: node {node} appears twice")]
    Duplicate { line: usize, node: NodeId },
    #[error("embedding file is empty")]
    Empty,
    #[error("{count} nodes have no embedding, e.g. {examples:?}")]
    Missing { count: usize, examples: Vec<NodeId> },
    #[error("node {node} of pair ({}, {}) has no embedding", pair.0, pair.1)]
    MissingPairNode { node: NodeId, pair: Pair },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeOperator {
    Average,
    Hadamard,
    WeightedL1,
    WeightedL2,
}

impl EdgeOperator {
    pub const ALL: [EdgeOperator; 4] = [
        EdgeOperator::Average,
        EdgeOperator::Hadamard,
        EdgeOperator::WeightedL1,
        EdgeOperator::WeightedL2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeOperator::Average => "average",
            EdgeOperator::Hadamard => "hadamard",
            EdgeOperator::WeightedL1 => "weighted_l1",
            EdgeOperator::WeightedL2 => "weighted_l2",
        }
    }

    #[inline]
    pub fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            EdgeOperator::Average => (x + y) / 2.0,
            EdgeOperator::Hadamard => x * y,
            EdgeOperator::WeightedL1 => (x - y).abs(),
            EdgeOperator::WeightedL2 => (x - y) * (x - y),
        }
    }
}

impl fmt::Display for EdgeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        EdgeOperator::ALL
            .into_iter()
            .find(|op| op.name() == key)
            .ok_or_else(|| format!("unknown edge operator '{key}' (average, hadamard, weighted_l1, weighted_l2)"))
    }
}

/// Node id to vector map with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<NodeId, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, node: NodeId) -> Option<&[f64]> {
        self.vectors.get(&node).map(Vec::as_slice)
    }

    /// Builds a table from rows; panics if lengths disagree or values are
    /// not finite.
    pub fn from_rows(rows: impl IntoIterator<Item = (NodeId, Vec<f64>)>) -> Self {
        let vectors: BTreeMap<_, _> = rows.into_iter().collect();
        let dim = vectors.values().next().map_or(0, Vec::len);
        assert!(
            vectors
                .values()
                .all(|v| v.len() == dim && v.iter().all(|x| x.is_finite())),
            "rows must share one dimension and be finite"
        );
        EmbeddingTable { dim, vectors }
    }
}

fn split_tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .collect()
}

fn is_integer(token: &str) -> bool {
    token.parse::<u64>().is_ok()
}

pub fn parse_embedding_file(
    path: impl AsRef<Path>,
    expected_nodes: Option<usize>,
) -> Result<EmbeddingTable, EmbedError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_embeddings(&text, expected_nodes)
}

/// Parses `node v1 .. vd` rows separated by spaces, tabs or commas.
///
/// A first line of exactly two integers `n d` is read as a header when the
/// next row has `d + 1` tokens; for `d == 1` the row count must also equal
/// `n`, since a one-dimensional row looks the same as a header.
pub fn parse_embeddings(text: &str, expected_nodes: Option<usize>) -> Result<EmbeddingTable, EmbedError> {
    let rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, split_tokens(l)))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    if rows.is_empty() {
        return Err(EmbedError::Empty);
    }

    let mut data = &rows[..];
    if let [first, rest @ ..] = &rows[..] {
        let t = &first.1;
        if t.len() == 2 && is_integer(t[0]) && is_integer(t[1]) {
            let n: usize = t[0].parse().unwrap_or(0);
            let d: usize = t[1].parse().unwrap_or(0);
            let next_fits = rest.first().is_some_and(|r| r.1.len() == d + 1);
            if d >= 1 && next_fits && (d > 1 || rest.len() == n) {
                data = rest;
            }
        }
    }
    if data.is_empty() {
        return Err(EmbedError::Empty);
    }

    let dim = data[0].1.len() - 1;
    let mut vectors = BTreeMap::new();
    for (line, tokens) in data {
        if tokens.len() != dim + 1 || dim == 0 {
            return Err(EmbedError::Dimension {
                line: *line,
                expected: dim,
                found: tokens.len() - 1,
            });
        }
        let node: NodeId = tokens[0].parse().map_err(|_| EmbedError::NotNumeric {
            line: *line,
            token: tokens[0].to_string(),
        })?;
        let mut values = Vec::with_capacity(dim);
        for tok in &tokens[1..] {
            let x: f64 = tok.parse().map_err(|_| EmbedError::NotNumeric {
                line: *line,
                token: tok.to_string(),
            })?;
            if !x.is_finite() {
                return Err(EmbedError::NonFinite {
                    line: *line,
                    token: tok.to_string(),
                });
            }
            values.push(x);
        }
        if vectors.insert(node, values).is_some() {
            return Err(EmbedError::Duplicate { line: *line, node });
        }
    }

    if let Some(n) = expected_nodes {
        let missing: Vec<NodeId> = (0..n).filter(|u| !vectors.contains_key(u)).collect();
        if !missing.is_empty() {
            return Err(EmbedError::Missing {
                count: missing.len(),
                examples: missing.into_iter().take(10).collect(),
            });
        }
    }
    Ok(EmbeddingTable { dim, vectors })
}

/// One feature row per pair, `d` columns, combining the two endpoint
/// vectors elementwise with `op`.
pub fn edge_features(table: &EmbeddingTable, pairs: &[Pair], op: EdgeOperator) -> Result<DMatrix<f64>, EmbedError> {
    let d = table.dim();
    let mut out = DMatrix::<f64>::zeros(pairs.len(), d);
    for (row, &(u, v)) in pairs.iter().enumerate() {
        let lookup = |node| {
            table
                .get(node)
                .ok_or(EmbedError::MissingPairNode { node, pair: (u, v) })
        };
        let (x, y) = (lookup(u)?, lookup(v)?);
        for k in 0..d {
            out[(row, k)] = op.apply(x[k], y[k]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(rows: &[(NodeId, &[f64])]) -> EmbeddingTable {
        EmbeddingTable::from_rows(rows.iter().map(|(n, v)| (*n, v.to_vec())))
    }

    #[test]
    fn parses_plain_rows() {
        let t = parse_embeddings("0 1.0 2.0\n1 3.0 4.0", None).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(1), Some(&[3.0, 4.0][..]));
    }

    #[test]
    fn header_is_skipped() {
        let plain = parse_embeddings("0 1.0 2.0\n1 3.0 4.0", None).unwrap();
        let with_header = parse_embeddings("2 2\n0 1.0 2.0\n1 3.0 4.0", None).unwrap();
        assert_eq!(plain, with_header);
        let csv = parse_embeddings("2,2\n0,1.0,2.0\n1,3.0,4.0\n", Some(2)).unwrap();
        assert_eq!(plain, csv);
    }

    #[test]
    fn one_dimensional_header_needs_row_count() {
        // "2 1" is a header: two rows follow, each with one value
        let t = parse_embeddings("2 1\n0 0.5\n1 0.25", None).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 1));
        // "5 1" cannot be a header for two rows, so it is node 5
        let t = parse_embeddings("5 1\n0 0.5\n1 0.25", None).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get(5), Some(&[1.0][..]));
    }

    #[test]
    fn rejects_bad_files() {
        let err = parse_embeddings("0 1.0\n1 2.0 3.0", None).unwrap_err();
        assert!(
            matches!(
                err,
                EmbedError::Dimension {
                    line: 2,
                    expected: 1,
                    found: 2
                }
            ),
            "{err}"
        );
        let err = parse_embeddings("0 1.0 x", None).unwrap_err();
        assert!(matches!(err, EmbedError::NotNumeric { line: 1, .. }));
        let err = parse_embeddings("0 1.0\n0 2.0", None).unwrap_err();
        assert!(matches!(err, EmbedError::Duplicate { line: 2, node: 0 }));
        let err = parse_embeddings("0 NaN", None).unwrap_err();
        assert!(matches!(err, EmbedError::NonFinite { .. }));
        assert!(matches!(parse_embeddings("\n\n", None), Err(EmbedError::Empty)));
        assert!(matches!(
            parse_embeddings("0\n1", None),
            Err(EmbedError::Dimension { .. })
        ));
    }

    #[test]
    fn missing_nodes_are_listed() {
        let text: String = (0..30).filter(|i| i % 2 == 0).map(|i| format!("{i} 1.0\n")).collect();
        match parse_embeddings(&text, Some(30)).unwrap_err() {
            EmbedError::Missing { count, examples } => {
                assert_eq!(count, 15);
                assert_eq!(examples, vec![1, 3, 5, 7, 9, 11, 13, 15, 17, 19]);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn operator_values() {
        let t = table(&[(0, &[1.0, 2.0]), (1, &[3.0, 4.0])]);
        let expect = [
            (EdgeOperator::Average, [2.0, 3.0]),
            (EdgeOperator::Hadamard, [3.0, 8.0]),
            (EdgeOperator::WeightedL1, [2.0, 2.0]),
            (EdgeOperator::WeightedL2, [4.0, 4.0]),
        ];
        for (op, row) in expect {
            let f = edge_features(&t, &[(0, 1)], op).unwrap();
            assert_eq!(f.row(0).iter().copied().collect::<Vec<_>>(), row, "{op}");
        }
        for op in [EdgeOperator::WeightedL1, EdgeOperator::WeightedL2] {
            let f = edge_features(&t, &[(1, 1)], op).unwrap();
            assert!(f.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn missing_pair_node_is_named() {
        let t = table(&[(0, &[1.0])]);
        let err = edge_features(&t, &[(0, 0), (0, 4)], EdgeOperator::Average).unwrap_err();
        assert!(matches!(err, EmbedError::MissingPairNode { node: 4, pair: (0, 4) }));
    }

    #[test]
    fn operators_match_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 7;
        let t = EmbeddingTable::from_rows((0..20).map(|u| (u, (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())));
        let pairs: Vec<Pair> = (0..50).map(|_| (rng.gen_range(0..20), rng.gen_range(0..20))).collect();
        for op in EdgeOperator::ALL {
            let f = edge_features(&t, &pairs, op).unwrap();
            assert_eq!(f.shape(), (pairs.len(), d));
            for (i, &(u, v)) in pairs.iter().enumerate() {
                let (x, y) = (t.get(u).unwrap(), t.get(v).unwrap());
                for k in 0..d {
                    let expected = match op {
                        EdgeOperator::Average => 0.5 * x[k] + 0.5 * y[k],
                        EdgeOperator::Hadamard => x[k] * y[k],
                        EdgeOperator::WeightedL1 => (x[k] - y[k]).abs(),
                        EdgeOperator::WeightedL2 => (x[k] - y[k]).powi(2),
                    };
                    assert!((f[(i, k)] - expected).abs() <= 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn operators_are_symmetric(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            for op in EdgeOperator::ALL {
                prop_assert_eq!(op.apply(x, y), op.apply(y, x));
            }
            let l1 = EdgeOperator::WeightedL1.apply(x, y);
            prop_assert_eq!(EdgeOperator::WeightedL2.apply(x, y), l1 * l1);
        }
    }
}
