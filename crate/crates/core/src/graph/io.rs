use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    /// Detect tab, comma or whitespace from the first data line.
    #[default]
    Auto,
    Space,
    Tab,
    Comma,
}

impl Delimiter {
    fn detect(line: &str) -> Delimiter {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Space
        }
    }

    fn as_char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
            Delimiter::Space | Delimiter::Auto => ' ',
        }
    }

    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Space | Delimiter::Auto => line.split_whitespace().collect(),
            d => line.split(d.as_char()).map(str::trim).collect(),
        }
    }
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" | "" => Ok(Delimiter::Auto),
            "space" | " " => Ok(Delimiter::Space),
            "tab" | "\\t" => Ok(Delimiter::Tab),
            "comma" | "," => Ok(Delimiter::Comma),
            other => Err(format!("unknown delimiter '{other}' (auto, space, tab, comma)")),
        }
    }
}

impl std::fmt::Display for Delimiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Delimiter::Auto => "auto",
            Delimiter::Space => "space",
            Delimiter::Tab => "tab",
            Delimiter::Comma => "comma",
        })
    }
}

pub fn load_edgelist(path: impl AsRef<Path>, directed: bool, delimiter: Delimiter) -> Result<Graph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edgelist(&text, directed, delimiter)
}

/// Parses edgelist text. Lines starting with `#` or `%` are comments; a third
/// numeric column (a weight) is accepted and ignored.
pub fn parse_edgelist(text: &str, directed: bool, delimiter: Delimiter) -> Result<Graph, GraphError> {
    let mut delimiter = delimiter;
    let mut pairs: Vec<Pair> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        if delimiter == Delimiter::Auto {
            delimiter = Delimiter::detect(line);
        }
        let tokens = delimiter.split(line);
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(GraphError::Malformed {
                line: line_no,
                message: format!("expected 2 or 3 tokens, found {}", tokens.len()),
            });
        }
        let u = parse_id(tokens[0], line_no)?;
        let v = parse_id(tokens[1], line_no)?;
        if let Some(w) = tokens.get(2) {
            w.parse::<f64>().map_err(|_| GraphError::Malformed {
                line: line_no,
                message: format!("weight token '{w}' is not numeric"),
            })?;
        }
        pairs.push((u, v));
    }

    let read = pairs.len();
    let g = Graph::from_edges(directed, pairs);
    if read > g.edge_count() {
        log::info!("collapsed {} duplicate edge lines", read - g.edge_count());
    }
    let loops = g.self_loop_count();
    if loops > 0 {
        log::info!("graph contains {loops} self-loops");
    }
    Ok(g)
}

fn parse_id(token: &str, line: usize) -> Result<usize, GraphError> {
    let value: i64 = token.parse().map_err(|_| GraphError::Malformed {
        line,
        message: format!("node id '{token}' is not an integer"),
    })?;
    if value < 0 {
        return Err(GraphError::NegativeId { line, id: value });
    }
    Ok(value as usize)
}

/// Writes one edge per line in sorted order.
pub fn save_edgelist(g: &Graph, path: impl AsRef<Path>, delimiter: Delimiter) -> Result<(), GraphError> {
    write_edgelist(g.edges(), path, delimiter)
}

/// Writes an arbitrary pair list, preserving its order.
pub fn write_edgelist(pairs: &[Pair], path: impl AsRef<Path>, delimiter: Delimiter) -> Result<(), GraphError> {
    let path = path.as_ref();
    let io_err = |source| GraphError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let sep = delimiter.as_char();
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if i > 0 {
            out.write_all(b"\n").map_err(io_err)?;
        }
        write!(out, "{u}{sep}{v}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
