use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeSplit, SplitError, SplitSpec};
use crate::graph::{write_edgelist, Delimiter, GraphSummary, Pair};

pub const TRAIN_EDGES_FILE: &str = "trainE.edgelist";
pub const TEST_EDGES_FILE: &str = "testE.edgelist";
pub const TRAIN_NONEDGES_FILE: &str = "trainNE.edgelist";
pub const TEST_NONEDGES_FILE: &str = "testNE.edgelist";
pub const PROVENANCE_FILE: &str = "split.json";

#[derive(Serialize, Deserialize)]
struct Provenance {
    spec: SplitSpec,
    graph: GraphSummary,
    split_checksum: String,
    sizes: [usize; 4],
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> SplitError {
    SplitError::Io(format!("{}: {e}", path.display()))
}

/// Writes the four pair lists (order preserved) plus a JSON sidecar with the
/// spec, the source graph checksum and the split checksum.
pub fn write_split(split: &EdgeSplit, dir: impl AsRef<Path>) -> Result<(), SplitError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, pairs) in [
        (TRAIN_EDGES_FILE, &split.train_edges),
        (TEST_EDGES_FILE, &split.test_edges),
        (TRAIN_NONEDGES_FILE, &split.train_nonedges),
        (TEST_NONEDGES_FILE, &split.test_nonedges),
    ] {
        let path = dir.join(name);
        write_edgelist(pairs, &path, Delimiter::Space).map_err(|e| io_err(&path, e))?;
    }
    let provenance = Provenance {
        spec: split.spec.clone(),
        graph: split.graph.clone(),
        split_checksum: split.checksum(),
        sizes: [
            split.train_edges.len(),
            split.test_edges.len(),
            split.train_nonedges.len(),
            split.test_nonedges.len(),
        ],
    };
    let path = dir.join(PROVENANCE_FILE);
    let json = serde_json::to_string_pretty(&provenance).map_err(|e| io_err(&path, e))?;
    fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))
}

fn read_pairs(path: &Path) -> Result<Vec<Pair>, SplitError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    // file order matters here, so no Graph round trip
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let parsed = match tokens[..] {
            [u, v] => u.parse().ok().zip(v.parse().ok()),
            _ => None,
        };
        let pair = parsed.ok_or_else(|| io_err(path, format!("line {}: expected two ids", i + 1)))?;
        out.push(pair);
    }
    Ok(out)
}

pub fn read_split(dir: impl AsRef<Path>) -> Result<EdgeSplit, SplitError> {
    let dir = dir.as_ref();
    let path = dir.join(PROVENANCE_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let provenance: Provenance = serde_json::from_str(&text).map_err(|e| io_err(&path, e))?;
    let split = EdgeSplit {
        train_edges: read_pairs(&dir.join(TRAIN_EDGES_FILE))?,
        test_edges: read_pairs(&dir.join(TEST_EDGES_FILE))?,
        train_nonedges: read_pairs(&dir.join(TRAIN_NONEDGES_FILE))?,
        test_nonedges: read_pairs(&dir.join(TEST_NONEDGES_FILE))?,
        spec: provenance.spec,
        graph: provenance.graph,
    };
    if split.checksum() != provenance.split_checksum {
        return Err(SplitError::Io(format!(
            "{}: checksum mismatch, files were modified",
            dir.display()
        )));
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::split::{split_graph, SplitAlgorithm, World};

    #[test]
    fn split_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = generators::barabasi_albert(50, 2, 3);
        let split = split_graph(
            &g,
            &SplitSpec::new(0.75, 8).with_world(World::Open),
            SplitAlgorithm::Fast,
        )
        .unwrap();
        write_split(&split, dir.path()).unwrap();
        assert_eq!(read_split(dir.path()).unwrap(), split);

        // tampering is detected
        fs::write(dir.path().join(TEST_EDGES_FILE), "0 1").unwrap();
        assert!(read_split(dir.path()).is_err());
    }
}
