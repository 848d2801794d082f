//! Simple directed/undirected graphs over integer node ids.
//!
//! A [`Graph`] keeps its edges as a sorted, deduplicated list together with
//! sorted adjacency lists. Undirected edges are stored once as `(min, max)`.
//! Node ids live in `[0, id_bound)`; an id is *present* if it was seen in an
//! edge or explicitly added. Preprocessing can drop nodes without renumbering,
//! so presence is tracked separately from the id range.

mod io;
mod preprocess;

pub use io::{load_edgelist, parse_edgelist, save_edgelist, write_edgelist, Delimiter};
pub use preprocess::{
    compute_stats, main_component, prune_by_degree, prune_by_degree_with, relabel_contiguous, remove_self_loops,
    DegreeKind, GraphStats,
};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub type NodeId = usize;
pub type Pair = (NodeId, NodeId);

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: negative node id {id}")]
    NegativeId { line: usize, id: i64 },
    #[error("node {node} out of range (id bound {bound})")]
    NodeOutOfRange { node: NodeId, bound: usize },
}

/// Which side of a directed node's neighborhood to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    All,
}

#[derive(Debug, Clone)]
pub struct Graph {
    directed: bool,
    present: Vec<bool>,
    node_count: usize,
    edges: Vec<Pair>,
    out_adj: Vec<Vec<NodeId>>,
    // Empty for undirected graphs; `out_adj` then holds the symmetric lists.
    in_adj: Vec<Vec<NodeId>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed && self.edges == other.edges && self.nodes().eq(other.nodes())
    }
}

impl Eq for Graph {}

/// Canonical storage form of a pair: `(min, max)` for undirected graphs.
#[inline]
pub fn canonical(directed: bool, u: NodeId, v: NodeId) -> Pair {
    if directed || u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph from an edge list; only edge endpoints are present.
    pub fn from_edges<I>(directed: bool, edges: I) -> Graph
    where
        I: IntoIterator<Item = Pair>,
    {
        Self::build(directed, Vec::new(), edges)
    }

    /// Builds a graph where every id in `0..n` is present.
    pub fn with_nodes<I>(n: usize, directed: bool, edges: I) -> Graph
    where
        I: IntoIterator<Item = Pair>,
    {
        Self::build(directed, vec![true; n], edges)
    }

    /// Builds a graph with an explicit presence mask. Edge endpoints are
    /// always marked present and the mask grows as needed.
    pub fn with_presence<I>(directed: bool, present: Vec<bool>, edges: I) -> Graph
    where
        I: IntoIterator<Item = Pair>,
    {
        Self::build(directed, present, edges)
    }

    fn build<I>(directed: bool, mut present: Vec<bool>, edges: I) -> Graph
    where
        I: IntoIterator<Item = Pair>,
    {
        let mut list: Vec<Pair> = edges.into_iter().map(|(u, v)| canonical(directed, u, v)).collect();
        list.sort_unstable();
        list.dedup();

        let bound = list
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0)
            .max(present.len());
        present.resize(bound, false);
        for &(u, v) in &list {
            present[u] = true;
            present[v] = true;
        }

        let mut out_adj = vec![Vec::new(); bound];
        let mut in_adj = if directed { vec![Vec::new(); bound] } else { Vec::new() };
        for &(u, v) in &list {
            out_adj[u].push(v);
            if directed {
                in_adj[v].push(u);
            } else if u != v {
                out_adj[v].push(u);
            }
        }
        for adj in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            adj.sort_unstable();
        }

        let node_count = present.iter().filter(|&&p| p).count();
        Graph {
            directed,
            present,
            node_count,
            edges: list,
            out_adj,
            in_adj,
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// One past the largest id the graph can refer to.
    pub fn id_bound(&self) -> usize {
        self.present.len()
    }

    /// Number of present nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical sorted order.
    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn is_present(&self, u: NodeId) -> bool {
        self.present.get(u).copied().unwrap_or(false)
    }

    pub fn presence(&self) -> &[bool] {
        &self.present
    }

    /// Present node ids in increasing order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.present.iter().enumerate().filter_map(|(i, &p)| p.then_some(i))
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        if u >= self.id_bound() || v >= self.id_bound() {
            return false;
        }
        self.out_adj[u].binary_search(&v).is_ok()
    }

    /// Sorted successor list (the symmetric neighbor list when undirected).
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u]
    }

    /// Sorted predecessor list (the symmetric neighbor list when undirected).
    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        if self.directed {
            &self.in_adj[u]
        } else {
            &self.out_adj[u]
        }
    }

    /// In + out degree for directed graphs, neighbor count otherwise.
    pub fn degree(&self, u: NodeId) -> usize {
        if self.directed {
            self.out_adj[u].len() + self.in_adj[u].len()
        } else {
            self.out_adj[u].len()
        }
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    /// Same node set and direction, with a different edge set.
    pub fn with_edge_set<I>(&self, edges: I) -> Graph
    where
        I: IntoIterator<Item = Pair>,
    {
        Graph::with_presence(self.directed, self.present.clone(), edges)
    }

    /// Reverses every edge. Undirected graphs are returned unchanged.
    pub fn transpose(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        self.with_edge_set(self.edges.iter().map(|&(u, v)| (v, u)))
    }

    /// Weakly connected components over present nodes, each sorted, listed
    /// in order of their smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.id_bound()];
        let mut queue = VecDeque::new();
        let mut out = Vec::new();
        for start in self.nodes() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                let ins = if self.directed { &self.in_adj[u][..] } else { &[][..] };
                for &w in self.out_adj[u].iter().chain(ins) {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.node_count > 0 && self.components().len() == 1
    }

    /// Stable content hash: direction flag, present nodes and sorted edges.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update([self.directed as u8]);
        for u in self.nodes() {
            hasher.update((u as u64).to_le_bytes());
        }
        hasher.update(b"|");
        for &(u, v) in &self.edges {
            hasher.update((u as u64).to_le_bytes());
            hasher.update((v as u64).to_le_bytes());
        }
        hex16(&hasher.finalize())
    }
}

pub(crate) fn hex16(digest: &[u8]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Neighbor set of `u` under `mode`, sorted. Undirected graphs return the
/// same set for every mode.
pub fn neighbors(g: &Graph, u: NodeId, mode: Direction) -> Result<Vec<NodeId>, GraphError> {
    if u >= g.id_bound() {
        return Err(GraphError::NodeOutOfRange {
            node: u,
            bound: g.id_bound(),
        });
    }
    Ok(match mode {
        Direction::Out => g.out_neighbors(u).to_vec(),
        Direction::In => g.in_neighbors(u).to_vec(),
        Direction::All => {
            let mut all: Vec<NodeId> = g.out_neighbors(u).iter().chain(g.in_neighbors(u)).copied().collect();
            all.sort_unstable();
            all.dedup();
            all
        }
    })
}

/// Serializable view used by split persistence and reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub directed: bool,
    pub nodes: usize,
    pub edges: usize,
    pub checksum: String,
}

impl From<&Graph> for GraphSummary {
    fn from(g: &Graph) -> Self {
        GraphSummary {
            directed: g.is_directed(),
            nodes: g.node_count(),
            edges: g.edge_count(),
            checksum: g.checksum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn undirected_edges_are_canonical() {
        let g = Graph::from_edges(false, [(1, 0), (0, 1), (2, 1)]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.out_neighbors(1), &[0, 2]);
        assert_eq!(g.in_neighbors(1), &[0, 2]);
    }

    #[test]
    fn directed_neighbors() {
        let g = Graph::from_edges(true, [(0, 1), (2, 1)]);
        assert_eq!(neighbors(&g, 1, Direction::In).unwrap(), vec![0, 2]);
        assert!(neighbors(&g, 1, Direction::Out).unwrap().is_empty());
        assert_eq!(neighbors(&g, 1, Direction::All).unwrap(), vec![0, 2]);
    }

    #[test]
    fn undirected_triangle_neighbors() {
        let g = generators::complete(3);
        for mode in [Direction::In, Direction::Out, Direction::All] {
            assert_eq!(neighbors(&g, 0, mode).unwrap(), vec![1, 2]);
        }
    }

    #[test]
    fn neighbors_rejects_out_of_range() {
        let g = generators::complete(3);
        assert!(matches!(
            neighbors(&g, 3, Direction::All),
            Err(GraphError::NodeOutOfRange { node: 3, .. })
        ));
    }

    #[test]
    fn directed_in_out_match_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = generators::erdos_renyi(30, 0.1, true, rng.gen());
            let t = g.transpose();
            for u in 0..g.id_bound() {
                let ins = neighbors(&g, u, Direction::In).unwrap();
                let outs = neighbors(&g, u, Direction::Out).unwrap();
                // predecessors in g are successors in the transpose
                let oracle_in: Vec<_> = (0..g.id_bound()).filter(|&w| t.has_edge(u, w)).collect();
                let oracle_out: Vec<_> = (0..g.id_bound()).filter(|&w| g.has_edge(u, w)).collect();
                assert_eq!(ins, oracle_in);
                assert_eq!(outs, oracle_out);
            }
        }
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (any::<bool>(), prop::collection::vec((0usize..25, 0usize..25), 0..80))
            .prop_map(|(directed, edges)| Graph::from_edges(directed, edges))
    }

    proptest! {
        #[test]
        fn all_is_union_of_in_and_out(g in arb_graph()) {
            for u in 0..g.id_bound() {
                let mut union = neighbors(&g, u, Direction::In).unwrap();
                union.extend(neighbors(&g, u, Direction::Out).unwrap());
                union.sort_unstable();
                union.dedup();
                prop_assert_eq!(neighbors(&g, u, Direction::All).unwrap(), union);
            }
        }

        #[test]
        fn adjacency_round_trips_edges(g in arb_graph()) {
            let mut rebuilt = Vec::new();
            for u in 0..g.id_bound() {
                for &v in g.out_neighbors(u) {
                    if g.is_directed() || u <= v {
                        rebuilt.push((u, v));
                    }
                }
            }
            rebuilt.sort_unstable();
            prop_assert_eq!(rebuilt, g.edges().to_vec());
        }
    }
}
