//! Train/test edge splits whose training network stays connected and spans
//! every node, plus train/test non-edge sampling.
//!
//! [`fast_connected_split`] shuffles the edges, keeps the edges a union-find
//! pass uses to join components (a random spanning tree, direction ignored)
//! and draws the test edges from the remaining ones, so the cost is
//! `O(m α(n))`. [`naive_connected_split`] is the remove-and-recheck loop it
//! replaces and is kept for comparison.

mod nonedges;
mod persist;
mod union_find;
mod validate;

pub use nonedges::{add_non_edges, sample_non_edges, sample_pairs_excluding};
pub use persist::{read_split, write_split};
pub use validate::{validate_split, Check, SplitReport};

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{hex16, Graph, GraphSummary, Pair};
use crate::seed::{derive_seed, rng};
use union_find::UnionFind;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("train_fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("graph needs at least 2 nodes, has {0}")]
    TooSmall(usize),
    #[error("graph has {0} connected components; restrict it to its main component first")]
    Disconnected(usize),
    #[error(
        "cannot remove {requested} test edges and stay connected: at most {max} edges \
         are removable (maximum feasible test fraction {max_fraction:.6})"
    )]
    Infeasible {
        requested: usize,
        max: usize,
        max_fraction: f64,
    },
    #[error("requested {requested} non-edges but only {available} are available")]
    NonEdgesInfeasible { requested: usize, available: usize },
    #[error("split I/O: {0}")]
    Io(String),
}

/// Which edges a train non-edge must avoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum World {
    /// Avoid train edges only.
    Open,
    /// Avoid train and test edges.
    #[default]
    Closed,
}

impl FromStr for World {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" | "openworld" | "open_world" => Ok(World::Open),
            "closed" | "closedworld" | "closed_world" => Ok(World::Closed),
            other => Err(format!("unknown world assumption '{other}' (open, closed)")),
        }
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            World::Open => "open",
            World::Closed => "closed",
        })
    }
}

/// Size of a non-edge set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonEdgeCount {
    /// Same size as the matching edge set.
    #[default]
    Auto,
    Absolute(usize),
    /// Multiple of the matching edge set size, rounded to nearest.
    Ratio(f64),
}

impl NonEdgeCount {
    pub fn resolve(self, edge_set_size: usize) -> usize {
        match self {
            NonEdgeCount::Auto => edge_set_size,
            NonEdgeCount::Absolute(k) => k,
            NonEdgeCount::Ratio(r) => (r * edge_set_size as f64).round() as usize,
        }
    }
}

impl FromStr for NonEdgeCount {
    type Err = String;

    /// `auto`, an integer count, or a ratio written as `<float>x`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "auto" {
            return Ok(NonEdgeCount::Auto);
        }
        if let Some(r) = s.strip_suffix('x') {
            let r: f64 = r.trim().parse().map_err(|_| format!("bad non-edge ratio '{s}'"))?;
            if !(r.is_finite() && r >= 0.0) {
                return Err(format!("non-edge ratio must be >= 0, got {r}"));
            }
            return Ok(NonEdgeCount::Ratio(r));
        }
        s.parse::<usize>()
            .map(NonEdgeCount::Absolute)
            .map_err(|_| format!("expected 'auto', a count or '<ratio>x', got '{s}'"))
    }
}

impl fmt::Display for NonEdgeCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonEdgeCount::Auto => f.write_str("auto"),
            NonEdgeCount::Absolute(k) => write!(f, "{k}"),
            NonEdgeCount::Ratio(r) => write!(f, "{r}x"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub train_nonedges: NonEdgeCount,
    pub test_nonedges: NonEdgeCount,
    pub world: World,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            train_nonedges: NonEdgeCount::Auto,
            test_nonedges: NonEdgeCount::Auto,
            world: World::Closed,
            seed,
        }
    }

    pub fn with_world(mut self, world: World) -> Self {
        self.world = world;
        self
    }

    fn check(&self) -> Result<(), SplitError> {
        let f = self.train_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(SplitError::InvalidFraction(f));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitAlgorithm {
    #[default]
    Fast,
    Naive,
}

impl FromStr for SplitAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(SplitAlgorithm::Fast),
            "naive" => Ok(SplitAlgorithm::Naive),
            other => Err(format!("unknown split algorithm '{other}' (fast, naive)")),
        }
    }
}

impl fmt::Display for SplitAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitAlgorithm::Fast => "fast",
            SplitAlgorithm::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub train_edges: Vec<Pair>,
    pub test_edges: Vec<Pair>,
    pub train_nonedges: Vec<Pair>,
    pub test_nonedges: Vec<Pair>,
    pub spec: SplitSpec,
    pub graph: GraphSummary,
}

impl EdgeSplit {
    /// Training network: the source node set with train edges only.
    pub fn train_graph(&self, source: &Graph) -> Graph {
        source.with_edge_set(self.train_edges.iter().copied())
    }

    /// Hash of the four pair lists, in order.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for set in [
            &self.train_edges,
            &self.test_edges,
            &self.train_nonedges,
            &self.test_nonedges,
        ] {
            h.update((set.len() as u64).to_le_bytes());
            for &(u, v) in set {
                h.update((u as u64).to_le_bytes());
                h.update((v as u64).to_le_bytes());
            }
        }
        hex16(&h.finalize())
    }
}

/// Number of test edges for `m` edges: `ceil(m * (1 - train_fraction))`.
///
/// The product is nudged down by a relative 1e-9 first, so fractions like
/// 2/3 that are not exact in binary do not round up an extra edge.
pub fn test_edge_count(m: usize, train_fraction: f64) -> usize {
    let x = m as f64 * (1.0 - train_fraction);
    (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize
}

fn precheck(g: &Graph, spec: &SplitSpec) -> Result<usize, SplitError> {
    spec.check()?;
    let n = g.node_count();
    if n < 2 {
        return Err(SplitError::TooSmall(n));
    }
    let comps = g.components().len();
    if comps != 1 {
        return Err(SplitError::Disconnected(comps));
    }
    Ok(test_edge_count(g.edge_count(), spec.train_fraction))
}

fn infeasible(g: &Graph, requested: usize) -> SplitError {
    let m = g.edge_count();
    let max = m + 1 - g.node_count();
    SplitError::Infeasible {
        requested,
        max,
        max_fraction: if m == 0 { 0.0 } else { max as f64 / m as f64 },
    }
}

fn assemble(g: &Graph, spec: &SplitSpec, is_test: &[bool]) -> EdgeSplit {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (&e, &t) in g.edges().iter().zip(is_test) {
        if t {
            test.push(e);
        } else {
            train.push(e);
        }
    }
    EdgeSplit {
        train_edges: train,
        test_edges: test,
        train_nonedges: Vec::new(),
        test_nonedges: Vec::new(),
        spec: spec.clone(),
        graph: GraphSummary::from(g),
    }
}

/// Spanning-tree based split; non-edge sets are left empty.
///
/// The input must be (weakly) connected with at least two nodes.
pub fn fast_connected_split(g: &Graph, spec: &SplitSpec) -> Result<EdgeSplit, SplitError> {
    let wanted = precheck(g, spec)?;
    let mut rng = rng(derive_seed(spec.seed, "split/edges"));
    let edges = g.edges();

    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(&mut rng);

    let mut uf = UnionFind::new(g.id_bound());
    let mut removable: Vec<usize> = order
        .into_iter()
        .filter(|&i| {
            let (u, v) = edges[i];
            !uf.union(u, v)
        })
        .collect();
    if wanted > removable.len() {
        return Err(infeasible(g, wanted));
    }
    removable.shuffle(&mut rng);

    let mut is_test = vec![false; edges.len()];
    for &i in &removable[..wanted] {
        is_test[i] = true;
    }
    Ok(assemble(g, spec, &is_test))
}

/// Tries edges in random order, removing each one whose removal keeps the
/// training network connected, until the test set is full.
pub fn naive_connected_split(g: &Graph, spec: &SplitSpec) -> Result<EdgeSplit, SplitError> {
    let wanted = precheck(g, spec)?;
    let mut rng = rng(derive_seed(spec.seed, "split/edges"));
    let edges = g.edges();

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.id_bound()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, i));
        if u != v {
            adj[v].push((u, i));
        }
    }

    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(&mut rng);

    let mut removed = vec![false; edges.len()];
    let mut search = Reachability::new(g.id_bound());
    let mut taken = 0;
    for i in order {
        if taken == wanted {
            break;
        }
        let (u, v) = edges[i];
        removed[i] = true;
        // the graph stays connected iff the endpoints are still joined
        if u == v || search.connected(&adj, &removed, u, v) {
            taken += 1;
        } else {
            removed[i] = false;
        }
    }
    if taken < wanted {
        return Err(infeasible(g, wanted));
    }
    Ok(assemble(g, spec, &removed))
}

/// BFS with a generation-stamped visited array so repeated queries do not
/// reallocate.
struct Reachability {
    stamp: Vec<u32>,
    generation: u32,
    queue: VecDeque<usize>,
}

impl Reachability {
    fn new(n: usize) -> Self {
        Reachability {
            stamp: vec![0; n],
            generation: 0,
            queue: VecDeque::new(),
        }
    }

    fn connected(&mut self, adj: &[Vec<(usize, usize)>], removed: &[bool], from: usize, to: usize) -> bool {
        self.generation += 1;
        let gen = self.generation;
        self.queue.clear();
        self.stamp[from] = gen;
        self.queue.push_back(from);
        while let Some(u) = self.queue.pop_front() {
            for &(w, e) in &adj[u] {
                if removed[e] || self.stamp[w] == gen {
                    continue;
                }
                if w == to {
                    return true;
                }
                self.stamp[w] = gen;
                self.queue.push_back(w);
            }
        }
        false
    }
}

/// Connected split followed by train/test non-edge sampling.
pub fn split_graph(g: &Graph, spec: &SplitSpec, algorithm: SplitAlgorithm) -> Result<EdgeSplit, SplitError> {
    let split = match algorithm {
        SplitAlgorithm::Fast => fast_connected_split(g, spec)?,
        SplitAlgorithm::Naive => naive_connected_split(g, spec)?,
    };
    add_non_edges(g, split)
}
