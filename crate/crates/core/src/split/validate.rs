use std::collections::HashSet;
use std::fmt;

use super::{test_edge_count, EdgeSplit, World};
use crate::graph::{canonical, Graph, NodeId, Pair};

const MAX_EXAMPLES: usize = 10;

/// Outcome of one split invariant, with up to ten counterexamples.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub pairs: Vec<Pair>,
    pub nodes: Vec<NodeId>,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            passed: true,
            pairs: Vec::new(),
            nodes: Vec::new(),
            detail: String::new(),
        }
    }

    fn fail_pair(&mut self, p: Pair) {
        self.passed = false;
        if self.pairs.len() < MAX_EXAMPLES {
            self.pairs.push(p);
        }
    }

    fn fail_node(&mut self, u: NodeId) {
        self.passed = false;
        if self.nodes.len() < MAX_EXAMPLES {
            self.nodes.push(u);
        }
    }

    fn fail(&mut self, detail: String) {
        self.passed = false;
        self.detail = detail;
    }
}

#[derive(Debug, Clone)]
pub struct SplitReport {
    pub checks: Vec<Check>,
}

impl SplitReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for SplitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{}: {}", c.name, if c.passed { "ok" } else { "FAILED" })?;
            if !c.detail.is_empty() {
                write!(f, " ({})", c.detail)?;
            }
            if !c.pairs.is_empty() {
                write!(f, " pairs {:?}", c.pairs)?;
            }
            if !c.nodes.is_empty() {
                write!(f, " nodes {:?}", c.nodes)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks every split invariant against the source graph. Failures are
/// reported, never raised.
pub fn validate_split(g: &Graph, split: &EdgeSplit) -> SplitReport {
    let directed = g.is_directed();
    let edges: HashSet<Pair> = g.edges().iter().copied().collect();
    let train: HashSet<Pair> = split.train_edges.iter().copied().collect();
    let test: HashSet<Pair> = split.test_edges.iter().copied().collect();
    let train_ne: HashSet<Pair> = split.train_nonedges.iter().copied().collect();

    let mut partition = Check::new("partition");
    for set in [&split.train_edges, &split.test_edges] {
        let mut seen = HashSet::new();
        for &e in set.iter() {
            if !edges.contains(&e) {
                partition.fail_pair(e);
            }
            if !seen.insert(e) {
                partition.fail_pair(e);
            }
        }
    }
    for e in split.train_edges.iter().filter(|e| test.contains(e)) {
        partition.fail_pair(*e);
    }
    for &e in g.edges() {
        if !train.contains(&e) && !test.contains(&e) {
            partition.fail_pair(e);
        }
    }

    let mut spanning = Check::new("spanning_connected");
    let train_graph = g.with_edge_set(split.train_edges.iter().copied().filter(|e| edges.contains(e)));
    let comps = train_graph.components();
    if comps.len() != 1 {
        spanning.fail(format!("training network has {} components", comps.len()));
        for comp in comps.iter().skip(1) {
            for &u in comp {
                spanning.fail_node(u);
            }
        }
    }

    let mut size = Check::new("test_size");
    let expected = test_edge_count(g.edge_count(), split.spec.train_fraction);
    if split.test_edges.len() != expected {
        size.fail(format!(
            "expected {expected} test edges, found {}",
            split.test_edges.len()
        ));
    }

    let mut valid = Check::new("nonedge_pairs_valid");
    for set in [&split.train_nonedges, &split.test_nonedges] {
        let mut seen = HashSet::new();
        for &(u, v) in set.iter() {
            let bad = u == v
                || !g.is_present(u)
                || !g.is_present(v)
                || canonical(directed, u, v) != (u, v)
                || !seen.insert((u, v));
            if bad {
                valid.fail_pair((u, v));
            }
        }
    }

    let mut train_vs_train = Check::new("train_nonedges_avoid_train_edges");
    for &p in split.train_nonedges.iter().filter(|p| train.contains(p)) {
        train_vs_train.fail_pair(p);
    }

    let mut closed = Check::new("closed_world");
    if split.spec.world == World::Closed {
        for &p in split.train_nonedges.iter().filter(|p| test.contains(p)) {
            closed.fail_pair(p);
        }
    }

    let mut test_ne = Check::new("test_nonedges_avoid_edges");
    for &p in split.test_nonedges.iter().filter(|p| edges.contains(p)) {
        test_ne.fail_pair(p);
    }

    let mut disjoint = Check::new("nonedge_sets_disjoint");
    for &p in split.test_nonedges.iter().filter(|p| train_ne.contains(p)) {
        disjoint.fail_pair(p);
    }

    SplitReport {
        checks: vec![
            partition,
            spanning,
            size,
            valid,
            train_vs_train,
            closed,
            test_ne,
            disjoint,
        ],
    }
}
