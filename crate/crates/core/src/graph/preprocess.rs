use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};

pub fn remove_self_loops(g: &Graph) -> Graph {
    g.with_edge_set(g.edges().iter().copied().filter(|(u, v)| u != v))
}

/// Degree used when pruning directed graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeKind {
    #[default]
    Total,
    In,
    Out,
}

/// Repeatedly removes nodes whose total degree is below `min_degree` until
/// none remain. Ids are not renumbered.
pub fn prune_by_degree(g: &Graph, min_degree: usize) -> Graph {
    prune_by_degree_with(g, min_degree, DegreeKind::Total)
}

pub fn prune_by_degree_with(g: &Graph, min_degree: usize, kind: DegreeKind) -> Graph {
    if min_degree == 0 {
        return g.clone();
    }
    let bound = g.id_bound();
    let directed = g.is_directed();
    let mut out_deg: Vec<usize> = (0..bound).map(|u| g.out_neighbors(u).len()).collect();
    let mut in_deg: Vec<usize> = (0..bound)
        .map(|u| if directed { g.in_neighbors(u).len() } else { 0 })
        .collect();
    let degree = |u: usize, out_deg: &[usize], in_deg: &[usize]| match (directed, kind) {
        (false, _) | (true, DegreeKind::Total) => out_deg[u] + in_deg[u],
        (true, DegreeKind::In) => in_deg[u],
        (true, DegreeKind::Out) => out_deg[u],
    };

    let mut alive: Vec<bool> = g.presence().to_vec();
    let mut queue: VecDeque<NodeId> = g
        .nodes()
        .filter(|&u| degree(u, &out_deg, &in_deg) < min_degree)
        .collect();
    let mut queued = vec![false; bound];
    for &u in &queue {
        queued[u] = true;
    }

    while let Some(u) = queue.pop_front() {
        alive[u] = false;
        let mut touched = Vec::new();
        for &w in g.out_neighbors(u) {
            if alive[w] && w != u {
                if directed {
                    in_deg[w] -= 1;
                } else {
                    out_deg[w] -= 1;
                }
                touched.push(w);
            }
        }
        if directed {
            for &w in g.in_neighbors(u) {
                if alive[w] && w != u {
                    out_deg[w] -= 1;
                    touched.push(w);
                }
            }
        }
        for w in touched {
            if !queued[w] && degree(w, &out_deg, &in_deg) < min_degree {
                queued[w] = true;
                queue.push_back(w);
            }
        }
    }

    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| alive[u] && alive[v])
        .collect::<Vec<_>>();
    Graph::with_presence(directed, alive, edges)
}

/// Renumbers present nodes to `0..k`, preserving the order of old ids.
pub fn relabel_contiguous(g: &Graph) -> (Graph, BTreeMap<NodeId, NodeId>) {
    let mapping: BTreeMap<NodeId, NodeId> = g.nodes().enumerate().map(|(new, old)| (old, new)).collect();
    let edges = g.edges().iter().map(|(u, v)| (mapping[u], mapping[v]));
    (Graph::with_nodes(mapping.len(), g.is_directed(), edges), mapping)
}

/// Subgraph induced by the largest (weakly) connected component. Ties go to
/// the component containing the smallest id.
pub fn main_component(g: &Graph) -> Graph {
    let comps = g.components();
    // components() lists components by smallest member, so the first maximum wins
    let Some(best) = comps
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(_, c)| c)
    else {
        return g.clone();
    };
    let mut keep = vec![false; g.id_bound()];
    for &u in best {
        keep[u] = true;
    }
    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| keep[u] && keep[v])
        .collect::<Vec<_>>();
    Graph::with_presence(g.is_directed(), keep, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    pub components: usize,
    pub self_loops: usize,
}

pub fn compute_stats(g: &Graph) -> GraphStats {
    let n = g.node_count();
    let m = g.edge_count();
    let density = if n <= 1 {
        0.0
    } else if g.is_directed() {
        m as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        2.0 * m as f64 / (n as f64 * (n as f64 - 1.0))
    };
    let degrees: Vec<usize> = g.nodes().map(|u| g.degree(u)).collect();
    GraphStats {
        n,
        m,
        density,
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        mean_degree: if n == 0 {
            0.0
        } else {
            degrees.iter().sum::<usize>() as f64 / n as f64
        },
        components: g.components().len(),
        self_loops: g.self_loop_count(),
    }
}
