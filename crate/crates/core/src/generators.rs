//! Small random and deterministic graph families used by tests, the
//! acceptance suite and the example data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

pub fn complete(n: usize) -> Graph {
    Graph::with_nodes(n, false, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

pub fn path(n: usize) -> Graph {
    Graph::with_nodes(n, false, (1..n).map(|v| (v - 1, v)))
}

/// Node 0 joined to nodes `1..n`.
pub fn star(n: usize) -> Graph {
    Graph::with_nodes(n, false, (1..n).map(|v| (0, v)))
}

/// `rows × cols` lattice, node `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::with_nodes(rows * cols, false, edges)
}

/// G(n, p); every ordered pair when directed, every unordered pair otherwise.
pub fn erdos_renyi(n: usize, p: f64, directed: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let start = if directed { 0 } else { u + 1 };
        for v in start..n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::with_nodes(n, directed, edges)
}

/// Preferential attachment: a clique on `attach + 1` nodes, then each new
/// node links to `attach` distinct existing nodes chosen proportionally to
/// degree. Mean degree tends to `2 * attach`.
pub fn barabasi_albert(n: usize, attach: usize, seed: u64) -> Graph {
    assert!(attach >= 1, "attach must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = (attach + 1).min(n);
    let mut edges = Vec::new();
    // every edge endpoint, so uniform picks are degree-proportional
    let mut endpoints = Vec::new();
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(attach);
    for v in core..n {
        targets.clear();
        while targets.len() < attach {
            let t = *endpoints.choose(&mut rng).expect("non-empty core");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Graph::with_nodes(n, false, edges)
}
