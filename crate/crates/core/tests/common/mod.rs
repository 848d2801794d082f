//! Independent oracles shared by the integration tests and the acceptance
//! run. Nothing here calls into the scoring code it checks.

#![allow(dead_code)]

use std::collections::BTreeSet;

use linkbench_core::graph::Graph;
use rand::Rng;

/// Random simple graph on nodes `0..n`, no self loops.
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, p: f64, directed: bool) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn build(n: usize, directed: bool, edges: &[(usize, usize)]) -> Graph {
    Graph::with_nodes(n, directed, edges.iter().copied())
}

/// Neighbor sets straight from the edge list.
pub struct Sets {
    pub out: Vec<BTreeSet<usize>>,
    pub inc: Vec<BTreeSet<usize>>,
}

impl Sets {
    pub fn new(n: usize, directed: bool, edges: &[(usize, usize)]) -> Sets {
        let mut out = vec![BTreeSet::new(); n];
        let mut inc = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            out[u].insert(v);
            inc[v].insert(u);
            if !directed {
                out[v].insert(u);
                inc[u].insert(v);
            }
        }
        Sets { out, inc }
    }

    pub fn of(&self, mode: &str, u: usize) -> &BTreeSet<usize> {
        if mode == "in" {
            &self.inc[u]
        } else {
            &self.out[u]
        }
    }
}

/// Reference value of a local heuristic on `(u, v)`.
///
/// `mode` is "out", "in" or "undirected"; "succ_pred" pairs out(u) with
/// in(v) and weights shared neighbors by total degree.
pub fn local_oracle(sets: &Sets, name: &str, mode: &str, u: usize, v: usize) -> f64 {
    let (a, b) = if mode == "succ_pred" {
        (&sets.out[u], &sets.inc[v])
    } else {
        (sets.of(mode, u), sets.of(mode, v))
    };
    let common: Vec<usize> = a.intersection(b).copied().collect();
    let weight_degree = |w: usize| -> f64 {
        if mode == "succ_pred" {
            (sets.out[w].len() + sets.inc[w].len()) as f64
        } else {
            sets.of(mode, w).len() as f64
        }
    };
    match name {
        "cn" => common.len() as f64,
        "jaccard" => {
            let union = a.union(b).count();
            if union == 0 {
                0.0
            } else {
                common.len() as f64 / union as f64
            }
        }
        "aa" => common
            .iter()
            .map(|&w| weight_degree(w))
            .filter(|&d| d >= 2.0)
            .map(|d| 1.0 / d.ln())
            .sum(),
        "ra" => common
            .iter()
            .map(|&w| weight_degree(w))
            .filter(|&d| d > 0.0)
            .map(|d| 1.0 / d)
            .sum(),
        "pa" => (a.len() * b.len()) as f64,
        other => panic!("no oracle for {other}"),
    }
}

/// Katz scores from `source` by counting walks one length at a time,
/// stepping along `mode` neighborhoods, summed up to `max_len`.
pub fn katz_walks(sets: &Sets, mode: &str, beta: f64, source: usize, max_len: usize) -> Vec<f64> {
    let n = sets.out.len();
    let mut count = vec![0.0f64; n];
    count[source] = 1.0;
    let mut total = vec![0.0f64; n];
    let mut weight = 1.0;
    for _ in 0..max_len {
        let mut next = vec![0.0f64; n];
        for (x, &c) in count.iter().enumerate() {
            if c != 0.0 {
                for &w in sets.of(mode, x) {
                    next[w] += c;
                }
            }
        }
        count = next;
        weight *= beta;
        for (t, c) in total.iter_mut().zip(&count) {
            *t += weight * c;
        }
    }
    total
}

/// Walk length after which the Katz tail is below `tol` relative to the
/// first term, given `beta * max_degree < 1`.
pub fn katz_converged_length(beta: f64, max_degree: usize, tol: f64) -> usize {
    let r = beta * max_degree as f64;
    if r <= 0.0 {
        return 1;
    }
    ((tol * (1.0 - r)).ln() / r.ln()).ceil().max(1.0) as usize + 1
}

/// AUC by comparing every positive with every negative.
pub fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut total = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            total += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / total
}

/// Random scores on a coarse grid so ties are common, with at least one
/// label of each class.
pub fn tied_sheet<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<bool>) {
    let levels = rng.gen_range(1..=n.max(2));
    let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    labels[0] = true;
    labels[n - 1] = false;
    let scores = (0..n)
        .map(|_| rng.gen_range(0..levels) as f64 / levels as f64)
        .collect();
    (scores, labels)
}

/// Accelerated gradient descent with backtracking and function-value
/// restarts, run far past any practical stopping point.
pub fn reference_minimize(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    start: Vec<f64>,
    iterations: usize,
) -> Vec<f64> {
    let mut x = start.clone();
    let mut y = start;
    let mut fx = f(&x);
    let mut t = 1.0f64;
    let mut step = 1.0;
    for _ in 0..iterations {
        let g = grad(&y);
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg < 1e-16 {
            break;
        }
        let fy = f(&y);
        step *= 1.5;
        let next = loop {
            let cand: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            if f(&cand) <= fy - 0.5 * step * gg || step < 1e-20 {
                break cand;
            }
            step /= 2.0;
        };
        let f_next = f(&next);
        if f_next > fx {
            // momentum overshot: restart from the best point
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = next;
        fx = f_next;
        t = t_next;
    }
    x
}
