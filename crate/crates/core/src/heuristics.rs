//! Baseline link predictors scored on the training network.
//!
//! With `Γ(x)` the neighborhood of `x` under the chosen mode:
//!
//! | name      | score                                           |
//! |-----------|-------------------------------------------------|
//! | `cn`      | `|Γ(u) ∩ Γ(v)|`                                 |
//! | `jaccard` | `|Γ(u) ∩ Γ(v)| / |Γ(u) ∪ Γ(v)|`, 0 on empty union |
//! | `aa`      | `Σ 1/ln|Γ(w)|` over shared `w` with `|Γ(w)| ≥ 2` |
//! | `ra`      | `Σ 1/|Γ(w)|` over shared `w`                    |
//! | `pa`      | `|Γ(u)| · |Γ(v)|`                               |
//! | `katz`    | `Σ_l β^l · #walks of length l from u to v`      |
//! | `random`  | uniform in `[0, 1)`                             |
//!
//! Directed graphs use either out- or in-neighborhoods for both endpoints.
//! [`Pairing::SuccessorPredecessor`] instead compares `Γ_out(u)` with `Γ_in(v)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId, Pair};
use crate::seed::rng;

#[derive(Debug, Error, PartialEq)]
pub enum HeuristicError {
    #[error("mode {mode} is not valid for a {kind} graph")]
    InvalidMode { mode: NeighborhoodMode, kind: &'static str },
    #[error("pair ({0}, {1}) refers to a node outside the graph")]
    InvalidPair(NodeId, NodeId),
    #[error("katz beta {beta} times max degree {max_degree} must be below 1")]
    KatzDiverges { beta: f64, max_degree: usize },
    #[error("unknown heuristic '{0}' (cn, jaccard, aa, ra, pa, katz, random)")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodMode {
    In,
    Out,
    Undirected,
}

impl NeighborhoodMode {
    pub fn check(self, g: &Graph) -> Result<(), HeuristicError> {
        let ok = match self {
            NeighborhoodMode::Undirected => !g.is_directed(),
            NeighborhoodMode::In | NeighborhoodMode::Out => g.is_directed(),
        };
        if ok {
            Ok(())
        } else {
            Err(HeuristicError::InvalidMode {
                mode: self,
                kind: if g.is_directed() { "directed" } else { "undirected" },
            })
        }
    }

    fn of(self, g: &Graph, u: NodeId) -> &[NodeId] {
        match self {
            NeighborhoodMode::In => g.in_neighbors(u),
            NeighborhoodMode::Out | NeighborhoodMode::Undirected => g.out_neighbors(u),
        }
    }
}

impl fmt::Display for NeighborhoodMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborhoodMode::In => "in",
            NeighborhoodMode::Out => "out",
            NeighborhoodMode::Undirected => "undirected",
        })
    }
}

impl FromStr for NeighborhoodMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in" => Ok(NeighborhoodMode::In),
            "out" => Ok(NeighborhoodMode::Out),
            "undirected" | "all" => Ok(NeighborhoodMode::Undirected),
            other => Err(format!("unknown neighborhood mode '{other}' (in, out)")),
        }
    }
}

/// How the two endpoint neighborhoods are chosen on directed graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `Γ_mode(u)` against `Γ_mode(v)`.
    #[default]
    SameMode,
    /// `Γ_out(u)` against `Γ_in(v)`; the mode is ignored.
    SuccessorPredecessor,
}

impl FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "same" | "same_mode" => Ok(Pairing::SameMode),
            "successor_predecessor" | "out_in" => Ok(Pairing::SuccessorPredecessor),
            other => Err(format!("unknown pairing '{other}' (same, successor_predecessor)")),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::SameMode => "same",
            Pairing::SuccessorPredecessor => "successor_predecessor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    ResourceAllocation,
    PreferentialAttachment,
    Katz,
    Random,
}

impl Heuristic {
    pub const ALL: [Heuristic; 7] = [
        Heuristic::CommonNeighbors,
        Heuristic::Jaccard,
        Heuristic::AdamicAdar,
        Heuristic::ResourceAllocation,
        Heuristic::PreferentialAttachment,
        Heuristic::Katz,
        Heuristic::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::CommonNeighbors => "cn",
            Heuristic::Jaccard => "jaccard",
            Heuristic::AdamicAdar => "aa",
            Heuristic::ResourceAllocation => "ra",
            Heuristic::PreferentialAttachment => "pa",
            Heuristic::Katz => "katz",
            Heuristic::Random => "random",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = HeuristicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name() == key)
            .ok_or(HeuristicError::Unknown(s.trim().to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatzParams {
    pub beta: f64,
    /// Largest node count solved exactly; bigger graphs use the series.
    pub exact_max_nodes: usize,
    pub series_length: usize,
}

impl Default for KatzParams {
    fn default() -> Self {
        KatzParams {
            beta: 0.005,
            exact_max_nodes: 2000,
            series_length: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub pairs: Vec<Pair>,
    pub scores: Vec<f64>,
    pub heuristic: Heuristic,
    pub mode: NeighborhoodMode,
}

fn check_inputs(g: &Graph, pairs: &[Pair], mode: NeighborhoodMode) -> Result<(), HeuristicError> {
    mode.check(g)?;
    let bound = g.id_bound();
    if let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| u >= bound || v >= bound) {
        return Err(HeuristicError::InvalidPair(u, v));
    }
    Ok(())
}

/// Endpoint neighborhoods of a pair plus the neighborhood used to weight a
/// shared neighbor in Adamic-Adar and resource allocation.
struct Neighborhoods<'g> {
    g: &'g Graph,
    mode: NeighborhoodMode,
    pairing: Pairing,
}

impl<'g> Neighborhoods<'g> {
    fn endpoints(&self, u: NodeId, v: NodeId) -> (&'g [NodeId], &'g [NodeId]) {
        match (self.g.is_directed(), self.pairing) {
            (true, Pairing::SuccessorPredecessor) => (self.g.out_neighbors(u), self.g.in_neighbors(v)),
            _ => (self.mode.of(self.g, u), self.mode.of(self.g, v)),
        }
    }

    fn weight_degree(&self, w: NodeId) -> usize {
        match (self.g.is_directed(), self.pairing) {
            (true, Pairing::SuccessorPredecessor) => self.g.degree(w),
            _ => self.mode.of(self.g, w).len(),
        }
    }
}

/// Walks two sorted slices, calling `f` on every shared element.
fn for_each_common(a: &[NodeId], b: &[NodeId], mut f: impl FnMut(NodeId)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

fn local_scores(
    g: &Graph,
    pairs: &[Pair],
    mode: NeighborhoodMode,
    pairing: Pairing,
    heuristic: Heuristic,
) -> Result<PairScores, HeuristicError> {
    check_inputs(g, pairs, mode)?;
    let hoods = Neighborhoods { g, mode, pairing };
    let scores = pairs
        .iter()
        .map(|&(u, v)| {
            let (a, b) = hoods.endpoints(u, v);
            match heuristic {
                Heuristic::CommonNeighbors => {
                    let mut c = 0usize;
                    for_each_common(a, b, |_| c += 1);
                    c as f64
                }
                Heuristic::Jaccard => {
                    let mut c = 0usize;
                    for_each_common(a, b, |_| c += 1);
                    let union = a.len() + b.len() - c;
                    if union == 0 {
                        0.0
                    } else {
                        c as f64 / union as f64
                    }
                }
                Heuristic::AdamicAdar => {
                    let mut s = 0.0;
                    for_each_common(a, b, |w| {
                        let d = hoods.weight_degree(w);
                        if d >= 2 {
                            s += 1.0 / (d as f64).ln();
                        }
                    });
                    s
                }
                Heuristic::ResourceAllocation => {
                    let mut s = 0.0;
                    for_each_common(a, b, |w| {
                        let d = hoods.weight_degree(w);
                        if d > 0 {
                            s += 1.0 / d as f64;
                        }
                    });
                    s
                }
                Heuristic::PreferentialAttachment => (a.len() * b.len()) as f64,
                Heuristic::Katz | Heuristic::Random => unreachable!("not a local heuristic"),
            }
        })
        .collect();
    Ok(PairScores {
        pairs: pairs.to_vec(),
        scores,
        heuristic,
        mode,
    })
}

pub fn score_common_neighbors(g: &Graph, pairs: &[Pair], mode: NeighborhoodMode) -> Result<PairScores, HeuristicError> {
    local_scores(g, pairs, mode, Pairing::SameMode, Heuristic::CommonNeighbors)
}

pub fn score_jaccard(g: &Graph, pairs: &[Pair], mode: NeighborhoodMode) -> Result<PairScores, HeuristicError> {
    local_scores(g, pairs, mode, Pairing::SameMode, Heuristic::Jaccard)
}

pub fn score_adamic_adar(g: &Graph, pairs: &[Pair], mode: NeighborhoodMode) -> Result<PairScores, HeuristicError> {
    local_scores(g, pairs, mode, Pairing::SameMode, Heuristic::AdamicAdar)
}

pub fn score_resource_allocation(
    g: &Graph,
    pairs: &[Pair],
    mode: NeighborhoodMode,
) -> Result<PairScores, HeuristicError> {
    local_scores(g, pairs, mode, Pairing::SameMode, Heuristic::ResourceAllocation)
}

pub fn score_preferential_attachment(
    g: &Graph,
    pairs: &[Pair],
    mode: NeighborhoodMode,
) -> Result<PairScores, HeuristicError> {
    local_scores(g, pairs, mode, Pairing::SameMode, Heuristic::PreferentialAttachment)
}

/// Rows of the walk matrix: a walk may step from `u` to each of these.
fn walk_rows(g: &Graph, mode: NeighborhoodMode, u: NodeId) -> &[NodeId] {
    mode.of(g, u)
}

/// Katz index. Graphs with at most `exact_max_nodes` ids are solved exactly
/// through an LU factorization of `I - βA`; larger graphs sum the series up
/// to `series_length`.
pub fn score_katz(
    g: &Graph,
    pairs: &[Pair],
    params: KatzParams,
    mode: NeighborhoodMode,
) -> Result<PairScores, HeuristicError> {
    check_inputs(g, pairs, mode)?;
    let n = g.id_bound();
    let max_degree = (0..n).map(|u| walk_rows(g, mode, u).len()).max().unwrap_or(0);
    if !(params.beta >= 0.0 && params.beta * (max_degree as f64) < 1.0) {
        return Err(HeuristicError::KatzDiverges {
            beta: params.beta,
            max_degree,
        });
    }

    let scores = if n <= params.exact_max_nodes {
        katz_exact(g, pairs, params.beta, mode)
    } else {
        katz_series(g, pairs, params.beta, params.series_length, mode)
    };
    Ok(PairScores {
        pairs: pairs.to_vec(),
        scores,
        heuristic: Heuristic::Katz,
        mode,
    })
}

fn katz_exact(g: &Graph, pairs: &[Pair], beta: f64, mode: NeighborhoodMode) -> Vec<f64> {
    let n = g.id_bound();
    if pairs.is_empty() || g.edge_count() == 0 {
        return vec![0.0; pairs.len()];
    }
    // K = (I - βA)^{-1} - I, one column per distinct target node
    let mut m = DMatrix::<f64>::identity(n, n);
    for u in 0..n {
        for &w in walk_rows(g, mode, u) {
            m[(u, w)] -= beta;
        }
    }
    let lu = m.lu();
    let mut by_target: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (i, &(_, v)) in pairs.iter().enumerate() {
        by_target.entry(v).or_default().push(i);
    }
    let mut scores = vec![0.0; pairs.len()];
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    for (v, idxs) in by_target {
        rhs.fill(0.0);
        rhs[v] = 1.0;
        let col = lu.solve(&rhs).expect("I - βA is nonsingular when β·maxdeg < 1");
        for i in idxs {
            let u = pairs[i].0;
            let k = col[u] - if u == v { 1.0 } else { 0.0 };
            scores[i] = k.max(0.0);
        }
    }
    scores
}

fn katz_series(g: &Graph, pairs: &[Pair], beta: f64, length: usize, mode: NeighborhoodMode) -> Vec<f64> {
    let n = g.id_bound();
    let mut by_source: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (i, &(u, _)) in pairs.iter().enumerate() {
        by_source.entry(u).or_default().push(i);
    }
    let mut scores = vec![0.0; pairs.len()];
    let mut walks = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut acc = vec![0.0f64; n];
    for (u, idxs) in by_source {
        walks.fill(0.0);
        acc.fill(0.0);
        walks[u] = 1.0;
        let mut weight = 1.0;
        for _ in 0..length {
            next.fill(0.0);
            for (x, &c) in walks.iter().enumerate() {
                if c != 0.0 {
                    for &w in walk_rows(g, mode, x) {
                        next[w] += c;
                    }
                }
            }
            std::mem::swap(&mut walks, &mut next);
            weight *= beta;
            for (a, &c) in acc.iter_mut().zip(&walks) {
                *a += weight * c;
            }
        }
        for i in idxs {
            scores[i] = acc[pairs[i].1];
        }
    }
    scores
}

/// Independent uniform scores in `[0, 1)`, reproducible from `seed`.
pub fn score_random(pairs: &[Pair], seed: u64) -> PairScores {
    let mut r = rng(seed);
    PairScores {
        pairs: pairs.to_vec(),
        scores: pairs.iter().map(|_| r.gen::<f64>()).collect(),
        heuristic: Heuristic::Random,
        mode: NeighborhoodMode::Undirected,
    }
}

/// Options shared by every heuristic when dispatching by name.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeuristicOptions {
    pub katz: KatzParams,
    pub pairing: Pairing,
}

/// Scores `pairs` with `heuristic`. `seed` is only used by `random`.
pub fn score(
    heuristic: Heuristic,
    g: &Graph,
    pairs: &[Pair],
    mode: NeighborhoodMode,
    options: &HeuristicOptions,
    seed: u64,
) -> Result<PairScores, HeuristicError> {
    match heuristic {
        Heuristic::Katz => score_katz(g, pairs, options.katz, mode),
        Heuristic::Random => {
            check_inputs(g, pairs, mode)?;
            let mut s = score_random(pairs, seed);
            s.mode = mode;
            Ok(s)
        }
        h => local_scores(g, pairs, mode, options.pairing, h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use approx::assert_abs_diff_eq;

    const U: NeighborhoodMode = NeighborhoodMode::Undirected;

    fn one(f: fn(&Graph, &[Pair], NeighborhoodMode) -> Result<PairScores, HeuristicError>, g: &Graph, p: Pair) -> f64 {
        f(g, &[p], if g.is_directed() { NeighborhoodMode::Out } else { U })
            .unwrap()
            .scores[0]
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn triangle_values() {
        let t = generators::complete(3);
        assert_eq!(one(score_common_neighbors, &t, (0, 1)), 1.0);
        assert_abs_diff_eq!(one(score_jaccard, &t, (0, 1)), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one(score_adamic_adar, &t, (0, 1)), 1.0 / 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(one(score_adamic_adar, &t, (0, 1)), 1.442695, epsilon = 1e-6);
        assert_eq!(one(score_resource_allocation, &t, (0, 1)), 0.5);
        assert_eq!(one(score_preferential_attachment, &t, (0, 1)), 4.0);
    }

    #[test]
    fn path_and_empty_cases() {
        let p = generators::path(3);
        assert_eq!(one(score_common_neighbors, &p, (0, 2)), 1.0);
        assert_eq!(one(score_common_neighbors, &p, (0, 1)), 0.0);
        assert_eq!(one(score_adamic_adar, &p, (0, 1)), 0.0);
        assert_eq!(one(score_resource_allocation, &p, (0, 1)), 0.0);

        let isolated = Graph::with_nodes(3, false, [(0, 1)]);
        assert_eq!(one(score_jaccard, &isolated, (1, 2)), 0.0);
        assert_eq!(one(score_preferential_attachment, &isolated, (0, 2)), 0.0);
        let two = Graph::with_nodes(2, false, []);
        assert_eq!(one(score_jaccard, &two, (0, 1)), 0.0);
    }

    #[test]
    fn adamic_adar_skips_degree_one_neighbors() {
        // out-mode: 0 -> 2, 1 -> 2, 2 has out-degree 1 (2 -> 3)
        let g = Graph::from_edges(true, [(0, 2), (1, 2), (2, 3)]);
        let s = score_adamic_adar(&g, &[(0, 1)], NeighborhoodMode::Out).unwrap();
        assert_eq!(s.scores, vec![0.0]);
        // in-mode: Γ_in(3) = {2}, Γ_in(2) = {0, 1}; no shared
        let s = score_common_neighbors(&g, &[(2, 3)], NeighborhoodMode::In).unwrap();
        assert_eq!(s.scores, vec![0.0]);
    }

    #[test]
    fn mode_validation() {
        let und = generators::complete(3);
        let dir = Graph::from_edges(true, [(0, 1)]);
        assert!(matches!(
            score_common_neighbors(&und, &[(0, 1)], NeighborhoodMode::In),
            Err(HeuristicError::InvalidMode { .. })
        ));
        assert!(matches!(
            score_jaccard(&dir, &[(0, 1)], U),
            Err(HeuristicError::InvalidMode { .. })
        ));
        assert_eq!(
            score_common_neighbors(&und, &[(0, 7)], U),
            Err(HeuristicError::InvalidPair(0, 7))
        );
    }

    #[test]
    fn katz_path_series() {
        // walks 0 -> 2 on a path have lengths 2, 4, 6, ... with counts 1, 2, 4, ...
        // so the sum is β² / (1 - 2β²) = 1/98 for β = 0.1
        let p = generators::path(3);
        let params = KatzParams {
            beta: 0.1,
            ..Default::default()
        };
        let s = score_katz(&p, &[(0, 2)], params, U).unwrap().scores[0];
        assert_abs_diff_eq!(s, 1.0 / 98.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s, 0.0102040816, epsilon = 1e-10);
    }

    #[test]
    fn katz_zero_cases() {
        let forest = Graph::from_edges(false, [(0, 1), (2, 3)]);
        let s = score_katz(&forest, &[(0, 3), (1, 2)], KatzParams::default(), U).unwrap();
        assert_eq!(s.scores, vec![0.0, 0.0]);
        let empty = Graph::with_nodes(4, false, []);
        let s = score_katz(&empty, &[(0, 3)], KatzParams::default(), U).unwrap();
        assert_eq!(s.scores, vec![0.0]);
    }

    #[test]
    fn katz_rejects_divergent_beta() {
        let star = generators::star(12);
        let params = KatzParams {
            beta: 0.1,
            ..Default::default()
        };
        assert!(matches!(
            score_katz(&star, &[(1, 2)], params, U),
            Err(HeuristicError::KatzDiverges { max_degree: 11, .. })
        ));
    }

    #[test]
    fn katz_series_matches_exact_on_short_walks() {
        let g = generators::erdos_renyi(60, 0.05, false, 4);
        let pairs: Vec<Pair> = (0..60).flat_map(|u| (0..60).map(move |v| (u, v))).collect();
        let exact = score_katz(
            &g,
            &pairs,
            KatzParams {
                beta: 0.01,
                ..Default::default()
            },
            U,
        )
        .unwrap();
        let series = score_katz(
            &g,
            &pairs,
            KatzParams {
                beta: 0.01,
                exact_max_nodes: 0,
                series_length: 30,
            },
            U,
        )
        .unwrap();
        for (a, b) in exact.scores.iter().zip(&series.scores) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn random_scores() {
        let pairs: Vec<Pair> = (0..100_000).map(|i| (i, i + 1)).collect();
        let a = score_random(&pairs, 3);
        assert_eq!(a, score_random(&pairs, 3));
        assert!(a.scores.iter().all(|&s| (0.0..1.0).contains(&s)));
        let mean = a.scores.iter().sum::<f64>() / a.scores.len() as f64;
        assert!((0.49..=0.51).contains(&mean), "mean {mean}");
    }

    #[test]
    fn names_round_trip() {
        for h in Heuristic::ALL {
            assert_eq!(h.name().parse::<Heuristic>().unwrap(), h);
            assert_eq!(h.name().to_uppercase().parse::<Heuristic>().unwrap(), h);
        }
        assert!("simrank".parse::<Heuristic>().is_err());
    }

    #[test]
    fn successor_predecessor_pairing() {
        // 0 -> 1 -> 2: Γ_out(0) = {1} meets Γ_in(2) = {1}
        let g = Graph::from_edges(true, [(0, 1), (1, 2)]);
        let opts = HeuristicOptions {
            pairing: Pairing::SuccessorPredecessor,
            ..Default::default()
        };
        let s = score(
            Heuristic::CommonNeighbors,
            &g,
            &[(0, 2), (2, 0)],
            NeighborhoodMode::Out,
            &opts,
            0,
        )
        .unwrap();
        assert_eq!(s.scores, vec![1.0, 0.0]);
        let same = score(
            Heuristic::CommonNeighbors,
            &g,
            &[(0, 2)],
            NeighborhoodMode::Out,
            &Default::default(),
            0,
        )
        .unwrap();
        assert_eq!(same.scores, vec![0.0]);
    }
}
