mod common;

use common::{build, katz_converged_length, katz_walks, local_oracle, random_edges, Sets};
use linkbench_core::heuristics::{
    score, score_katz, Heuristic, HeuristicOptions, KatzParams, NeighborhoodMode, Pairing,
};
use linkbench_core::seed::rng;
use proptest::prelude::*;
use rand::Rng;

const LOCAL: [(Heuristic, &str); 5] = [
    (Heuristic::CommonNeighbors, "cn"),
    (Heuristic::Jaccard, "jaccard"),
    (Heuristic::AdamicAdar, "aa"),
    (Heuristic::ResourceAllocation, "ra"),
    (Heuristic::PreferentialAttachment, "pa"),
];

fn modes(directed: bool) -> Vec<(NeighborhoodMode, &'static str)> {
    if directed {
        vec![(NeighborhoodMode::Out, "out"), (NeighborhoodMode::In, "in")]
    } else {
        vec![(NeighborhoodMode::Undirected, "undirected")]
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).collect()
}

fn max_walk_degree(sets: &Sets, mode: &str) -> usize {
    (0..sets.out.len()).map(|u| sets.of(mode, u).len()).max().unwrap_or(0)
}

fn check_graph(n: usize, p: f64, directed: bool, seed: u64) {
    let edges = random_edges(&mut rng(seed), n, p, directed);
    let g = build(n, directed, &edges);
    let sets = Sets::new(n, directed, &edges);
    let pairs = all_pairs(n);
    for (mode, mname) in modes(directed) {
        let same = HeuristicOptions::default();
        for (h, name) in LOCAL {
            let got = score(h, &g, &pairs, mode, &same, 0).unwrap();
            for (&(u, v), &s) in pairs.iter().zip(&got.scores) {
                let want = local_oracle(&sets, name, mname, u, v);
                assert!((s - want).abs() <= 1e-10, "{name}/{mname} ({u},{v}): {s} vs {want}");
            }
        }
        let beta = 0.5 / (max_walk_degree(&sets, mname).max(1) as f64);
        let len = katz_converged_length(beta, max_walk_degree(&sets, mname), 1e-14);
        let params = KatzParams {
            beta,
            ..KatzParams::default()
        };
        let got = score_katz(&g, &pairs, params, mode).unwrap();
        for u in 0..n {
            let want = katz_walks(&sets, mname, beta, u, len);
            for (v, w) in want.iter().enumerate() {
                let s = got.scores[u * n + v];
                assert!((s - w).abs() <= 1e-10, "katz/{mname} ({u},{v}): {s} vs {w}");
            }
        }
    }
    if directed {
        let succ = HeuristicOptions {
            pairing: Pairing::SuccessorPredecessor,
            ..Default::default()
        };
        for (h, name) in LOCAL {
            let got = score(h, &g, &pairs, NeighborhoodMode::Out, &succ, 0).unwrap();
            for (&(u, v), &s) in pairs.iter().zip(&got.scores) {
                let want = local_oracle(&sets, name, "succ_pred", u, v);
                assert!((s - want).abs() <= 1e-10, "{name}/succ_pred ({u},{v}): {s} vs {want}");
            }
        }
    }
}

#[test]
fn small_graphs_match_set_arithmetic() {
    let mut r = rng(11);
    for i in 0..24 {
        let n = r.gen_range(2..=30);
        let p = r.gen_range(0.02..0.4);
        check_graph(n, p, i % 2 == 1, 100 + i);
    }
}

#[test]
fn katz_series_matches_truncated_walks() {
    // above the exact-solve cutoff the series to length L is used
    let edges = random_edges(&mut rng(3), 40, 0.1, true);
    let g = build(40, true, &edges);
    let sets = Sets::new(40, true, &edges);
    let pairs = all_pairs(40);
    let params = KatzParams {
        beta: 0.01,
        exact_max_nodes: 10,
        series_length: 7,
    };
    let got = score_katz(&g, &pairs, params, NeighborhoodMode::Out).unwrap();
    for u in 0..40 {
        let want = katz_walks(&sets, "out", 0.01, u, 7);
        for (v, w) in want.iter().enumerate() {
            assert!((got.scores[u * 40 + v] - w).abs() <= 1e-15);
        }
    }
}

#[test]
fn katz_direction_identities() {
    let edges = random_edges(&mut rng(8), 25, 0.15, true);
    let g = build(25, true, &edges);
    let gt = g.transpose();
    let pairs = all_pairs(25);
    let swapped: Vec<_> = pairs.iter().map(|&(u, v)| (v, u)).collect();
    let params = KatzParams {
        beta: 0.02,
        ..KatzParams::default()
    };
    let out_g = score_katz(&g, &pairs, params, NeighborhoodMode::Out).unwrap().scores;
    let in_gt = score_katz(&gt, &pairs, params, NeighborhoodMode::In).unwrap().scores;
    let in_g_rev = score_katz(&g, &swapped, params, NeighborhoodMode::In).unwrap().scores;
    for i in 0..pairs.len() {
        assert!((out_g[i] - in_gt[i]).abs() <= 1e-12);
        assert!((out_g[i] - in_g_rev[i]).abs() <= 1e-12);
    }
    assert!(out_g.iter().any(|&s| s > 0.0));
}

#[test]
fn path_katz_value() {
    let g = build(3, false, &[(0, 1), (1, 2)]);
    let params = KatzParams {
        beta: 0.1,
        ..KatzParams::default()
    };
    let s = score_katz(&g, &[(0, 2)], params, NeighborhoodMode::Undirected)
        .unwrap()
        .scores[0];
    // closed form for the path: beta^2 / (1 - 2 beta^2)
    assert!((s - 1.0 / 98.0).abs() <= 1e-15);
    let sets = Sets::new(3, false, &[(0, 1), (1, 2)]);
    assert!((s - katz_walks(&sets, "undirected", 0.1, 0, 12)[2]).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn undirected_scores_are_symmetric_and_nonnegative(n in 2usize..25, p in 0.0f64..0.5, seed in any::<u64>()) {
        let edges = random_edges(&mut rng(seed), n, p, false);
        let g = build(n, false, &edges);
        let pairs = all_pairs(n);
        let opts = HeuristicOptions::default();
        for h in Heuristic::ALL.into_iter().filter(|&h| h != Heuristic::Random) {
            let s = score(h, &g, &pairs, NeighborhoodMode::Undirected, &opts, 0).unwrap().scores;
            for u in 0..n {
                for v in 0..n {
                    prop_assert!(s[u * n + v] >= 0.0);
                    prop_assert!((s[u * n + v] - s[v * n + u]).abs() <= 1e-12, "{:?}", h);
                }
            }
        }
    }
}
