use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{EdgeSplit, SplitError, World};
use crate::graph::{canonical, Graph, Pair};
use crate::seed::{derive_seed, rng};

/// Samples `count` distinct non-self node pairs that avoid the train edges
/// (open world) or every edge of `g` (closed world).
///
/// Train edges are `g`'s edges minus `test_edges`. Pairs are canonical
/// `(min, max)` for undirected graphs; for directed graphs `(u, v)` is a
/// valid non-edge even when `(v, u)` is an edge.
pub fn sample_non_edges(
    g: &Graph,
    count: usize,
    world: World,
    test_edges: &[Pair],
    seed: u64,
) -> Result<Vec<Pair>, SplitError> {
    let directed = g.is_directed();
    let excluded: HashSet<Pair> = match world {
        World::Closed => g.edges().iter().copied().collect(),
        World::Open => {
            let test: HashSet<Pair> = test_edges.iter().map(|&(u, v)| canonical(directed, u, v)).collect();
            g.edges().iter().copied().filter(|e| !test.contains(e)).collect()
        }
    };
    sample_pairs_excluding(g, count, &excluded, &mut rng(seed))
}

/// Draws `count` distinct canonical pairs between present nodes of `g`
/// that are not in `excluded`.
///
/// Uses rejection sampling while the request is under half of the
/// available pool, and enumerates-then-shuffles otherwise.
pub fn sample_pairs_excluding<R: Rng>(
    g: &Graph,
    count: usize,
    excluded: &HashSet<Pair>,
    rng: &mut R,
) -> Result<Vec<Pair>, SplitError> {
    let directed = g.is_directed();
    let nodes: Vec<usize> = g.nodes().collect();
    let k = nodes.len();
    let total = if directed {
        k * k.saturating_sub(1)
    } else {
        k * k.saturating_sub(1) / 2
    };
    let blocked = excluded
        .iter()
        .filter(|&&(u, v)| u != v && g.is_present(u) && g.is_present(v) && canonical(directed, u, v) == (u, v))
        .count();
    let available = total - blocked;
    if count > available {
        return Err(SplitError::NonEdgesInfeasible {
            requested: count,
            available,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }

    if (count as f64) < 0.5 * available as f64 {
        let mut chosen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = nodes[rng.gen_range(0..k)];
            let v = nodes[rng.gen_range(0..k)];
            if u == v {
                continue;
            }
            let pair = canonical(directed, u, v);
            if excluded.contains(&pair) || !chosen.insert(pair) {
                continue;
            }
            out.push(pair);
        }
        Ok(out)
    } else {
        let mut pool = Vec::with_capacity(available);
        for (i, &u) in nodes.iter().enumerate() {
            let candidates: &[usize] = if directed { &nodes } else { &nodes[i + 1..] };
            for &v in candidates {
                if u != v && !excluded.contains(&(u, v)) {
                    pool.push((u, v));
                }
            }
        }
        let (picked, _) = pool.partial_shuffle(rng, count);
        Ok(picked.to_vec())
    }
}

/// Fills the train and test non-edge sets of a split according to its spec.
///
/// Train non-edges follow the split's world assumption. Test non-edges
/// avoid every edge and every train non-edge.
pub fn add_non_edges(g: &Graph, mut split: EdgeSplit) -> Result<EdgeSplit, SplitError> {
    let spec = split.spec.clone();
    let train_count = spec.train_nonedges.resolve(split.train_edges.len());
    let test_count = spec.test_nonedges.resolve(split.test_edges.len());

    let train_ne = sample_non_edges(
        g,
        train_count,
        spec.world,
        &split.test_edges,
        derive_seed(spec.seed, "split/train_nonedges"),
    )?;

    let mut excluded: HashSet<Pair> = g.edges().iter().copied().collect();
    excluded.extend(train_ne.iter().copied());
    let test_ne = sample_pairs_excluding(
        g,
        test_count,
        &excluded,
        &mut rng(derive_seed(spec.seed, "split/test_nonedges")),
    )?;

    split.train_nonedges = train_ne;
    split.test_nonedges = test_ne;
    Ok(split)
}
