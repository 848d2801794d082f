//! Grid search over a method's tunable parameters on a split of the train
//! network.

use std::fs;
use std::path::Path;
use std::time::Instant;

use super::config::{EvalConfig, MethodSpec};
use super::run::{prepare_split, run_method, PreparedSplit};
use crate::metrics::auc_from_scores;
use crate::seed::derive_seed;
use crate::split::{split_graph, SplitAlgorithm, SplitSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub params: Vec<(String, String)>,
    /// validation AUC, or why the point failed
    pub score: Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub chosen: Vec<(String, String)>,
    pub trials: Vec<Trial>,
    pub seconds: f64,
}

fn describe(params: &[(String, String)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Picks the grid point with the best validation AUC on an inner split of
/// the train network (ties go to the earlier point). A single point is
/// returned without running anything. For node embeddings a point scores
/// the best AUC over the configured edge operators.
pub fn tune_hyperparameters(
    config: &EvalConfig,
    method: &MethodSpec,
    outer: &PreparedSplit,
    scratch: &Path,
    method_seed: u64,
) -> Result<TuneOutcome, String> {
    let start = Instant::now();
    let mut points = method.grid_points();
    if points.len() == 1 {
        return Ok(TuneOutcome {
            chosen: points.remove(0),
            trials: Vec::new(),
            seconds: 0.0,
        });
    }
    let keep = config.general.keep_scratch;

    let g = &config.general;
    let spec = SplitSpec {
        train_fraction: g.train_fraction,
        train_nonedges: g.train_nonedges,
        test_nonedges: g.test_nonedges,
        world: g.tune_world.resolve(g.world),
        seed: derive_seed(method_seed, "tune/split"),
    };
    let source = &outer.train_graph;
    let inner_dir = scratch.join("tune-split");
    let inner = match split_graph(source, &spec, SplitAlgorithm::Fast)
        .map_err(|e| e.to_string())
        .and_then(|s| prepare_split(source, s, &inner_dir).map_err(|e| e.to_string()))
    {
        Ok(p) => p,
        Err(e) => {
            log::warn!(
                "{}: no validation split of the train network ({e}); using the first grid point",
                method.name
            );
            return Ok(TuneOutcome {
                chosen: points.remove(0),
                trials: Vec::new(),
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    };

    let mut trials = Vec::with_capacity(points.len());
    for (i, params) in points.into_iter().enumerate() {
        let dir = scratch.join(format!("tune-{i}"));
        let seed = derive_seed(method_seed, "tune/run");
        let score = run_method(config, method, &params, &inner, &dir, seed).and_then(|run| {
            run.outputs
                .into_iter()
                .filter_map(|o| o.scores.ok())
                .filter_map(|s| auc_from_scores(&s, &inner.test_labels).ok())
                .reduce(f64::max)
                .ok_or_else(|| "no usable scores".to_string())
        });
        match &score {
            Ok(auc) => {
                log::info!("{} [{}]: validation AUC {auc:.4}", method.name, describe(&params));
                if !keep {
                    let _ = fs::remove_dir_all(&dir);
                }
            }
            Err(e) => log::warn!("{} [{}] failed: {e}", method.name, describe(&params)),
        }
        trials.push(Trial { params, score });
    }
    if !keep {
        let _ = fs::remove_dir_all(&inner_dir);
    }

    let mut best: Option<(usize, f64)> = None;
    for (i, t) in trials.iter().enumerate() {
        if let Ok(s) = t.score {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    match best {
        Some((i, _)) => Ok(TuneOutcome {
            chosen: trials[i].params.clone(),
            trials,
            seconds: start.elapsed().as_secs_f64(),
        }),
        None => Err(trials
            .iter()
            .map(|t| {
                format!(
                    "[{}] {}",
                    describe(&t.params),
                    t.score.as_ref().err().map_or("", String::as_str)
                )
            })
            .collect::<Vec<_>>()
            .join("; ")),
    }
}
