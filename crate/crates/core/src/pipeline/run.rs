//! The evaluation loop.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{EvalConfig, MethodCategory, MethodSpec, NetworkConfig};
use super::exec::{execute_external, render_command, stderr_tail, ExecFailure};
use super::report::{NetworkSetup, Report};
use super::tune::tune_hyperparameters;
use super::{EvalResult, MetricRecord, PipelineError, ResultKind};
use crate::classifier::{fit_cv, predict_proba, LabeledFeatures};
use crate::embed::{edge_features, parse_embedding_file, EdgeOperator};
use crate::graph::{
    compute_stats, load_edgelist, main_component, prune_by_degree, relabel_contiguous, remove_self_loops,
    save_edgelist, write_edgelist, Delimiter, Graph, Pair,
};
use crate::heuristics::{self, Heuristic, NeighborhoodMode};
use crate::metrics::{auc_roc, confusion_at, curve, fixed_metrics, recommend_metrics, EvalSetup, Scoresheet};
use crate::seed::{derive_seed, repeat_seed};
use crate::split::{split_graph, write_split, EdgeSplit, SplitSpec};

pub const TRAIN_NET_FILE: &str = "train.edgelist";
pub const TRAIN_PAIRS_FILE: &str = "train_pairs.txt";
pub const TEST_PAIRS_FILE: &str = "test_pairs.txt";

/// A split plus the files handed to external methods.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub split: EdgeSplit,
    pub train_graph: Graph,
    pub dir: PathBuf,
    pub train_pairs: Vec<Pair>,
    pub train_labels: Vec<bool>,
    pub test_pairs: Vec<Pair>,
    pub test_labels: Vec<bool>,
}

impl PreparedSplit {
    pub fn train_net_path(&self) -> PathBuf {
        self.dir.join(TRAIN_NET_FILE)
    }

    pub fn train_pairs_path(&self) -> PathBuf {
        self.dir.join(TRAIN_PAIRS_FILE)
    }

    pub fn test_pairs_path(&self) -> PathBuf {
        self.dir.join(TEST_PAIRS_FILE)
    }
}

fn labeled(edges: &[Pair], nonedges: &[Pair]) -> (Vec<Pair>, Vec<bool>) {
    let pairs = edges.iter().chain(nonedges).copied().collect();
    let labels = std::iter::repeat_n(true, edges.len())
        .chain(std::iter::repeat_n(false, nonedges.len()))
        .collect();
    (pairs, labels)
}

/// Writes the split files, the train network, `train_pairs.txt`
/// (`u v label`) and `test_pairs.txt` (`u v`) into `dir`.
pub fn prepare_split(source: &Graph, split: EdgeSplit, dir: &Path) -> Result<PreparedSplit, PipelineError> {
    write_split(&split, dir).map_err(|e| PipelineError::io(dir, e))?;
    let train_graph = split.train_graph(source);
    let (train_pairs, train_labels) = labeled(&split.train_edges, &split.train_nonedges);
    let (test_pairs, test_labels) = labeled(&split.test_edges, &split.test_nonedges);
    let prepared = PreparedSplit {
        split,
        train_graph,
        dir: dir.to_path_buf(),
        train_pairs,
        train_labels,
        test_pairs,
        test_labels,
    };

    let path = prepared.train_net_path();
    save_edgelist(&prepared.train_graph, &path, Delimiter::Space).map_err(|e| PipelineError::io(&path, e))?;
    let path = prepared.train_pairs_path();
    let mut text = String::new();
    for (&(u, v), &l) in prepared.train_pairs.iter().zip(&prepared.train_labels) {
        text.push_str(&format!("{u} {v} {}\n", l as u8));
    }
    fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
    let path = prepared.test_pairs_path();
    write_edgelist(&prepared.test_pairs, &path, Delimiter::Space).map_err(|e| PipelineError::io(&path, e))?;
    Ok(prepared)
}

/// Loads and preprocesses a network; node ids come out contiguous.
pub fn load_network(config: &EvalConfig, net: &NetworkConfig) -> Result<Graph, PipelineError> {
    let fail = |message: String| PipelineError::Network {
        network: net.name.clone(),
        message,
    };
    let path = config.resolve(&net.path);
    let mut g = load_edgelist(&path, net.directed, net.delimiter).map_err(|e| fail(e.to_string()))?;
    if net.remove_self_loops {
        g = remove_self_loops(&g);
    }
    if net.min_degree > 0 {
        g = prune_by_degree(&g, net.min_degree);
    }
    if net.main_component {
        g = main_component(&g);
    }
    let (g, _) = relabel_contiguous(&g);
    let stats = compute_stats(&g);
    log::info!(
        "network {}: {} nodes, {} edges, {} components",
        net.name,
        stats.n,
        stats.m,
        stats.components
    );
    if g.edge_count() < 2 {
        return Err(fail(format!("only {} edges left after preprocessing", g.edge_count())));
    }
    Ok(g)
}

/// Scores a test set; failures come back as text for the report.
pub fn evaluate_scores(
    config: &EvalConfig,
    method: &str,
    scores: Vec<f64>,
    labels: &[bool],
) -> Result<(MetricRecord, Vec<crate::metrics::ThresholdCurve>), String> {
    let g = &config.general;
    let sheet = Scoresheet::new(method, scores, labels.to_vec()).map_err(|e| e.to_string())?;
    let auc = auc_roc(&sheet).map_err(|e| e.to_string())?;
    let counts = confusion_at(&sheet, g.threshold);
    let record = MetricRecord {
        auc,
        threshold: g.threshold,
        counts,
        fixed: fixed_metrics(counts, g.miss_convention),
    };
    let curves = g
        .curves
        .iter()
        .map(|&k| curve(&sheet, k).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok((record, curves))
}

/// Scores produced by one run of a method on one split, one entry per
/// operator for node embeddings.
pub(crate) struct MethodRun {
    pub exec_seconds: f64,
    pub outputs: Vec<OperatorScores>,
}

pub(crate) struct OperatorScores {
    pub operator: Option<EdgeOperator>,
    pub scores: Result<Vec<f64>, String>,
    pub c: Option<f64>,
    pub extra_seconds: f64,
}

fn read_rows(path: &Path, expected_rows: usize) -> Result<Vec<Vec<f64>>, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(expected_rows);
    for (i, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            continue;
        }
        let row = tokens
            .iter()
            .map(|t| match t.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(format!("line {}: bad value '{t}'", i + 1)),
            })
            .collect::<Result<Vec<f64>, String>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(format!("line {}: {} values, expected {first}", i + 1, row.len()));
            }
        }
        rows.push(row);
    }
    if rows.len() != expected_rows {
        return Err(format!("{} rows, expected {expected_rows}", rows.len()));
    }
    Ok(rows)
}

fn matrix(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let d = rows.first().map_or(0, Vec::len);
    nalgebra::DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j])
}

fn classify(
    config: &EvalConfig,
    train: nalgebra::DMatrix<f64>,
    train_labels: &[bool],
    test: &nalgebra::DMatrix<f64>,
    seed: u64,
) -> Result<(Vec<f64>, f64), String> {
    let data = LabeledFeatures::new(train, train_labels.to_vec()).map_err(|e| e.to_string())?;
    let mut options = config.general.cv_options();
    let positives = train_labels.iter().filter(|&&l| l).count();
    let smallest = positives.min(train_labels.len() - positives);
    if smallest < options.folds && smallest >= 2 {
        log::warn!("only {smallest} examples in the smaller class, using {smallest} folds");
        options.folds = smallest;
    }
    let model = fit_cv(&data, &options, seed).map_err(|e| e.to_string())?;
    let p = predict_proba(&model, test).map_err(|e| e.to_string())?;
    Ok((p, model.c))
}

fn failure_text(f: &ExecFailure, tail: String) -> String {
    if tail.is_empty() {
        f.to_string()
    } else {
        format!("{f}; stderr: {tail}")
    }
}

/// Runs a method once with fixed parameters on `prepared` and turns its
/// output into test scores. `Err` means the command itself failed.
pub(crate) fn run_method(
    config: &EvalConfig,
    method: &MethodSpec,
    params: &[(String, String)],
    prepared: &PreparedSplit,
    scratch: &Path,
    seed: u64,
) -> Result<MethodRun, String> {
    let output = scratch.join("output.txt");
    let mut subs: BTreeMap<String, String> = BTreeMap::new();
    let path_str = |p: PathBuf| p.display().to_string();
    subs.insert("train_net".into(), path_str(prepared.train_net_path()));
    subs.insert("train_pairs".into(), path_str(prepared.train_pairs_path()));
    subs.insert("test_pairs".into(), path_str(prepared.test_pairs_path()));
    subs.insert("output".into(), path_str(output.clone()));
    subs.insert("dim".into(), method.dim.to_string());
    let config_dir = fs::canonicalize(&config.base_dir).unwrap_or_else(|_| config.base_dir.clone());
    subs.insert("config_dir".into(), path_str(config_dir));
    subs.insert("seed".into(), seed.to_string());
    for (k, v) in params {
        subs.insert(k.clone(), v.clone());
    }
    let command = render_command(&method.command, &subs).map_err(|e| e.to_string())?;
    let timeout = Duration::from_secs_f64(method.timeout_secs);
    let record = execute_external(&command, scratch, &output, timeout, seed);
    if let Some(f) = &record.failure {
        return Err(failure_text(f, stderr_tail(&record, 3)));
    }
    let exec_seconds = record.wall_seconds;
    let bad = |e: String| ExecFailure::BadOutput(e).to_string();

    let outputs = match method.category {
        MethodCategory::EndToEnd => {
            let rows = read_rows(&output, prepared.test_pairs.len()).map_err(bad)?;
            if rows[0].len() != 1 {
                return Err(bad(format!("expected one score per line, found {}", rows[0].len())));
            }
            vec![OperatorScores {
                operator: None,
                scores: Ok(rows.into_iter().map(|r| r[0]).collect()),
                c: None,
                extra_seconds: 0.0,
            }]
        }
        MethodCategory::EdgeEmbedding => {
            let n_train = prepared.train_pairs.len();
            let rows = read_rows(&output, n_train + prepared.test_pairs.len()).map_err(bad)?;
            let start = Instant::now();
            let result = classify(
                config,
                matrix(&rows[..n_train]),
                &prepared.train_labels,
                &matrix(&rows[n_train..]),
                derive_seed(seed, "classifier"),
            );
            let extra_seconds = start.elapsed().as_secs_f64();
            let (scores, c) = match result {
                Ok((s, c)) => (Ok(s), Some(c)),
                Err(e) => (Err(e), None),
            };
            vec![OperatorScores {
                operator: None,
                scores,
                c,
                extra_seconds,
            }]
        }
        MethodCategory::NodeEmbedding => {
            let n = prepared.train_graph.id_bound();
            let table = parse_embedding_file(&output, Some(n)).map_err(|e| bad(e.to_string()))?;
            if table.dim() != method.dim {
                log::warn!(
                    "{}: embedding has {} columns, config says dim = {}",
                    method.name,
                    table.dim(),
                    method.dim
                );
            }
            config
                .general
                .edge_operators
                .iter()
                .map(|&op| {
                    let start = Instant::now();
                    let result = edge_features(&table, &prepared.train_pairs, op)
                        .and_then(|x| Ok((x, edge_features(&table, &prepared.test_pairs, op)?)))
                        .map_err(|e| e.to_string())
                        .and_then(|(x, t)| {
                            classify(config, x, &prepared.train_labels, &t, derive_seed(seed, "classifier"))
                        });
                    let extra_seconds = start.elapsed().as_secs_f64();
                    let (scores, c) = match result {
                        Ok((s, c)) => (Ok(s), Some(c)),
                        Err(e) => (Err(e), None),
                    };
                    OperatorScores {
                        operator: Some(op),
                        scores,
                        c,
                        extra_seconds,
                    }
                })
                .collect()
        }
    };
    Ok(MethodRun { exec_seconds, outputs })
}

struct RepeatContext<'a> {
    config: &'a EvalConfig,
    network: &'a str,
    repeat: usize,
    seed: u64,
    prepared: &'a PreparedSplit,
}

impl RepeatContext<'_> {
    fn row(&self, method: &str, kind: ResultKind) -> EvalResult {
        EvalResult {
            network: self.network.to_string(),
            repeat: self.repeat,
            seed: self.seed,
            split_checksum: self.prepared.split.checksum(),
            method: method.to_string(),
            kind,
            operator: None,
            parameters: Vec::new(),
            c: None,
            metrics: None,
            failure: None,
            curves: Vec::new(),
            train_seconds: 0.0,
            total_seconds: 0.0,
        }
    }

    fn fill(&self, row: &mut EvalResult, scores: Result<Vec<f64>, String>) {
        match scores.and_then(|s| evaluate_scores(self.config, &row.method, s, &self.prepared.test_labels)) {
            Ok((m, curves)) => {
                row.metrics = Some(m);
                row.curves = curves;
            }
            Err(e) => row.failure = Some(e),
        }
    }
}

fn baseline_rows(ctx: &RepeatContext) -> Vec<EvalResult> {
    let config = ctx.config;
    let g = &ctx.prepared.train_graph;
    let modes: Vec<NeighborhoodMode> = if g.is_directed() {
        config.baselines.directed_modes.clone()
    } else {
        vec![NeighborhoodMode::Undirected]
    };
    let options = config.general.heuristic_options();
    let mut rows = Vec::new();
    for &h in &config.baselines.heuristics {
        for &mode in &modes {
            let name = if g.is_directed() {
                format!("{h}_{mode}")
            } else {
                h.to_string()
            };
            let mut row = ctx.row(&name, ResultKind::Baseline);
            let start = Instant::now();
            let seed = derive_seed(ctx.seed, &format!("method/{name}"));
            let scores = heuristics::score(h, g, &ctx.prepared.test_pairs, mode, &options, seed)
                .map(|s| s.scores)
                .map_err(|e| e.to_string());
            if h == Heuristic::Random {
                row.parameters.push(("seed".to_string(), seed.to_string()));
            }
            ctx.fill(&mut row, scores);
            row.total_seconds = start.elapsed().as_secs_f64();
            rows.push(row);
        }
    }
    rows
}

fn remove_dir(path: &Path, keep: bool) {
    if !keep {
        let _ = fs::remove_dir_all(path);
    }
}

fn method_rows(ctx: &RepeatContext, method: &MethodSpec, scratch_root: &Path) -> Vec<EvalResult> {
    let config = ctx.config;
    let keep = config.general.keep_scratch;
    let start = Instant::now();
    let seed = derive_seed(ctx.seed, &format!("method/{}", method.name));
    let scratch = scratch_root.join(&method.name);
    let base = ctx.row(&method.name, method.category.into());
    let failed = |reason: String, params: Vec<(String, String)>| {
        let mut row = base.clone();
        row.failure = Some(reason);
        row.parameters = params;
        row.total_seconds = start.elapsed().as_secs_f64();
        vec![row]
    };

    let tuned = match tune_hyperparameters(config, method, ctx.prepared, &scratch, seed) {
        Ok(t) => t,
        Err(reason) => return failed(format!("tuning failed: {reason}"), Vec::new()),
    };
    let final_dir = scratch.join("final");
    let run = match run_method(config, method, &tuned.chosen, ctx.prepared, &final_dir, seed) {
        Ok(r) => r,
        Err(reason) => return failed(reason, tuned.chosen),
    };
    let mut rows = Vec::new();
    let mut all_ok = true;
    for out in run.outputs {
        let mut row = base.clone();
        row.operator = out.operator;
        row.parameters = tuned.chosen.clone();
        row.c = out.c;
        ctx.fill(&mut row, out.scores);
        all_ok &= row.succeeded();
        row.train_seconds = run.exec_seconds;
        row.total_seconds = tuned.seconds + run.exec_seconds + out.extra_seconds;
        rows.push(row);
    }
    remove_dir(&final_dir, keep || !all_ok);
    let _ = fs::remove_dir(&scratch);
    rows
}

fn prune_empty(dir: &Path, stop: &Path) {
    let mut d = Some(dir);
    while let Some(p) = d {
        if p == stop || fs::remove_dir(p).is_err() {
            break;
        }
        d = p.parent();
    }
}

fn spec_for(config: &EvalConfig, seed: u64) -> SplitSpec {
    let g = &config.general;
    SplitSpec {
        train_fraction: g.train_fraction,
        train_nonedges: g.train_nonedges,
        test_nonedges: g.test_nonedges,
        world: g.world,
        seed,
    }
}

/// Every network, every repeat: split, baselines, then methods.
pub fn run_evaluation(config: &EvalConfig) -> Result<Report, PipelineError> {
    let out_dir = config.output_dir();
    fs::create_dir_all(&out_dir).map_err(|e| PipelineError::io(&out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.general.workers)
        .build()
        .map_err(|e| PipelineError::io(&out_dir, e))?;

    let mut results = Vec::new();
    let mut setups = Vec::new();
    for net in &config.networks {
        let g = load_network(config, net)?;
        let mut setup = None;
        for repeat in 0..config.general.repeats {
            let seed = repeat_seed(config.general.seed, repeat);
            let split = split_graph(&g, &spec_for(config, seed), config.general.split_algorithm).map_err(|e| {
                PipelineError::Network {
                    network: net.name.clone(),
                    message: e.to_string(),
                }
            })?;
            log::info!(
                "{} rep {repeat}: {} train / {} test edges, checksum {}",
                net.name,
                split.train_edges.len(),
                split.test_edges.len(),
                split.checksum()
            );
            let dir = out_dir.join("splits").join(&net.name).join(format!("rep{repeat}"));
            let prepared = prepare_split(&g, split, &dir)?;
            if setup.is_none() {
                setup = Some(network_setup(config, net, &g, &prepared));
            }
            let ctx = RepeatContext {
                config,
                network: &net.name,
                repeat,
                seed,
                prepared: &prepared,
            };
            results.extend(baseline_rows(&ctx));
            let scratch_root = out_dir.join("scratch").join(&net.name).join(format!("rep{repeat}"));
            let per_method: Vec<Vec<EvalResult>> = pool.install(|| {
                config
                    .methods
                    .par_iter()
                    .map(|m| method_rows(&ctx, m, &scratch_root))
                    .collect()
            });
            results.extend(per_method.into_iter().flatten());
            // only empty directories go; failed runs keep their scratch
            prune_empty(&scratch_root, &out_dir);
        }
        setups.extend(setup);
    }
    log_failures(&results);
    Ok(Report {
        metrics: config.general.metrics.clone(),
        curves: config.general.curves.clone(),
        networks: setups,
        results,
    })
}

fn network_setup(config: &EvalConfig, net: &NetworkConfig, g: &Graph, p: &PreparedSplit) -> NetworkSetup {
    let calibrated =
        config.baselines.heuristics.is_empty() && config.methods.iter().all(|m| m.category != MethodCategory::EndToEnd);
    let setup = EvalSetup {
        train_edges: p.split.train_edges.len(),
        train_nonedges: p.split.train_nonedges.len(),
        test_edges: p.split.test_edges.len(),
        test_nonedges: p.split.test_nonedges.len(),
        open_world: config.general.world == crate::split::World::Open,
        metrics: config.general.metrics.clone(),
        calibrated_scores: calibrated,
    };
    NetworkSetup {
        name: net.name.clone(),
        directed: g.is_directed(),
        nodes: g.node_count(),
        edges: g.edge_count(),
        train_fraction: config.general.train_fraction,
        world: config.general.world,
        test_edges: setup.test_edges,
        test_nonedges: setup.test_nonedges,
        advisories: recommend_metrics(&setup),
    }
}

fn log_failures(results: &[EvalResult]) {
    for r in results.iter().filter(|r| !r.succeeded()) {
        log::warn!(
            "{} failed on {} rep {}: {}",
            r.label(),
            r.network,
            r.repeat,
            r.failure.as_deref().unwrap_or("unknown")
        );
    }
}
