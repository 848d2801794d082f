//! Report files.
//!
//! `results.csv`, `summary.txt` and the curve files depend only on the
//! results, so two runs with the same config and seed write identical
//! bytes. Wall-clock times go to `timings.csv`. `results.json` holds the
//! full [`Report`] and can regenerate everything.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalResult, PipelineError};
use crate::metrics::{CurveKind, Metric};
use crate::split::World;

pub const RESULTS_CSV: &str = "results.csv";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const RESULTS_JSON: &str = "results.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSetup {
    pub name: String,
    pub directed: bool,
    pub nodes: usize,
    pub edges: usize,
    pub train_fraction: f64,
    pub world: World,
    pub test_edges: usize,
    pub test_nonedges: usize,
    pub advisories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metrics: Vec<Metric>,
    pub curves: Vec<CurveKind>,
    pub networks: Vec<NetworkSetup>,
    pub results: Vec<EvalResult>,
}

impl Report {
    pub fn successes(&self) -> usize {
        self.results.iter().filter(|r| r.succeeded()).count()
    }
}

fn params_text(params: &[(String, String)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::io(path, e)
}

fn results_csv(report: &Report, path: &Path) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<String> = [
        "network",
        "repeat",
        "seed",
        "split_checksum",
        "method",
        "kind",
        "operator",
        "parameters",
        "c",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(report.metrics.iter().map(|m| m.to_string()));
    header.extend(["undefined", "curves", "status", "failure"].map(String::from));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;

    for r in &report.results {
        let mut row = vec![
            r.network.clone(),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.split_checksum.clone(),
            r.method.clone(),
            r.kind.to_string(),
            r.operator.map(|o| o.to_string()).unwrap_or_default(),
            params_text(&r.parameters),
            r.c.map(|c| c.to_string()).unwrap_or_default(),
        ];
        for &m in &report.metrics {
            row.push(r.metrics.as_ref().map(|rec| rec.get(m).to_string()).unwrap_or_default());
        }
        let undefined = r
            .metrics
            .as_ref()
            .map(|rec| {
                rec.fixed
                    .undefined
                    .iter()
                    .filter(|m| report.metrics.contains(m))
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        row.push(undefined);
        let curves: Vec<String> = r.curves.iter().map(|c| r.curve_path(c.kind)).collect();
        row.push(curves.join(";"));
        row.push(if r.succeeded() { "ok" } else { "failed" }.to_string());
        row.push(r.failure.clone().unwrap_or_default());
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| csv_error(path, e))
}

fn timings_csv(report: &Report, path: &Path) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record([
        "network",
        "repeat",
        "method",
        "operator",
        "train_seconds",
        "total_seconds",
    ])
    .map_err(|e| csv_error(path, e))?;
    for r in &report.results {
        w.write_record([
            r.network.clone(),
            r.repeat.to_string(),
            r.method.clone(),
            r.operator.map(|o| o.to_string()).unwrap_or_default(),
            format!("{:.6}", r.train_seconds),
            format!("{:.6}", r.total_seconds),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| csv_error(path, e))
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn summary(report: &Report) -> String {
    let mut out = String::new();
    for net in &report.networks {
        let rows: Vec<&EvalResult> = report.results.iter().filter(|r| r.network == net.name).collect();
        let repeats = rows.iter().map(|r| r.repeat).max().map_or(0, |m| m + 1);
        let _ = writeln!(
            out,
            "Network {}: {} nodes, {} edges, {}",
            net.name,
            net.nodes,
            net.edges,
            if net.directed { "directed" } else { "undirected" }
        );
        let _ = writeln!(
            out,
            "Train fraction {}, {} world, {} test edges and {} test non-edges, {repeats} repeat(s)",
            net.train_fraction, net.world, net.test_edges, net.test_nonedges
        );

        // label -> per-repeat values in row order
        let mut by_label: BTreeMap<String, (usize, Vec<f64>, Vec<&EvalResult>)> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            let e = by_label.entry(r.label()).or_insert((i, Vec::new(), Vec::new()));
            match &r.metrics {
                Some(m) => e.1.push(m.auc),
                None => e.2.push(r),
            }
        }
        let mut ranked: Vec<(String, f64, f64, usize)> = by_label
            .iter()
            .filter(|(_, (_, aucs, _))| !aucs.is_empty())
            .map(|(label, (_, aucs, _))| {
                let (m, s) = mean_std(aucs);
                (label.clone(), m, s, aucs.len())
            })
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let _ = writeln!(out, "\nRanking by AUC-ROC (mean ± population std over repeats):");
        let width = ranked.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (rank, (label, m, s, n)) in ranked.iter().enumerate() {
            let partial = if *n < repeats {
                format!("  ({n} of {repeats} repeats)")
            } else {
                String::new()
            };
            let _ = writeln!(out, "  {:>2}. {label:<width$}  {m:.4} ± {s:.4}{partial}", rank + 1);
        }
        if ranked.is_empty() {
            let _ = writeln!(out, "  (no successful runs)");
        }

        let mut failures: Vec<(usize, &EvalResult)> = by_label
            .values()
            .flat_map(|(first, _, failed)| failed.iter().map(move |r| (*first, *r)))
            .collect();
        failures.sort_by_key(|(first, r)| (*first, r.repeat));
        if !failures.is_empty() {
            let _ = writeln!(out, "\nFailed runs:");
            for (_, r) in failures {
                let _ = writeln!(
                    out,
                    "  {} rep {}: {}",
                    r.label(),
                    r.repeat,
                    r.failure.as_deref().unwrap_or("unknown")
                );
            }
        }

        if !net.advisories.is_empty() {
            let _ = writeln!(out, "\nMetric advice:");
            for a in &net.advisories {
                let _ = writeln!(out, "  - {a}");
            }
        }
        out.push('\n');
    }
    out
}

/// Writes every report file into `dir`.
pub fn write_report(report: &Report, dir: impl AsRef<Path>) -> Result<(), PipelineError> {
    let dir = dir.as_ref();
    if report.results.is_empty() {
        return Err(PipelineError::NoResults);
    }
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    results_csv(report, &dir.join(RESULTS_CSV))?;
    timings_csv(report, &dir.join(TIMINGS_CSV))?;
    for r in &report.results {
        for c in &r.curves {
            let path = dir.join(r.curve_path(c.kind));
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
            }
            c.write_csv(&path).map_err(|e| PipelineError::io(&path, e))?;
        }
    }
    let path = dir.join(SUMMARY_TXT);
    fs::write(&path, summary(report)).map_err(|e| PipelineError::io(&path, e))?;
    let path = dir.join(RESULTS_JSON);
    let json = serde_json::to_string_pretty(report).map_err(|e| PipelineError::io(&path, e))?;
    fs::write(&path, json + "\n").map_err(|e| PipelineError::io(&path, e))
}

pub fn load_report(path: impl AsRef<Path>) -> Result<Report, PipelineError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::io(path, e))
}
