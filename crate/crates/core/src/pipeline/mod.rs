//! Config-driven evaluation: splits, baselines, external methods, reports.

pub mod config;
pub mod exec;
pub mod report;
pub mod run;
pub mod tune;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EdgeOperator;
use crate::metrics::{ConfusionCounts, CurveKind, FixedMetrics, Metric, ThresholdCurve};

pub use config::{parse_config, parse_config_str, ConfigError, EvalConfig, MethodCategory, MethodSpec};
pub use exec::{execute_external, ExecFailure, ExecRecord};
pub use report::{load_report, write_report, Report};
pub use run::run_evaluation;
pub use tune::{tune_hyperparameters, TuneOutcome};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("network '{network}': {message}")]
    Network { network: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("no results to report")]
    NoResults,
}

impl PipelineError {
    pub(crate) fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultKind {
    Baseline,
    NodeEmbedding,
    EdgeEmbedding,
    EndToEnd,
}

impl From<MethodCategory> for ResultKind {
    fn from(c: MethodCategory) -> Self {
        match c {
            MethodCategory::NodeEmbedding => ResultKind::NodeEmbedding,
            MethodCategory::EdgeEmbedding => ResultKind::EdgeEmbedding,
            MethodCategory::EndToEnd => ResultKind::EndToEnd,
        }
    }
}

impl fmt::Display for ResultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResultKind::Baseline => "baseline",
            ResultKind::NodeEmbedding => "node_embedding",
            ResultKind::EdgeEmbedding => "edge_embedding",
            ResultKind::EndToEnd => "end_to_end",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub auc: f64,
    pub threshold: f64,
    pub counts: ConfusionCounts,
    pub fixed: FixedMetrics,
}

impl MetricRecord {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Auc => self.auc,
            m => self.fixed.get(m).unwrap_or_default(),
        }
    }
}

/// One row of the report: a method (or one of its edge operators) on one
/// repeat of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub network: String,
    pub repeat: usize,
    /// seed of the repeat; every split of the repeat derives from it
    pub seed: u64,
    pub split_checksum: String,
    pub method: String,
    pub kind: ResultKind,
    pub operator: Option<EdgeOperator>,
    pub parameters: Vec<(String, String)>,
    /// regularization picked by the classifier, when one was used
    pub c: Option<f64>,
    pub metrics: Option<MetricRecord>,
    pub failure: Option<String>,
    pub curves: Vec<ThresholdCurve>,
    pub train_seconds: f64,
    pub total_seconds: f64,
}

impl EvalResult {
    /// Method name with the operator appended, e.g. `mock (hadamard)`.
    pub fn label(&self) -> String {
        match self.operator {
            Some(op) => format!("{} ({op})", self.method),
            None => self.method.clone(),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.metrics.is_some()
    }

    /// Path of a curve file relative to the report directory.
    pub fn curve_path(&self, kind: CurveKind) -> String {
        let op = self.operator.map(|o| format!("_{o}")).unwrap_or_default();
        format!(
            "curves/{}/rep{}/{}{op}_{kind}.csv",
            self.network, self.repeat, self.method
        )
    }
}
