//! Confusion counts, threshold metrics, AUC-ROC and threshold curves.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("scoresheet is empty")]
    Empty,
    #[error("score {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("both classes are required, found {positives} positives and {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },
    #[error("negative timing")]
    NegativeTiming,
}

/// Scores and binary labels for one method on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scoresheet {
    pub method: String,
    scores: Vec<f64>,
    labels: Vec<bool>,
    pub train_seconds: f64,
    pub total_seconds: f64,
}

impl Scoresheet {
    pub fn new(method: impl Into<String>, scores: Vec<f64>, labels: Vec<bool>) -> Result<Self, MetricsError> {
        if scores.len() != labels.len() {
            return Err(MetricsError::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if scores.is_empty() {
            return Err(MetricsError::Empty);
        }
        if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
            return Err(MetricsError::NonFinite { index, value });
        }
        Ok(Scoresheet {
            method: method.into(),
            scores,
            labels,
            train_seconds: 0.0,
            total_seconds: 0.0,
        })
    }

    pub fn with_timing(mut self, train_seconds: f64, total_seconds: f64) -> Result<Self, MetricsError> {
        if !(train_seconds >= 0.0 && total_seconds >= 0.0) {
            return Err(MetricsError::NegativeTiming);
        }
        self.train_seconds = train_seconds;
        self.total_seconds = total_seconds;
        Ok(self)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    fn class_counts(&self) -> Result<(usize, usize), MetricsError> {
        let p = self.positives();
        let q = self.len() - p;
        if p == 0 || q == 0 {
            return Err(MetricsError::SingleClass {
                positives: p,
                negatives: q,
            });
        }
        Ok((p, q))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

/// A score at or above `threshold` predicts an edge.
pub fn confusion_at(sheet: &Scoresheet, threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&s, &l) in sheet.scores.iter().zip(&sheet.labels) {
        match (s >= threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auc,
    Precision,
    Recall,
    Fallout,
    Miss,
    Accuracy,
    FScore,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Auc,
        Metric::Precision,
        Metric::Recall,
        Metric::Fallout,
        Metric::Miss,
        Metric::Accuracy,
        Metric::FScore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Auc => "auc",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Fallout => "fallout",
            Metric::Miss => "miss",
            Metric::Accuracy => "accuracy",
            Metric::FScore => "f_score",
        }
    }

    pub fn needs_threshold(self) -> bool {
        self != Metric::Auc
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        let key = match key.as_str() {
            "auc_roc" | "auroc" => "auc",
            "f1" | "fscore" => "f_score",
            other => other,
        };
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| format!("unknown metric '{s}'"))
    }
}

/// Denominator used for "miss".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissConvention {
    /// fn / (tp + fn), i.e. 1 - recall
    #[default]
    MissRate,
    /// fn / (fn + tn)
    FalseOmission,
}

impl FromStr for MissConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "miss_rate" => Ok(MissConvention::MissRate),
            "false_omission" => Ok(MissConvention::FalseOmission),
            other => Err(format!("unknown miss convention '{other}' (miss_rate, false_omission)")),
        }
    }
}

impl fmt::Display for MissConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissConvention::MissRate => "miss_rate",
            MissConvention::FalseOmission => "false_omission",
        })
    }
}

/// Threshold metrics. Any ratio with a zero denominator is reported as 0
/// and listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub fallout: f64,
    pub miss: f64,
    pub accuracy: f64,
    pub f_score: f64,
    pub undefined: Vec<Metric>,
}

impl FixedMetrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Auc => None,
            Metric::Precision => Some(self.precision),
            Metric::Recall => Some(self.recall),
            Metric::Fallout => Some(self.fallout),
            Metric::Miss => Some(self.miss),
            Metric::Accuracy => Some(self.accuracy),
            Metric::FScore => Some(self.f_score),
        }
    }
}

pub fn fixed_metrics(counts: ConfusionCounts, miss: MissConvention) -> FixedMetrics {
    let mut undefined = Vec::new();
    let mut ratio = |num: f64, den: f64, m: Metric| {
        if den == 0.0 {
            undefined.push(m);
            0.0
        } else {
            num / den
        }
    };
    let [tp, fn_, fp, tn] = [counts.tp, counts.fn_, counts.fp, counts.tn].map(|c| c as f64);
    let precision = ratio(tp, tp + fp, Metric::Precision);
    let recall = ratio(tp, tp + fn_, Metric::Recall);
    let fallout = ratio(fp, fp + tn, Metric::Fallout);
    let miss = match miss {
        MissConvention::MissRate => ratio(fn_, tp + fn_, Metric::Miss),
        MissConvention::FalseOmission => ratio(fn_, fn_ + tn, Metric::Miss),
    };
    let accuracy = ratio(tp + tn, tp + fn_ + fp + tn, Metric::Accuracy);
    let f_score = ratio(2.0 * precision * recall, precision + recall, Metric::FScore);
    FixedMetrics {
        precision,
        recall,
        fallout,
        miss,
        accuracy,
        f_score,
        undefined,
    }
}

/// Mann-Whitney AUC with average ranks for tied scores.
pub fn auc_roc(sheet: &Scoresheet) -> Result<f64, MetricsError> {
    let (p, q) = sheet.class_counts()?;
    let scores = &sheet.scores;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the group i..=j shares their mean
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = order[i..=j].iter().filter(|&&k| sheet.labels[k]).count();
        positive_rank_sum += rank * pos_in_group as f64;
        i = j + 1;
    }
    let (p, q) = (p as f64, q as f64);
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// AUC straight from slices; used by cross-validation.
pub fn auc_from_scores(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    auc_roc(&Scoresheet::new("", scores.to_vec(), labels.to_vec())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Roc,
    Pr,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
        }
    }
}

impl FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "roc" => Ok(CurveKind::Roc),
            "pr" | "precision_recall" => Ok(CurveKind::Pr),
            other => Err(format!("unknown curve '{other}' (roc, pr)")),
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(with = "float_text")]
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
}

/// ROC: x = fallout, y = recall. PR: x = recall, y = precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
}

impl ThresholdCurve {
    /// Trapezoidal area over the points in order.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].x - w[0].x) * (w[0].y + w[1].y) / 2.0)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,x,y\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.threshold, p.x, p.y));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        fs::write(path, self.to_csv())
    }
}

/// JSON has no infinity; non-finite thresholds are stored as strings.
mod float_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(D::Error::custom),
        }
    }
}

/// Confusion counts at every distinct score, from the highest down.
fn sweep(sheet: &Scoresheet) -> Vec<(f64, ConfusionCounts)> {
    let (p, q) = (sheet.positives(), sheet.len() - sheet.positives());
    let mut order: Vec<usize> = (0..sheet.len()).collect();
    order.sort_by(|&a, &b| sheet.scores[b].total_cmp(&sheet.scores[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < order.len() {
        let t = sheet.scores[order[i]];
        while i < order.len() && sheet.scores[order[i]] == t {
            if sheet.labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((
            t,
            ConfusionCounts {
                tp,
                fn_: p - tp,
                fp,
                tn: q - fp,
            },
        ));
    }
    out
}

/// Starts at the `+inf` threshold, (0, 0); the lowest score is the last
/// threshold and always lands on (1, 1).
pub fn roc_curve(sheet: &Scoresheet) -> Result<ThresholdCurve, MetricsError> {
    let (p, q) = sheet.class_counts()?;
    let mut points = vec![CurvePoint {
        threshold: f64::INFINITY,
        x: 0.0,
        y: 0.0,
    }];
    points.extend(sweep(sheet).into_iter().map(|(t, c)| CurvePoint {
        threshold: t,
        x: c.fp as f64 / q as f64,
        y: c.tp as f64 / p as f64,
    }));
    Ok(ThresholdCurve {
        kind: CurveKind::Roc,
        points,
    })
}

pub fn pr_curve(sheet: &Scoresheet) -> Result<ThresholdCurve, MetricsError> {
    let (p, _) = sheet.class_counts()?;
    let points = sweep(sheet)
        .into_iter()
        .map(|(t, c)| CurvePoint {
            threshold: t,
            x: c.tp as f64 / p as f64,
            // at least one prediction is positive at an observed score
            y: c.tp as f64 / (c.tp + c.fp) as f64,
        })
        .collect();
    Ok(ThresholdCurve {
        kind: CurveKind::Pr,
        points,
    })
}

pub fn curve(sheet: &Scoresheet, kind: CurveKind) -> Result<ThresholdCurve, MetricsError> {
    match kind {
        CurveKind::Roc => roc_curve(sheet),
        CurveKind::Pr => pr_curve(sheet),
    }
}

/// What the advisor needs to know about an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSetup {
    pub train_edges: usize,
    pub train_nonedges: usize,
    pub test_edges: usize,
    pub test_nonedges: usize,
    pub open_world: bool,
    pub metrics: Vec<Metric>,
    /// false when some method's scores are not probabilities (heuristics,
    /// raw end-to-end scores)
    pub calibrated_scores: bool,
}

const IMBALANCE_RATIO: f64 = 2.0;

/// Fixed rule table; the same setup always yields the same text.
pub fn recommend_metrics(setup: &EvalSetup) -> Vec<String> {
    let mut notes = Vec::new();
    let ratio = if setup.test_edges == 0 {
        f64::INFINITY
    } else {
        setup.test_nonedges as f64 / setup.test_edges as f64
    };
    if ratio >= IMBALANCE_RATIO || ratio <= 1.0 / IMBALANCE_RATIO {
        notes.push(format!(
            "Test classes are imbalanced ({} non-edges vs {} edges): prefer the precision-recall curve and F-score; accuracy and AUC-ROC can look optimistic.",
            setup.test_nonedges, setup.test_edges
        ));
        notes.push("AUC-ROC remains useful as a threshold-free ranking summary.".to_string());
    } else {
        notes.push(format!(
            "AUC-ROC recommended as the primary metric: test classes are balanced ({} non-edges vs {} edges).",
            setup.test_nonedges, setup.test_edges
        ));
        notes.push(
            "ROC curves show the full threshold trade-off; precision-recall adds little for balanced classes."
                .to_string(),
        );
    }
    if setup.metrics.iter().any(|m| m.needs_threshold()) && !setup.calibrated_scores {
        notes.push(
            "Warning: fixed-threshold metrics (precision, recall, fallout, miss, accuracy, F-score) were requested but some scores are not calibrated probabilities; compare those methods by AUC-ROC or curves instead.".to_string(),
        );
    }
    let train_ratio = if setup.train_edges == 0 {
        0.0
    } else {
        setup.train_nonedges as f64 / setup.train_edges as f64
    };
    if (train_ratio - ratio).abs() > 0.5 && ratio.is_finite() {
        notes.push(format!(
            "Train and test class ratios differ ({train_ratio:.2} vs {ratio:.2}); classifier probabilities will be shifted and threshold metrics are affected."
        ));
    }
    if setup.open_world {
        notes.push(
            "Open-world sampling: train non-edges may contain test edges, which slightly penalizes methods that use them as negatives.".to_string(),
        );
    }
    notes
}
