//! L2-regularized logistic regression with k-fold selection of the
//! inverse regularization strength `C`.
//!
//! The objective for weights `w` and bias `b` over `N` standardized rows is
//! the mean negative log-likelihood plus `|w|^2 / (2 C N)`; the bias is not
//! penalized. It is minimized with Newton steps and a backtracking line
//! search.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::metrics::auc_from_scores;
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("training data has a single class ({positives} positives, {negatives} negatives)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("{folds} folds need at least {folds} examples per class, smallest class has {smallest}")]
    TooFewPerClass { folds: usize, smallest: usize },
    #[error("at least 2 folds are required, got {0}")]
    TooFewFolds(usize),
    #[error("grid must be non-empty, positive and finite")]
    InvalidGrid,
    #[error("model expects {expected} features, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("classifier used before fitting")]
    NotFitted,
}

/// Feature rows with binary labels (`true` = edge).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatures {
    features: DMatrix<f64>,
    labels: Vec<bool>,
}

impl LabeledFeatures {
    pub fn new(features: DMatrix<f64>, labels: Vec<bool>) -> Result<Self, ClassifierError> {
        if features.nrows() != labels.len() {
            return Err(ClassifierError::LengthMismatch {
                rows: features.nrows(),
                labels: labels.len(),
            });
        }
        check_finite(&features)?;
        Ok(LabeledFeatures { features, labels })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn class_counts(&self) -> (usize, usize) {
        let p = self.labels.iter().filter(|&&l| l).count();
        (p, self.len() - p)
    }

    fn require_both_classes(&self) -> Result<(), ClassifierError> {
        match self.class_counts() {
            (0, q) => Err(ClassifierError::SingleClass {
                positives: 0,
                negatives: q,
            }),
            (p, 0) => Err(ClassifierError::SingleClass {
                positives: p,
                negatives: 0,
            }),
            _ => Ok(()),
        }
    }

    fn subset(&self, rows: &[usize]) -> (DMatrix<f64>, Vec<bool>) {
        let x = self.features.select_rows(rows.iter());
        let y = rows.iter().map(|&r| self.labels[r]).collect();
        (x, y)
    }
}

fn check_finite(x: &DMatrix<f64>) -> Result<(), ClassifierError> {
    for col in 0..x.ncols() {
        for row in 0..x.nrows() {
            if !x[(row, col)].is_finite() {
                return Err(ClassifierError::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

/// Per-feature z-score parameters. Constant columns keep a scale of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(d: usize) -> Self {
        Standardizer {
            mean: vec![0.0; d],
            scale: vec![1.0; d],
        }
    }

    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd > 1e-12 * m.abs().max(1.0) { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            for v in col.iter_mut() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMetric {
    #[default]
    Auc,
    Accuracy,
}

impl FromStr for CvMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auc" => Ok(CvMetric::Auc),
            "accuracy" => Ok(CvMetric::Accuracy),
            other => Err(format!("unknown cv metric '{other}' (auc, accuracy)")),
        }
    }
}

impl fmt::Display for CvMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CvMetric::Auc => "auc",
            CvMetric::Accuracy => "accuracy",
        })
    }
}

/// `count` values spaced evenly in log10 between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub grid: Vec<f64>,
    pub metric: CvMetric,
    pub standardize: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 10,
            grid: log_grid(1e-4, 1e4, 10),
            metric: CvMetric::Auc,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub standardizer: Standardizer,
    /// mean validation score per grid value, empty for a fixed-`C` fit
    pub cv_scores: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl FittedModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 500;

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn margins(x: &DMatrix<f64>, w: &DVector<f64>, b: f64) -> DVector<f64> {
    let mut z = x * w;
    z.add_scalar_mut(b);
    z
}

/// Penalized objective value at `(w, b)` on already standardized rows.
pub fn penalized_loss(x: &DMatrix<f64>, y: &[bool], w: &DVector<f64>, b: f64, c: f64) -> f64 {
    let n = y.len() as f64;
    let z = margins(x, w, b);
    let nll: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| softplus(zi) - if yi { zi } else { 0.0 })
        .sum();
    nll / n + w.norm_squared() / (2.0 * c * n)
}

/// Gradient of [`penalized_loss`]: `(d/dw, d/db)`.
pub fn penalized_gradient(x: &DMatrix<f64>, y: &[bool], w: &DVector<f64>, b: f64, c: f64) -> (DVector<f64>, f64) {
    let n = y.len() as f64;
    let z = margins(x, w, b);
    let r = DVector::from_iterator(
        y.len(),
        z.iter()
            .zip(y)
            .map(|(&zi, &yi)| sigmoid(zi) - if yi { 1.0 } else { 0.0 }),
    );
    let gw = x.tr_mul(&r) / n + w / (c * n);
    (gw, r.sum() / n)
}

struct Solution {
    w: DVector<f64>,
    b: f64,
    iterations: usize,
    gradient_norm: f64,
}

fn newton(x: &DMatrix<f64>, y: &[bool], c: f64) -> Solution {
    let (n, d) = (x.nrows(), x.ncols());
    let nf = n as f64;
    let mut w = DVector::zeros(d);
    let mut b = 0.0;
    let mut f = penalized_loss(x, y, &w, b, c);
    let mut iterations = 0;
    let mut gradient_norm;
    loop {
        let (gw, gb) = penalized_gradient(x, y, &w, b, c);
        gradient_norm = (gw.norm_squared() + gb * gb).sqrt();
        if gradient_norm <= GRADIENT_TOLERANCE || iterations >= MAX_ITERATIONS {
            break;
        }
        iterations += 1;

        // Hessian over [w; b]
        let z = margins(x, &w, b);
        let s: Vec<f64> = z
            .iter()
            .map(|&zi| {
                let p = sigmoid(zi);
                p * (1.0 - p)
            })
            .collect();
        let mut xa = DMatrix::zeros(n, d + 1);
        xa.view_mut((0, 0), (n, d)).copy_from(x);
        xa.column_mut(d).fill(1.0);
        let mut xs = xa.clone();
        for (i, mut row) in xs.row_iter_mut().enumerate() {
            row *= s[i] / nf;
        }
        let mut h = xa.tr_mul(&xs);
        for j in 0..d {
            h[(j, j)] += 1.0 / (c * nf);
        }
        let mut g = DVector::zeros(d + 1);
        g.rows_mut(0, d).copy_from(&gw);
        g[d] = gb;

        let step = match h.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -g.clone(),
        };
        let slope = g.dot(&step);
        let step = if slope < 0.0 { step } else { -g.clone() };
        let slope = g.dot(&step);

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let w_new = &w + step.rows(0, d) * t;
            let b_new = b + step[d] * t;
            let f_new = penalized_loss(x, y, &w_new, b_new, c);
            if f_new <= f + 1e-4 * t * slope {
                w = w_new;
                b = b_new;
                f = f_new;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no representable decrease left
            let (gw, gb) = penalized_gradient(x, y, &w, b, c);
            gradient_norm = (gw.norm_squared() + gb * gb).sqrt();
            break;
        }
    }
    Solution {
        w,
        b,
        iterations,
        gradient_norm,
    }
}

fn fit_rows(x: &DMatrix<f64>, y: &[bool], c: f64, standardize: bool) -> FittedModel {
    let standardizer = if standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(x.ncols())
    };
    let xs = standardizer.apply(x);
    let sol = newton(&xs, y, c);
    FittedModel {
        weights: sol.w.iter().copied().collect(),
        bias: sol.b,
        c,
        standardizer,
        cv_scores: Vec::new(),
        iterations: sol.iterations,
        gradient_norm: sol.gradient_norm,
    }
}

/// Fits with a given `C`, no cross-validation.
pub fn fit_fixed_c(data: &LabeledFeatures, c: f64, standardize: bool) -> Result<FittedModel, ClassifierError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(ClassifierError::InvalidGrid);
    }
    data.require_both_classes()?;
    Ok(fit_rows(&data.features, &data.labels, c, standardize))
}

/// Stratified fold index per example: each class is shuffled and dealt
/// round-robin.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let mut assignment = vec![0; labels.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

fn validation_score(model: &FittedModel, x: &DMatrix<f64>, y: &[bool], metric: CvMetric) -> f64 {
    let p = predict_proba(model, x).expect("dimension checked by construction");
    match metric {
        CvMetric::Auc => auc_from_scores(&p, y).expect("stratified folds hold both classes"),
        CvMetric::Accuracy => p.iter().zip(y).filter(|(&pi, &yi)| (pi >= 0.5) == yi).count() as f64 / y.len() as f64,
    }
}

/// Selects `C` by mean validation score over stratified folds (ties go to
/// the smaller `C`) and refits on all rows.
pub fn fit_cv(data: &LabeledFeatures, options: &CvOptions, seed: u64) -> Result<FittedModel, ClassifierError> {
    if options.folds < 2 {
        return Err(ClassifierError::TooFewFolds(options.folds));
    }
    if options.grid.is_empty() || options.grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(ClassifierError::InvalidGrid);
    }
    data.require_both_classes()?;
    let (p, q) = data.class_counts();
    if p.min(q) < options.folds {
        return Err(ClassifierError::TooFewPerClass {
            folds: options.folds,
            smallest: p.min(q),
        });
    }

    let mut grid = options.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let assignment = stratified_folds(&data.labels, options.folds, seed);
    let splits: Vec<_> = (0..options.folds)
        .map(|k| {
            let train: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != k).collect();
            let valid: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == k).collect();
            (data.subset(&train), data.subset(&valid))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..options.folds).map(move |k| (g, k)))
        .collect();
    let fold_scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let ((xt, yt), (xv, yv)) = &splits[k];
            let model = fit_rows(xt, yt, grid[g], options.standardize);
            validation_score(&model, xv, yv, options.metric)
        })
        .collect();

    let cv_scores: Vec<f64> = fold_scores
        .chunks(options.folds)
        .map(|s| s.iter().sum::<f64>() / options.folds as f64)
        .collect();
    let mut best = 0;
    for (i, &s) in cv_scores.iter().enumerate() {
        if s > cv_scores[best] {
            best = i;
        }
    }
    log::debug!("cv scores {:?}, chose C={}", cv_scores, grid[best]);

    let mut model = fit_rows(&data.features, &data.labels, grid[best], options.standardize);
    model.cv_scores = cv_scores;
    Ok(model)
}

/// `sigmoid(w . x + b)` per row after standardization, kept strictly
/// inside (0, 1).
pub fn predict_proba(model: &FittedModel, features: &DMatrix<f64>) -> Result<Vec<f64>, ClassifierError> {
    if features.ncols() != model.dim() {
        return Err(ClassifierError::Dimension {
            expected: model.dim(),
            found: features.ncols(),
        });
    }
    let lo = f64::MIN_POSITIVE;
    let hi = 1.0 - f64::EPSILON / 2.0;
    let out = features
        .row_iter()
        .map(|row| {
            let z: f64 = row
                .iter()
                .enumerate()
                .map(|(j, &v)| model.weights[j] * (v - model.standardizer.mean[j]) / model.standardizer.scale[j])
                .sum::<f64>()
                + model.bias;
            sigmoid(z).clamp(lo, hi)
        })
        .collect();
    Ok(out)
}

/// 1 iff the probability is at least `threshold`.
pub fn predict_label(
    model: &FittedModel,
    features: &DMatrix<f64>,
    threshold: f64,
) -> Result<Vec<bool>, ClassifierError> {
    Ok(predict_proba(model, features)?
        .into_iter()
        .map(|p| p >= threshold)
        .collect())
}

/// Plug-in point for the downstream predictor. Implementations must be
/// deterministic for a given seed.
pub trait BinaryClassifier: Send + Sync {
    fn fit(&mut self, data: &LabeledFeatures, seed: u64) -> Result<(), ClassifierError>;
    fn predict_scores(&self, features: &DMatrix<f64>) -> Result<Vec<f64>, ClassifierError>;
}

#[derive(Debug, Clone, Default)]
pub struct LogisticRegressionCv {
    pub options: CvOptions,
    pub model: Option<FittedModel>,
}

impl LogisticRegressionCv {
    pub fn new(options: CvOptions) -> Self {
        LogisticRegressionCv { options, model: None }
    }
}

impl BinaryClassifier for LogisticRegressionCv {
    fn fit(&mut self, data: &LabeledFeatures, seed: u64) -> Result<(), ClassifierError> {
        self.model = Some(fit_cv(data, &self.options, seed)?);
        Ok(())
    }

    fn predict_scores(&self, features: &DMatrix<f64>) -> Result<Vec<f64>, ClassifierError> {
        predict_proba(self.model.as_ref().ok_or(ClassifierError::NotFitted)?, features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_data() -> LabeledFeatures {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..20 {
            x.push(1.0);
            y.push(true);
            x.push(-1.0);
            y.push(false);
        }
        LabeledFeatures::new(DMatrix::from_column_slice(40, 1, &x), y).unwrap()
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> LabeledFeatures {
        let truth: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = DMatrix::from_fn(n, d, |_, _| rng.gen_range(-1.5..1.5));
        let y = (0..n)
            .map(|i| {
                let z: f64 = (0..d).map(|j| truth[j] * x[(i, j)]).sum();
                rng.gen_bool(sigmoid(z))
            })
            .collect();
        LabeledFeatures::new(x, y).unwrap()
    }

    #[test]
    fn separable_line() {
        let data = line_data();
        let m = fit_cv(&data, &CvOptions::default(), 1).unwrap();
        assert!(m.weights[0] > 0.0);
        let p = predict_proba(&m, &DMatrix::from_column_slice(2, 1, &[1.0, -1.0])).unwrap();
        assert!(p[0] > 0.5 && 0.5 > p[1]);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn mirrored_data_is_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..30 {
            let v: f64 = rng.gen_range(-2.0..2.0);
            let l = rng.gen_bool(0.5 + v.clamp(-1.0, 1.0) * 0.4);
            x.extend([v, -v]);
            y.extend([l, !l]);
        }
        let data = LabeledFeatures::new(DMatrix::from_column_slice(60, 1, &x), y).unwrap();
        let m = fit_cv(&data, &CvOptions::default(), 3).unwrap();
        let p = predict_proba(&m, &DMatrix::from_element(1, 1, 0.0)).unwrap();
        assert!((p[0] - 0.5).abs() <= 1e-6, "{}", p[0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let d = rng.gen_range(1..6);
            let data = random_problem(&mut rng, 30, d);
            let x = data.features();
            let w = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let b = rng.gen_range(-1.0..1.0);
            let c = 10f64.powf(rng.gen_range(-2.0..2.0));
            let (gw, gb) = penalized_gradient(x, data.labels(), &w, b, c);
            let h = 1e-5;
            for j in 0..=d {
                let (mut wp, mut wm, mut bp, mut bm) = (w.clone(), w.clone(), b, b);
                if j < d {
                    wp[j] += h;
                    wm[j] -= h;
                } else {
                    bp += h;
                    bm -= h;
                }
                let numeric = (penalized_loss(x, data.labels(), &wp, bp, c)
                    - penalized_loss(x, data.labels(), &wm, bm, c))
                    / (2.0 * h);
                let analytic = if j < d { gw[j] } else { gb };
                let rel = (numeric - analytic).abs() / analytic.abs().max(1e-3);
                assert!(rel <= 1e-6, "rel error {rel}");
            }
        }
    }

    #[test]
    fn optimum_has_small_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data = random_problem(&mut rng, 200, 5);
        for c in [1e-3, 1.0, 1e3] {
            let m = fit_fixed_c(&data, c, true).unwrap();
            assert!(m.gradient_norm <= 1e-5, "C={c}: {}", m.gradient_norm);
        }
    }

    #[test]
    fn scaling_a_column_is_absorbed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = random_problem(&mut rng, 150, 4);
        let mut scaled = data.features().clone();
        scaled.column_mut(2).scale_mut(250.0);
        let scaled = LabeledFeatures::new(scaled, data.labels().to_vec()).unwrap();
        let opts = CvOptions {
            folds: 5,
            ..CvOptions::default()
        };
        let a = fit_cv(&data, &opts, 9).unwrap();
        let b = fit_cv(&scaled, &opts, 9).unwrap();
        let pa = predict_proba(&a, data.features()).unwrap();
        let pb = predict_proba(&b, scaled.features()).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data = random_problem(&mut rng, 120, 3);
        let a = fit_cv(&data, &CvOptions::default(), 11).unwrap();
        let b = fit_cv(&data, &CvOptions::default(), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cv_scores.len(), 10);
        assert!(CvOptions::default().grid.contains(&a.c));
    }

    #[test]
    fn zero_model_predicts_half() {
        let m = FittedModel {
            weights: vec![0.0; 3],
            bias: 0.0,
            c: 1.0,
            standardizer: Standardizer::identity(3),
            cv_scores: vec![],
            iterations: 0,
            gradient_norm: 0.0,
        };
        let x = DMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        assert_eq!(predict_proba(&m, &x).unwrap(), vec![0.5; 4]);
    }

    #[test]
    fn proba_matches_formula_and_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data = random_problem(&mut rng, 100, 4);
        let m = fit_fixed_c(&data, 1.0, true).unwrap();
        let x = DMatrix::from_fn(50, 4, |_, _| rng.gen_range(-3.0..3.0));
        let p = predict_proba(&m, &x).unwrap();
        for i in 0..50 {
            let mut z = m.bias;
            for j in 0..4 {
                z += m.weights[j] * (x[(i, j)] - m.standardizer.mean[j]) / m.standardizer.scale[j];
            }
            assert!((p[i] - 1.0 / (1.0 + (-z).exp())).abs() <= 1e-12);
        }
        let j = (0..4).find(|&j| m.weights[j] > 0.0).expect("some positive weight");
        let mut bumped = x.clone();
        bumped.column_mut(j).add_scalar_mut(0.5);
        let q = predict_proba(&m, &bumped).unwrap();
        assert!(p.iter().zip(&q).all(|(a, b)| b >= a));
    }

    #[test]
    fn labels_use_at_least() {
        let m = FittedModel {
            weights: vec![1.0],
            bias: 0.0,
            c: 1.0,
            standardizer: Standardizer::identity(1),
            cv_scores: vec![],
            iterations: 0,
            gradient_norm: 0.0,
        };
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let x = DMatrix::from_column_slice(3, 1, &[logit(0.7), logit(0.3), 0.0]);
        assert_eq!(predict_label(&m, &x, 0.5).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn input_errors() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let single = LabeledFeatures::new(x.clone(), vec![true; 4]).unwrap();
        assert!(matches!(
            fit_cv(&single, &CvOptions::default(), 0),
            Err(ClassifierError::SingleClass { .. })
        ));
        let small = LabeledFeatures::new(x.clone(), vec![true, false, true, false]).unwrap();
        assert_eq!(
            fit_cv(&small, &CvOptions::default(), 0),
            Err(ClassifierError::TooFewPerClass { folds: 10, smallest: 2 })
        );
        let mut bad = x.clone();
        bad[(2, 0)] = f64::NAN;
        assert_eq!(
            LabeledFeatures::new(bad, vec![true, false, true, false]),
            Err(ClassifierError::NonFinite { row: 2, col: 0 })
        );
        assert!(LabeledFeatures::new(x, vec![true]).is_err());
        let m = fit_fixed_c(&small, 1.0, true).unwrap();
        assert!(matches!(
            predict_proba(&m, &DMatrix::zeros(1, 2)),
            Err(ClassifierError::Dimension { .. })
        ));
    }

    #[test]
    fn grid_defaults() {
        let g = log_grid(1e-4, 1e4, 10);
        assert_eq!(g.len(), 10);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[9] - 1e4).abs() < 1e-8);
        let folds = stratified_folds(&[true, true, true, false, false, false], 3, 1);
        for k in 0..3 {
            assert_eq!(folds[..3].iter().filter(|&&f| f == k).count(), 1);
            assert_eq!(folds[3..].iter().filter(|&&f| f == k).count(), 1);
        }
    }

    #[test]
    fn trait_object_fits_and_predicts() {
        let mut clf: Box<dyn BinaryClassifier> = Box::new(LogisticRegressionCv::default());
        assert_eq!(
            clf.predict_scores(&DMatrix::zeros(1, 1)),
            Err(ClassifierError::NotFitted)
        );
        clf.fit(&line_data(), 2).unwrap();
        assert_eq!(clf.predict_scores(&DMatrix::zeros(3, 1)).unwrap().len(), 3);
    }
}
