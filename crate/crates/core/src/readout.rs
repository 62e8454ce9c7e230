//! Linear readout: closed-form ridge regression, a stochastic Adam trainer,
//! and chronological k-fold cross-validation.
//!
//! Feature matrices always carry an appended constant-1 bias column as their
//! last column, and the bias weight is never regularized. The ridge solve
//! factors the normal equations with a semidefinite-tolerant Cholesky (zero
//! pivots drop their coordinate) followed by one step of iterative
//! refinement; a relative residual above 1e-8 is reported as a solver error
//! rather than returned silently.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::nmse;

/// Per-timestep feature rows plus the bias column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// T x (D+1); last column is constant 1.
    data: Array2<f64>,
}

impl FeatureMatrix {
    /// Builds from raw feature rows (without bias); the bias column is
    /// appended here.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Degenerate("feature rows are empty".into()));
        }
        let mut data = Array2::zeros((rows.len(), d + 1));
        for (t, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "row {t} has {} features, row 0 has {d}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Divergence {
                        step: t,
                        what: format!("non-finite feature at column {j}"),
                    });
                }
                data[(t, j)] = v;
            }
            data[(t, d)] = 1.0;
        }
        Ok(FeatureMatrix { data })
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    /// Columns including the bias column.
    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    /// Feature count without the bias column.
    pub fn feature_dim(&self) -> usize {
        self.data.ncols() - 1
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    /// Copy of a contiguous row range, bias column included.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.slice(ndarray::s![range, ..]).to_owned(),
        }
    }

    /// Copy of all rows outside `fold` (concatenated in order).
    pub fn without_rows(&self, fold: std::ops::Range<usize>) -> FeatureMatrix {
        let head = self.data.slice(ndarray::s![..fold.start, ..]);
        let tail = self.data.slice(ndarray::s![fold.end.., ..]);
        FeatureMatrix {
            data: ndarray::concatenate(Axis(0), &[head, tail]).expect("row widths agree"),
        }
    }
}

/// Trained linear readout: `weights` has one entry per feature column plus
/// the trailing bias weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub weights: Vec<f64>,
    pub lambda: f64,
}

/// Loss trace of the iterative trainer, one entry per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Ridge loss ||Xw - y||^2 + lambda ||w_nonbias||^2 after each epoch.
    pub epoch_loss: Vec<f64>,
}

/// Settings for [`fit_iterative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for IterConfig {
    fn default() -> Self {
        IterConfig {
            learning_rate: 1e-3,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Cross-validation outcome at the chosen ridge coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Out-of-fold NMSE per fold, at `chosen_lambda`.
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub chosen_lambda: f64,
}

fn check_xy(x: &FeatureMatrix, y: &[f64]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            step: i,
            what: "non-finite target".into(),
        });
    }
    Ok(())
}

/// Semidefinite-tolerant lower Cholesky: pivots below tolerance zero out
/// their coordinate instead of failing, which handles consistent singular
/// systems; inconsistency is caught later by the residual check.
struct CholFactor {
    l: Vec<f64>,
    n: usize,
    dropped: Vec<bool>,
}

impl CholFactor {
    fn factor(a: &[f64], n: usize) -> CholFactor {
        let mut l = vec![0.0f64; n * n];
        let mut dropped = vec![false; n];
        let scale = (0..n)
            .map(|i| a[i * n + i])
            .fold(1.0f64, f64::max);
        let tol = 1e-12 * scale;
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= tol {
                dropped[j] = true;
                continue;
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / ljj;
            }
        }
        CholFactor { l, n, dropped }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            if self.dropped[i] {
                continue;
            }
            let mut v = b[i];
            for k in 0..i {
                v -= self.l[i * n + k] * y[k];
            }
            y[i] = v / self.l[i * n + i];
        }
        let mut w = vec![0.0f64; n];
        for i in (0..n).rev() {
            if self.dropped[i] {
                continue;
            }
            let mut v = y[i];
            for k in i + 1..n {
                v -= self.l[k * n + i] * w[k];
            }
            w[i] = v / self.l[i * n + i];
        }
        w
    }

    fn any_dropped(&self) -> bool {
        self.dropped.iter().any(|&d| d)
    }
}

/// Closed-form ridge: solves (X^T X + lambda I) w = X^T y with the bias
/// diagonal entry left unregularized.
pub fn fit_ridge(x: &FeatureMatrix, y: &[f64], lambda: f64) -> Result<ReadoutModel> {
    check_xy(x, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", lambda, "must be finite and non-negative"));
    }
    let xa = x.as_array();
    let n = x.n_cols();
    let xtx = xa.t().dot(xa);
    let y_arr = Array1::from_vec(y.to_vec());
    let xty = xa.t().dot(&y_arr);
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = xtx[(i, j)];
        }
    }
    for i in 0..n - 1 {
        a[i * n + i] += lambda; // bias entry (n-1) untouched
    }
    let b: Vec<f64> = xty.to_vec();
    let chol = CholFactor::factor(&a, n);
    let mut w = chol.solve(&b);
    // One refinement pass against the original normal equations.
    let residual = |w: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut r = b[i];
                for j in 0..n {
                    r -= a[i * n + j] * w[j];
                }
                r
            })
            .collect()
    };
    let r = residual(&w);
    let dw = chol.solve(&r);
    for i in 0..n {
        w[i] += dw[i];
    }
    let r = residual(&w);
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    if rnorm / bnorm > 1e-8 {
        let hint = if chol.any_dropped() || lambda == 0.0 {
            "; the system is rank deficient, supply lambda > 0"
        } else {
            ""
        };
        return Err(Error::Solver(format!(
            "normal equations residual {:.3e} exceeds 1e-8 relative{hint}",
            rnorm / bnorm
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite weights from ridge solve".into()));
    }
    Ok(ReadoutModel { weights: w, lambda })
}

/// yhat = X w.
pub fn predict(model: &ReadoutModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if model.weights.len() != x.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} weights, matrix has {} columns",
            model.weights.len(),
            x.n_cols()
        )));
    }
    let w = Array1::from_vec(model.weights.clone());
    Ok(x.as_array().dot(&w).to_vec())
}

fn ridge_loss(x: &FeatureMatrix, y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let xa = x.as_array();
    let wv = Array1::from_vec(w.to_vec());
    let pred = xa.dot(&wv);
    let sse: f64 = pred
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let penalty: f64 = w[..w.len() - 1].iter().map(|v| v * v).sum::<f64>() * lambda;
    sse + penalty
}

/// Stochastic Adam trainer on the same ridge objective as [`fit_ridge`]:
/// per-sample updates (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) in a
/// seed-shuffled order re-drawn every epoch, weights initialized at zero.
/// Deterministic given the seed.
pub fn fit_iterative(
    x: &FeatureMatrix,
    y: &[f64],
    lambda: f64,
    cfg: &IterConfig,
) -> Result<(ReadoutModel, TrainHistory)> {
    check_xy(x, y)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", lambda, "must be finite and non-negative"));
    }
    if !(cfg.learning_rate > 0.0) || !cfg.learning_rate.is_finite() {
        return Err(Error::invalid("learning_rate", cfg.learning_rate, "must be positive"));
    }
    if cfg.epochs == 0 {
        return Err(Error::invalid("epochs", cfg.epochs, "must be at least 1"));
    }
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let t_rows = x.n_rows();
    let n = x.n_cols();
    let xa = x.as_array();
    let mut w = vec![0.0f64; n];
    let mut m = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut step = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..t_rows).collect();
    let mut history = TrainHistory {
        epoch_loss: Vec::with_capacity(cfg.epochs),
    };
    let lam_per = 2.0 * lambda / t_rows as f64;
    for epoch in 0..cfg.epochs {
        // Fisher-Yates reshuffle each epoch from the same seeded stream.
        for i in (1..t_rows).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &t in &order {
            let row = xa.row(t);
            let pred: f64 = row
                .iter()
                .zip(w.iter())
                .map(|(a, b)| a * b)
                .sum();
            let r = pred - y[t];
            step += 1;
            let bc1 = 1.0 - BETA1.powi(step as i32);
            let bc2 = 1.0 - BETA2.powi(step as i32);
            for j in 0..n {
                let mut g = 2.0 * r * row[j];
                if j != n - 1 {
                    g += lam_per * w[j];
                }
                m[j] = BETA1 * m[j] + (1.0 - BETA1) * g;
                v[j] = BETA2 * v[j] + (1.0 - BETA2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                w[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + EPS);
            }
        }
        let loss = ridge_loss(x, y, &w, lambda);
        if !loss.is_finite() {
            return Err(Error::Divergence {
                step: epoch,
                what: "iterative training loss became non-finite".into(),
            });
        }
        history.epoch_loss.push(loss);
    }
    Ok((ReadoutModel { weights: w, lambda }, history))
}

/// Contiguous chronological fold boundaries: fold i covers
/// `[i*t/k, (i+1)*t/k)`.
pub fn fold_bounds(t: usize, k: usize) -> Vec<std::ops::Range<usize>> {
    (0..k).map(|i| (i * t / k)..((i + 1) * t / k)).collect()
}

/// Fits on every row outside `fold`; the building block of
/// [`cross_validate`], exposed so leak-freedom can be asserted directly.
pub fn fit_fold(
    x: &FeatureMatrix,
    y: &[f64],
    fold: std::ops::Range<usize>,
    lambda: f64,
) -> Result<ReadoutModel> {
    let x_train = x.without_rows(fold.clone());
    let mut y_train = Vec::with_capacity(y.len() - (fold.end - fold.start));
    y_train.extend_from_slice(&y[..fold.start]);
    y_train.extend_from_slice(&y[fold.end..]);
    fit_ridge(&x_train, &y_train, lambda)
}

/// Chronological k-fold CV over a ridge-coefficient grid. The winner is the
/// lambda with minimal mean out-of-fold NMSE; ties within 1e-12 go to the
/// largest lambda.
pub fn cross_validate(
    x: &FeatureMatrix,
    y: &[f64],
    k: usize,
    lambdas: &[f64],
) -> Result<CvReport> {
    check_xy(x, y)?;
    if k < 2 {
        return Err(Error::invalid("k", k, "need at least 2 folds"));
    }
    if x.n_rows() < 2 * k {
        return Err(Error::TooShort {
            needed: 2 * k,
            got: x.n_rows(),
        });
    }
    if lambdas.is_empty() {
        return Err(Error::invalid("lambdas", 0, "grid must be non-empty"));
    }
    for &l in lambdas {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::invalid("lambdas", l, "entries must be finite and non-negative"));
        }
    }
    let bounds = fold_bounds(x.n_rows(), k);
    let score_at = |lambda: f64| -> Result<Vec<f64>> {
        bounds
            .iter()
            .map(|fold| {
                let model = fit_fold(x, y, fold.clone(), lambda)?;
                let x_val = x.slice_rows(fold.clone());
                let pred = predict(&model, &x_val)?;
                nmse(&y[fold.clone()], &pred)
            })
            .collect()
    };
    let mut means = Vec::with_capacity(lambdas.len());
    let mut all_scores = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let scores = score_at(l)?;
        means.push(crate::metrics::mean(&scores));
        all_scores.push(scores);
    }
    let min_mean = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut chosen = 0;
    for (i, &l) in lambdas.iter().enumerate() {
        if means[i] <= min_mean + 1e-12 && l >= lambdas[chosen] {
            chosen = i;
        }
    }
    let fold_scores = all_scores.swap_remove(chosen);
    let mean = means[chosen];
    let std = crate::metrics::sample_std(&fold_scores);
    Ok(CvReport {
        fold_scores,
        mean,
        std,
        chosen_lambda: lambdas[chosen],
    })
}

/// Serializable model record for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub feature_dim: usize,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub created: String,
    pub toolkit_version: String,
}

impl ReadoutModel {
    /// Applies the readout to one raw feature row (without bias column);
    /// the trailing weight supplies the bias.
    pub fn predict_one(&self, features: &[f64]) -> Result<f64> {
        if features.len() + 1 != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, row has {}",
                self.weights.len() - 1,
                features.len()
            )));
        }
        let dot: f64 = features.iter().zip(&self.weights).map(|(f, w)| f * w).sum();
        Ok(dot + self.weights[features.len()])
    }

    pub fn to_record(&self, created: impl Into<String>) -> ModelRecord {
        ModelRecord {
            feature_dim: self.weights.len() - 1,
            lambda: self.lambda,
            weights: self.weights.clone(),
            created: created.into(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn from_record(record: &ModelRecord) -> Result<Self> {
        if record.weights.len() != record.feature_dim + 1 {
            return Err(Error::DimensionMismatch(format!(
                "record claims {} features but holds {} weights",
                record.feature_dim,
                record.weights.len()
            )));
        }
        if record.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Degenerate("record holds non-finite weights".into()));
        }
        Ok(ReadoutModel {
            weights: record.weights.clone(),
            lambda: record.lambda,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>, created: &str) -> Result<()> {
        let record = self.to_record(created);
        let text = toml::to_string_pretty(&record)
            .map_err(|e| Error::Solver(format!("model serialization failed: {e}")))?;
        std::fs::write(path.as_ref(), text).map_err(|e| Error::Io {
            path: path.as_ref().display().to_string(),
            source: e,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io {
            path: path.as_ref().display().to_string(),
            source: e,
        })?;
        let record: ModelRecord = toml::from_str(&text).map_err(|e| Error::Ingestion {
            path: path.as_ref().display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_record(&record)
    }
}
