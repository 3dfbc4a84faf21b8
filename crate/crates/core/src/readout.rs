//! Closed-form ridge readout and scoring.
//!
//! The bias is never penalized. Fitting centers the design and target, solves
//! `(XcᵀXc + αI) w = Xcᵀyc` by Cholesky, then recovers `b = ȳ − x̄·w`, which
//! is the exact minimizer of `Σ (y − Xw − b)² + α‖w‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};

/// Row-major matrix of measured features, one row per retained time step.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_cols: usize,
    data: Vec<f64>,
    timestamps: Vec<usize>,
    labels: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        Self { n_cols: labels.len(), data: Vec::new(), timestamps: Vec::new(), labels }
    }

    /// Builds from plain rows; timestamps default to `0..rows`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let labels = (0..n_cols).map(|j| format!("x{j}")).collect();
        let mut m = Self::new(labels);
        for (t, r) in rows.iter().enumerate() {
            m.push_row(t, r)?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, timestamp: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(QrcError::Data(format!(
                "row has {} values, matrix has {} columns",
                row.len(),
                self.n_cols
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(QrcError::Data(format!("non-finite feature at t={timestamp}")));
        }
        self.data.extend_from_slice(row);
        self.timestamps.push(timestamp);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn timestamps(&self) -> &[usize] {
        &self.timestamps
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Rows `range`, keeping timestamps and labels.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            n_cols: self.n_cols,
            data: self.data[range.start * self.n_cols..range.end * self.n_cols].to_vec(),
            timestamps: self.timestamps[range].to_vec(),
            labels: self.labels.clone(),
        }
    }

    /// The submatrix with columns `cols`, in that order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols) {
            return Err(QrcError::Data(format!("column {c} out of range")));
        }
        let data = self.rows().flat_map(|r| cols.iter().map(move |&c| r[c])).collect();
        Ok(Self {
            n_cols: cols.len(),
            data,
            timestamps: self.timestamps.clone(),
            labels: cols.iter().map(|&c| self.labels[c].clone()).collect(),
        })
    }
}

/// Fitted linear readout `y = w·x + b`. Serializes as `{alpha, bias, weights}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub alpha: f64,
    pub bias: f64,
    pub weights: Vec<f64>,
}

impl RidgeModel {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.weights.len() {
            return Err(QrcError::Data(format!(
                "model has {} weights but features have {} columns",
                self.weights.len(),
                x.n_cols()
            )));
        }
        Ok(x.rows().map(|r| dot(&self.weights, r) + self.bias).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ridge model serializes")
    }
}

/// Ridge fit with an unpenalized bias.
pub fn fit_ridge(x: &FeatureMatrix, y: &[f64], alpha: f64) -> Result<RidgeModel> {
    fit(x, y, alpha, true)
}

/// Ridge fit with the bias fixed at zero.
pub fn fit_ridge_through_origin(x: &FeatureMatrix, y: &[f64], alpha: f64) -> Result<RidgeModel> {
    fit(x, y, alpha, false)
}

fn fit(x: &FeatureMatrix, y: &[f64], alpha: f64, intercept: bool) -> Result<RidgeModel> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(QrcError::Data(format!("alpha must be finite and ≥ 0, got {alpha}")));
    }
    let n = x.n_rows();
    let m = x.n_cols();
    if n != y.len() {
        return Err(QrcError::Data(format!("{n} feature rows but {} targets", y.len())));
    }
    if n == 0 {
        return Err(QrcError::Fit("no training rows".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(QrcError::Data("non-finite target".into()));
    }
    let params = m + usize::from(intercept);
    if alpha == 0.0 && n < params {
        return Err(QrcError::Fit(format!(
            "{n} rows cannot determine {params} parameters at alpha = 0; use alpha > 0"
        )));
    }

    let (x_mean, y_mean) = if intercept {
        let mut xm = vec![0.0; m];
        for r in x.rows() {
            for (acc, v) in xm.iter_mut().zip(r) {
                *acc += v;
            }
        }
        xm.iter_mut().for_each(|v| *v /= n as f64);
        (xm, y.iter().sum::<f64>() / n as f64)
    } else {
        (vec![0.0; m], 0.0)
    };

    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    let mut centered = vec![0.0; m];
    for (r, &yt) in x.rows().zip(y) {
        for j in 0..m {
            centered[j] = r[j] - x_mean[j];
        }
        let yc = yt - y_mean;
        for a in 0..m {
            rhs[a] += centered[a] * yc;
            for b in a..m {
                gram[a * m + b] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            gram[a * m + b] = gram[b * m + a];
        }
        gram[a * m + a] += alpha;
    }

    let weights = cholesky_solve(gram, rhs, m).ok_or_else(|| {
        QrcError::Fit(format!(
            "normal equations are singular at alpha = {alpha}; use alpha > 0"
        ))
    })?;
    let bias = if intercept { y_mean - dot(&weights, &x_mean) } else { 0.0 };
    Ok(RidgeModel { alpha, bias, weights })
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major, `n×n`).
/// Returns `None` if a pivot is not safely positive.
fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i]).fold(0.0_f64, f64::max);
    let floor = scale * 1e-13;
    // Lower factor overwrites the lower triangle.
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > floor) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_pair(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.len() != target.len() {
        return Err(QrcError::Data(format!(
            "{} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(QrcError::Data("empty prediction set".into()));
    }
    Ok(())
}

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r2_score(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_pair(pred, target)?;
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let ss_tot: f64 = target.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(QrcError::Metric("R² undefined for constant targets".into()));
    }
    let ss_res: f64 = pred.iter().zip(target).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_pair(pred, target)?;
    Ok(pred.iter().zip(target).map(|(p, y)| (y - p).powi(2)).sum::<f64>() / pred.len() as f64)
}

/// Fraction of rows where `pred ≥ threshold` agrees with a `{0, 1}` target.
pub fn accuracy(pred: &[f64], target: &[f64], threshold: f64) -> Result<f64> {
    check_pair(pred, target)?;
    let mut hits = 0usize;
    for (p, y) in pred.iter().zip(target) {
        let label = match *y {
            v if v == 0.0 => false,
            v if v == 1.0 => true,
            v => return Err(QrcError::Data(format!("classification target {v} not in {{0, 1}}"))),
        };
        if (*p >= threshold) == label {
            hits += 1;
        }
    }
    Ok(hits as f64 / pred.len() as f64)
}

/// Scores for one data segment. `r2` and `accuracy` are filled according to the task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub r2: Option<f64>,
    pub accuracy: Option<f64>,
    pub mse: f64,
}

pub const DEFAULT_ALPHA: f64 = 1e-2;

/// `10⁻⁶, 10⁻⁵, …, 10¹`.
pub fn default_alpha_grid() -> Vec<f64> {
    (-6..=1).map(|e| 10f64.powi(e)).collect()
}
