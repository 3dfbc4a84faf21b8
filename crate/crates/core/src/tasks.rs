//! Seeded synthetic benchmarks: short-term memory, temporal parity, NARMA10.
//!
//! Every generator is a pure function of `(T, seed, params)`. Inputs are
//! delivered already normalized to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, QrcError, Result};
use crate::fmt_float;
use crate::rng::RandomStream;

/// Number of NARMA lags and first defined forecasting step.
pub const NARMA_ORDER: usize = 10;
const NARMA_DIVERGENCE: f64 = 10.0;
const NARMA_MAX_RESEEDS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[serde(alias = "memory")]
    Stm,
    Parity,
    Narma10,
}

impl TaskKind {
    /// Parity is scored by accuracy, the regression tasks by R².
    pub fn is_classification(self) -> bool {
        matches!(self, TaskKind::Parity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub length: usize,
    pub seed: u64,
    pub delay: usize,
    pub window: usize,
}

impl TaskSpec {
    /// The longest lag a target depends on.
    pub fn horizon(&self) -> usize {
        match self.kind {
            TaskKind::Stm => self.delay,
            TaskKind::Parity => self.window,
            TaskKind::Narma10 => NARMA_ORDER,
        }
    }

    pub fn generate(&self) -> Result<TimeSeries> {
        match self.kind {
            TaskKind::Stm => gen_stm(self.length, self.seed, self.delay),
            TaskKind::Parity => gen_parity(self.length, self.seed, self.window),
            TaskKind::Narma10 => gen_narma10(self.length, self.seed),
        }
    }
}

/// Inputs and targets of equal length; `targets[t]` is `None` before `valid_from`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub inputs: Vec<f64>,
    pub targets: Vec<Option<f64>>,
    pub valid_from: usize,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// CSV with header `t,u,y,defined`; undefined targets leave `y` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u,y,defined\n");
        for (t, (u, y)) in self.inputs.iter().zip(&self.targets).enumerate() {
            let (y, defined) = match y {
                Some(v) => (fmt_float(*v), 1),
                None => (String::new(), 0),
            };
            out.push_str(&format!("{t},{},{y},{defined}\n", fmt_float(*u)));
        }
        out
    }
}

/// `u_t ~ U[0, 1]`, `y_t = u_{t−τ}`.
pub fn gen_stm(length: usize, seed: u64, delay: usize) -> Result<TimeSeries> {
    if delay == 0 {
        return config_err("STM delay must be at least 1");
    }
    if delay >= length {
        return config_err(format!("STM delay {delay} must be shorter than the series ({length})"));
    }
    let mut rng = RandomStream::new(seed);
    let inputs: Vec<f64> = (0..length).map(|_| rng.uniform()).collect();
    Ok(stm_from_inputs(inputs, delay))
}

pub(crate) fn stm_from_inputs(inputs: Vec<f64>, delay: usize) -> TimeSeries {
    let targets = (0..inputs.len()).map(|t| t.checked_sub(delay).map(|s| inputs[s])).collect();
    TimeSeries { inputs, targets, valid_from: delay }
}

/// `u_t ~ Bernoulli(1/2)`, `y_t` = XOR of the last `window` inputs.
pub fn gen_parity(length: usize, seed: u64, window: usize) -> Result<TimeSeries> {
    if window < 2 {
        return config_err(format!("parity window must be at least 2, got {window}"));
    }
    if window > length {
        return config_err(format!("parity window {window} longer than the series ({length})"));
    }
    let mut rng = RandomStream::new(seed);
    let bits: Vec<u8> = (0..length).map(|_| rng.bit()).collect();
    Ok(parity_from_bits(&bits, window))
}

pub(crate) fn parity_from_bits(bits: &[u8], window: usize) -> TimeSeries {
    let targets = (0..bits.len())
        .map(|t| {
            (t + 1 >= window).then(|| f64::from(bits[t + 1 - window..=t].iter().fold(0, |a, b| a ^ b)))
        })
        .collect();
    TimeSeries {
        inputs: bits.iter().map(|&b| f64::from(b)).collect(),
        targets,
        valid_from: window - 1,
    }
}

/// Runs the NARMA10 recurrence on raw inputs `u` (values in `[0, 0.5]`).
///
/// Returns `y` of length `u.len() + 1` with `y[0..10] = 0` and
/// `y[t+1] = 0.3·y[t] + 0.05·y[t]·Σ_{i<10} y[t−i] + 1.5·u[t−9]·u[t] + 0.1`.
pub fn narma10_recurrence(u: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; u.len() + 1];
    for t in (NARMA_ORDER - 1)..u.len() {
        let window: f64 = y[t + 1 - NARMA_ORDER..=t].iter().sum();
        y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * u[t + 1 - NARMA_ORDER] * u[t] + 0.1;
    }
    y
}

/// One-step-ahead NARMA10: the target at step `t` is `y[t+1]`.
///
/// Diverging draws (any `|y| > 10`) are replaced by the draw at `seed + 1`,
/// repeatedly, with a warning logged for each substitution.
pub fn gen_narma10(length: usize, seed: u64) -> Result<TimeSeries> {
    if length < 30 {
        return config_err(format!("NARMA10 needs T ≥ 30, got {length}"));
    }
    for attempt in 0..NARMA_MAX_RESEEDS {
        let s = seed.wrapping_add(attempt);
        let mut rng = RandomStream::new(s);
        let raw: Vec<f64> = (0..length).map(|_| rng.uniform_range(0.0, 0.5)).collect();
        let y = narma10_recurrence(&raw);
        if y.iter().all(|v| v.is_finite() && v.abs() <= NARMA_DIVERGENCE) {
            if attempt > 0 {
                log::warn!("NARMA10 seed {seed} diverged; substituted seed {s}");
            }
            let targets = (0..length).map(|t| (t >= NARMA_ORDER).then(|| y[t + 1])).collect();
            return Ok(TimeSeries {
                inputs: raw.iter().map(|u| u / 0.5).collect(),
                targets,
                valid_from: NARMA_ORDER,
            });
        }
    }
    Err(QrcError::Data(format!(
        "NARMA10 diverged for {NARMA_MAX_RESEEDS} consecutive seeds from {seed}"
    )))
}
