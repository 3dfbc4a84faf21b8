//! Temporal driver: evolution modes, feature assembly, the train/test
//! protocol, delay sweeps and the qubit-count scan.
//!
//! One time step applies `U(u_t) = U_R · U_Enc(u_t)`: the encoder first,
//! then the reservoir.

use rayon::prelude::*;

use crate::encoding::{EncoderCircuit, EncoderSpec, EncodingScheme, ScaleFn};
use crate::error::{config_err, QrcError, Result};
use crate::readout::{
    accuracy, fit_ridge, mse, r2_score, FeatureMatrix, Metrics, RidgeModel, DEFAULT_ALPHA,
};
use crate::reservoir::{ReservoirCircuit, ReservoirSpec, Topology};
use crate::rng::{derive_indexed_seed, derive_seed, RandomStream};
use crate::sim::{estimate_expectations, PauliString, StateVector};
use crate::tasks::{TaskKind, TaskSpec, TimeSeries};

pub const DEFAULT_QUBITS: usize = 4;
pub const DEFAULT_DEPTH: usize = 3;
pub const DEFAULT_WASHOUT: usize = 50;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;
pub const DEFAULT_LENGTH: usize = 600;
pub const DEFAULT_DELAY: usize = 2;
pub const DEFAULT_WINDOW: usize = 2;
pub const DEFAULT_SHOTS: u64 = 1024;
pub const DEFAULT_REPLICATES: usize = 10;

/// Which `ZZ` correlators to measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZzSelection {
    None,
    /// The reservoir topology edges.
    Edges,
    AllPairs,
    Pairs(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservableSet {
    pub local_z: bool,
    pub zz: ZzSelection,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self { local_z: true, zz: ZzSelection::None }
    }
}

impl ObservableSet {
    /// Local `Z_q` in qubit order, then the selected `Z_i Z_j` in ascending pair order.
    pub fn build(&self, n_qubits: usize, topology: Topology) -> Result<Vec<PauliString>> {
        let mut obs = Vec::new();
        if self.local_z {
            obs.extend((0..n_qubits).map(PauliString::z));
        }
        let mut pairs = match &self.zz {
            ZzSelection::None => Vec::new(),
            ZzSelection::Edges => topology.edges(n_qubits),
            ZzSelection::AllPairs => Topology::AllToAll.edges(n_qubits),
            ZzSelection::Pairs(p) => p.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect(),
        };
        pairs.sort_unstable();
        pairs.dedup();
        for (a, b) in pairs {
            if b >= n_qubits {
                return config_err(format!("ZZ pair ({a}, {b}) out of range for {n_qubits} qubits"));
            }
            obs.push(PauliString::zz(a, b)?);
        }
        if obs.is_empty() {
            return config_err("observable set is empty");
        }
        Ok(obs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMode {
    /// One persistent state, read non-destructively every step.
    Recurrent,
    /// Fresh `|0…0⟩` per step, driven by the last `k` inputs (`reupload_k`).
    Windowed { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Ideal,
    Shots { shots: u64, seed: u64 },
}

/// A fully resolved experiment: every seed is concrete.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    pub reservoir: ReservoirSpec,
    pub encoder: EncoderSpec,
    pub observables: ObservableSet,
    pub mode: EvolutionMode,
    pub backend: Backend,
    pub washout: usize,
    pub train_fraction: f64,
    pub alpha: f64,
    pub alpha_grid: Option<Vec<f64>>,
    pub master_seed: u64,
}

/// Child seeds of a master seed, one per random consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    pub data: u64,
    pub reservoir: u64,
    pub encoder: u64,
    pub shots: u64,
}

impl SeedTree {
    pub fn from_master(master: u64) -> Self {
        Self {
            data: derive_seed(master, "data"),
            reservoir: derive_seed(master, "reservoir"),
            encoder: derive_seed(master, "encoder"),
            shots: derive_seed(master, "shots"),
        }
    }
}

impl ExperimentConfig {
    /// Default configuration: 4 qubits, depth-3 ring reservoir, angle encoding,
    /// local `Z` readout, recurrent ideal evolution, `α = 10⁻²`.
    pub fn defaults(kind: TaskKind, master_seed: u64) -> Self {
        let seeds = SeedTree::from_master(master_seed);
        Self {
            task: TaskSpec {
                kind,
                length: DEFAULT_LENGTH,
                seed: seeds.data,
                delay: DEFAULT_DELAY,
                window: DEFAULT_WINDOW,
            },
            reservoir: ReservoirSpec {
                n_qubits: DEFAULT_QUBITS,
                depth: DEFAULT_DEPTH,
                topology: Topology::Ring,
                seed: seeds.reservoir,
            },
            encoder: EncoderSpec {
                n_qubits: DEFAULT_QUBITS,
                scheme: EncodingScheme::Angle,
                scale: ScaleFn::PiLinear,
                layers: 1,
                interleave_seed: seeds.encoder,
            },
            observables: ObservableSet::default(),
            mode: EvolutionMode::Recurrent,
            backend: Backend::Ideal,
            washout: DEFAULT_WASHOUT,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            alpha: DEFAULT_ALPHA,
            alpha_grid: None,
            master_seed,
        }
    }

    /// Replaces the master seed and re-derives every child seed from it.
    pub fn reseeded(&self, master_seed: u64) -> Self {
        let seeds = SeedTree::from_master(master_seed);
        let mut c = self.clone();
        c.master_seed = master_seed;
        c.task.seed = seeds.data;
        c.reservoir.seed = seeds.reservoir;
        c.encoder.interleave_seed = seeds.encoder;
        if let Backend::Shots { shots, .. } = c.backend {
            c.backend = Backend::Shots { shots, seed: seeds.shots };
        }
        c
    }

    /// Sets the register width of both the reservoir and the encoder.
    pub fn with_qubits(&self, n_qubits: usize) -> Self {
        let mut c = self.clone();
        c.reservoir.n_qubits = n_qubits;
        c.encoder.n_qubits = n_qubits;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.reservoir.n_qubits != self.encoder.n_qubits {
            return config_err(format!(
                "reservoir ({}) and encoder ({}) widths differ",
                self.reservoir.n_qubits, self.encoder.n_qubits
            ));
        }
        match (self.mode, self.backend) {
            (EvolutionMode::Recurrent, Backend::Shots { .. }) => {
                return config_err(
                    "recurrent mode needs the ideal backend: measuring collapses the persistent \
                     state, so shot sampling requires reupload_k (windowed) evolution",
                )
            }
            (EvolutionMode::Windowed { k: 0 }, _) => return config_err("reupload_k needs k ≥ 1"),
            (_, Backend::Shots { shots: 0, .. }) => return config_err("shots must be at least 1"),
            _ => {}
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return config_err(format!("train_fraction must be in (0, 1), got {}", self.train_fraction));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return config_err(format!("alpha must be finite and ≥ 0, got {}", self.alpha));
        }
        if let Some(grid) = &self.alpha_grid {
            if grid.is_empty() || grid.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                return config_err("alpha_grid entries must be finite and ≥ 0");
            }
        }
        let t = &self.task;
        if t.kind == TaskKind::Stm && t.delay == 0 {
            return config_err("STM delay must be at least 1");
        }
        if t.kind == TaskKind::Parity && t.window < 2 {
            return config_err("parity window must be at least 2");
        }
        let horizon = t.delay.max(t.window).max(10);
        if t.length <= self.washout + horizon {
            return config_err(format!(
                "series length {} must exceed washout + {horizon} = {}",
                t.length,
                self.washout + horizon
            ));
        }
        Ok(())
    }

    /// First time step that yields a training row.
    fn first_row(&self, series: &TimeSeries) -> usize {
        let window_start = match self.mode {
            EvolutionMode::Windowed { k } => k - 1,
            EvolutionMode::Recurrent => 0,
        };
        self.washout.max(series.valid_from).max(window_start)
    }
}

/// Built circuits and observables for one configuration.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub encoder: EncoderCircuit,
    pub reservoir: ReservoirCircuit,
    pub observables: Vec<PauliString>,
}

impl Pipeline {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        if config.reservoir.n_qubits != config.encoder.n_qubits {
            return config_err("reservoir and encoder widths differ");
        }
        Ok(Self {
            encoder: EncoderCircuit::build(&config.encoder)?,
            reservoir: ReservoirCircuit::build(&config.reservoir)?,
            observables: config
                .observables
                .build(config.reservoir.n_qubits, config.reservoir.topology)?,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.reservoir.n_qubits()
    }

    pub fn labels(&self) -> Vec<String> {
        self.observables.iter().map(PauliString::label).collect()
    }

    /// Exact expectations of every observable, clamped to `[-1, 1]`.
    pub fn read_exact(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.observables
            .iter()
            .map(|o| state.expectation(o).map(|v| v.clamp(-1.0, 1.0)))
            .collect()
    }
}

/// `|ψ⟩ ← U_R · U_Enc(u) |ψ⟩`.
pub fn step(
    state: &mut StateVector,
    u: f64,
    encoder: &EncoderCircuit,
    reservoir: &ReservoirCircuit,
) -> Result<()> {
    encoder.encode(&[u], state)?;
    reservoir.apply(state)
}

/// Features of every time step of a recurrent trajectory started from `initial`.
pub fn recurrent_trajectory(
    pipeline: &Pipeline,
    inputs: &[f64],
    initial: StateVector,
) -> Result<Vec<Vec<f64>>> {
    let mut state = initial;
    inputs
        .iter()
        .map(|&u| {
            step(&mut state, u, &pipeline.encoder, &pipeline.reservoir)?;
            pipeline.read_exact(&state)
        })
        .collect()
}

/// Recurrent evolution from `|0…0⟩`, keeping rows `t ≥ max(washout, valid_from)`.
pub fn run_recurrent(series: &TimeSeries, config: &ExperimentConfig) -> Result<FeatureMatrix> {
    if let Backend::Shots { .. } = config.backend {
        return config_err(
            "recurrent mode needs the ideal backend: measuring collapses the persistent state, \
             so shot sampling requires reupload_k (windowed) evolution",
        );
    }
    let pipeline = Pipeline::new(config)?;
    let start = config.washout.max(series.valid_from);
    let rows = recurrent_trajectory(
        &pipeline,
        &series.inputs,
        StateVector::new_zero(pipeline.n_qubits())?,
    )?;
    let mut features = FeatureMatrix::new(pipeline.labels());
    for (t, row) in rows.iter().enumerate().skip(start) {
        features.push_row(t, row)?;
    }
    Ok(features)
}

/// Features at step `t` from a fresh register driven by `u_{t−k+1} … u_t`.
pub fn windowed_row(
    pipeline: &Pipeline,
    inputs: &[f64],
    t: usize,
    k: usize,
    backend: Backend,
) -> Result<Vec<f64>> {
    if k == 0 || t + 1 < k || t >= inputs.len() {
        return config_err(format!("window of {k} inputs ending at t={t} is out of range"));
    }
    let mut state = StateVector::new_zero(pipeline.n_qubits())?;
    for &u in &inputs[t + 1 - k..=t] {
        step(&mut state, u, &pipeline.encoder, &pipeline.reservoir)?;
    }
    match backend {
        Backend::Ideal => pipeline.read_exact(&state),
        Backend::Shots { shots, seed } => {
            let mut rng = RandomStream::new(derive_indexed_seed(seed, "row", t as u64));
            let counts = state.sample_counts(shots, &mut rng)?;
            estimate_expectations(&counts, shots, &pipeline.observables)
        }
    }
}

/// Windowed (`reupload_k`) evolution; rows `t ≥ max(k−1, washout, valid_from)`.
/// With shots, one count table per row feeds every observable.
pub fn run_windowed(series: &TimeSeries, config: &ExperimentConfig) -> Result<FeatureMatrix> {
    let k = match config.mode {
        EvolutionMode::Windowed { k } => k,
        EvolutionMode::Recurrent => return config_err("run_windowed needs reupload_k mode"),
    };
    if k == 0 {
        return config_err("reupload_k needs k ≥ 1");
    }
    if series.len() < k {
        return config_err(format!("series of {} steps is shorter than k = {k}", series.len()));
    }
    let pipeline = Pipeline::new(config)?;
    let start = config.first_row(series);
    let rows = (start..series.len())
        .into_par_iter()
        .map(|t| windowed_row(&pipeline, &series.inputs, t, k, config.backend))
        .collect::<Result<Vec<_>>>()?;
    let mut features = FeatureMatrix::new(pipeline.labels());
    for (t, row) in (start..series.len()).zip(&rows) {
        features.push_row(t, row)?;
    }
    Ok(features)
}

/// Dispatches on the configured evolution mode.
pub fn evolve(series: &TimeSeries, config: &ExperimentConfig) -> Result<FeatureMatrix> {
    match config.mode {
        EvolutionMode::Recurrent => run_recurrent(series, config),
        EvolutionMode::Windowed { .. } => run_windowed(series, config),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScore {
    pub alpha: f64,
    pub train_score: f64,
    pub test_score: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub series: TimeSeries,
    pub features: FeatureMatrix,
    /// Targets aligned with the feature rows.
    pub targets: Vec<f64>,
    /// Rows `0..train_rows` are training rows, the rest test rows.
    pub train_rows: usize,
    pub model: RidgeModel,
    pub train_predictions: Vec<f64>,
    pub test_predictions: Vec<f64>,
    pub train_metrics: Metrics,
    pub test_metrics: Metrics,
    pub alpha_sweep: Option<Vec<AlphaScore>>,
}

impl RunResult {
    pub fn test_rows(&self) -> usize {
        self.targets.len() - self.train_rows
    }

    /// The task's headline score (R² or accuracy) on the training segment.
    pub fn train_score(&self) -> f64 {
        headline(self.config.task.kind, &self.train_metrics)
    }

    pub fn test_score(&self) -> f64 {
        headline(self.config.task.kind, &self.test_metrics)
    }
}

fn headline(kind: TaskKind, m: &Metrics) -> f64 {
    if kind.is_classification() {
        m.accuracy.unwrap_or(f64::NAN)
    } else {
        m.r2.unwrap_or(f64::NAN)
    }
}

fn score(kind: TaskKind, pred: &[f64], target: &[f64]) -> Result<Metrics> {
    let err = mse(pred, target)?;
    Ok(if kind.is_classification() {
        Metrics { r2: None, accuracy: Some(accuracy(pred, target, 0.5)?), mse: err }
    } else {
        Metrics { r2: Some(r2_score(pred, target)?), accuracy: None, mse: err }
    })
}

/// Generates the series, evolves it, and scores a ridge readout on a
/// contiguous train-then-test split.
pub fn run_case(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let series = config.task.generate()?;
    let features = evolve(&series, config)?;
    evaluate(config, series, features)
}

/// Splits `features` at `floor(train_fraction · rows)`, fits on the first
/// segment and scores both.
pub fn evaluate(
    config: &ExperimentConfig,
    series: TimeSeries,
    features: FeatureMatrix,
) -> Result<RunResult> {
    let targets = features
        .timestamps()
        .iter()
        .map(|&t| {
            series.targets[t]
                .ok_or_else(|| QrcError::Data(format!("feature row t={t} has no defined target")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows = targets.len();
    let train_rows = (config.train_fraction * rows as f64).floor() as usize;
    if train_rows == 0 || train_rows == rows {
        return Err(QrcError::Data(format!(
            "split of {rows} rows at fraction {} leaves an empty segment",
            config.train_fraction
        )));
    }
    let train_x = features.slice_rows(0..train_rows);
    let test_x = features.slice_rows(train_rows..rows);
    let (train_y, test_y) = targets.split_at(train_rows);
    let kind = config.task.kind;

    let model = fit_ridge(&train_x, train_y, config.alpha)?;
    let train_predictions = model.predict(&train_x)?;
    let test_predictions = model.predict(&test_x)?;
    let train_metrics = score(kind, &train_predictions, train_y)?;
    let test_metrics = score(kind, &test_predictions, test_y)?;

    let alpha_sweep = match &config.alpha_grid {
        None => None,
        Some(grid) => Some(
            grid.par_iter()
                .map(|&alpha| {
                    let m = fit_ridge(&train_x, train_y, alpha)?;
                    Ok(AlphaScore {
                        alpha,
                        train_score: headline(kind, &score(kind, &m.predict(&train_x)?, train_y)?),
                        test_score: headline(kind, &score(kind, &m.predict(&test_x)?, test_y)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };

    Ok(RunResult {
        config: config.clone(),
        series,
        features,
        targets,
        train_rows,
        model,
        train_predictions,
        test_predictions,
        train_metrics,
        test_metrics,
        alpha_sweep,
    })
}

/// Classical baseline: the raw last `k` inputs as features, on exactly the
/// rows (and therefore the split) the reservoir run would use.
pub fn raw_input_baseline(config: &ExperimentConfig, k: usize) -> Result<RunResult> {
    config.validate()?;
    if k == 0 {
        return config_err("baseline window must be at least 1");
    }
    let series = config.task.generate()?;
    let start = config.first_row(&series).max(k - 1);
    let labels = (0..k).map(|lag| format!("u_lag{lag}")).collect();
    let mut features = FeatureMatrix::new(labels);
    for t in start..series.len() {
        let row: Vec<f64> = (0..k).map(|lag| series.inputs[t - lag]).collect();
        features.push_row(t, &row)?;
    }
    evaluate(config, series, features)
}

/// Seed-derived replicate `r` of `config`.
pub fn replicate(config: &ExperimentConfig, r: usize) -> ExperimentConfig {
    config.reseeded(derive_indexed_seed(config.master_seed, "replicate", r as u64))
}

/// Mean test R² per STM delay. Each replicate shares its data, reservoir and
/// encoder seeds across all delays.
pub fn stm_delay_sweep(
    config: &ExperimentConfig,
    delays: &[usize],
    replicates: usize,
) -> Result<Vec<(usize, f64)>> {
    if config.task.kind != TaskKind::Stm {
        return config_err("delay sweep needs the stm task");
    }
    if delays.is_empty() || delays.contains(&0) {
        return config_err("delays must be non-empty and ≥ 1");
    }
    if replicates == 0 {
        return config_err("replicates must be at least 1");
    }
    let jobs: Vec<(usize, usize)> =
        (0..delays.len()).flat_map(|d| (0..replicates).map(move |r| (d, r))).collect();
    let scores = jobs
        .par_iter()
        .map(|&(d, r)| {
            let mut c = replicate(config, r);
            c.task.delay = delays[d];
            run_case(&c).map(|res| res.test_score())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(delays
        .iter()
        .enumerate()
        .map(|(d, &tau)| {
            let s = &scores[d * replicates..(d + 1) * replicates];
            (tau, s.iter().sum::<f64>() / replicates as f64)
        })
        .collect())
}

/// The `√(ln(1/δ) / 2m)` deviation term of the uniform risk bound.
pub fn confidence_term(m: usize, delta: f64) -> f64 {
    ((1.0 / delta).ln() / (2.0 * m as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n_qubits: usize,
    pub train_score: f64,
    pub test_score: f64,
    pub gap: f64,
    pub confidence_term: f64,
    pub m: usize,
    pub delta: f64,
}

/// Replicate-averaged train/test scores per register width.
///
/// Replicate `r` keeps its data seed across widths; reservoir and encoder
/// seeds are derived per width so each `N` gets its own random circuit.
pub fn theory_scan(
    base: &ExperimentConfig,
    qubits: &[usize],
    delta: f64,
    replicates: usize,
) -> Result<Vec<ScanRow>> {
    if qubits.is_empty() {
        return config_err("qubit list is empty");
    }
    if qubits.windows(2).any(|w| w[0] >= w[1]) {
        return config_err("qubit list must be strictly ascending");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return config_err(format!("delta must be in (0, 1), got {delta}"));
    }
    if replicates == 0 {
        return config_err("replicates must be at least 1");
    }
    let jobs: Vec<(usize, usize)> =
        (0..qubits.len()).flat_map(|i| (0..replicates).map(move |r| (i, r))).collect();
    let results = jobs
        .par_iter()
        .map(|&(i, r)| {
            let n = qubits[i];
            let mut c = replicate(base, r).with_qubits(n);
            c.reservoir.seed = derive_indexed_seed(c.master_seed, "reservoir", n as u64);
            c.encoder.interleave_seed = derive_indexed_seed(c.master_seed, "encoder", n as u64);
            run_case(&c).map(|res| (res.train_score(), res.test_score(), res.test_rows()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(qubits
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let chunk = &results[i * replicates..(i + 1) * replicates];
            let train = chunk.iter().map(|r| r.0).sum::<f64>() / replicates as f64;
            let test = chunk.iter().map(|r| r.1).sum::<f64>() / replicates as f64;
            let m = chunk[0].2;
            ScanRow {
                n_qubits: n,
                train_score: train,
                test_score: test,
                gap: train - test,
                confidence_term: confidence_term(m, delta),
                m,
                delta,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::GateOp;

    fn small(kind: TaskKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(kind, 11);
        c.task.length = 160;
        c.washout = 20;
        c
    }

    #[test]
    fn zero_angle_step_is_identity() {
        let enc = EncoderCircuit::build(&EncoderSpec {
            n_qubits: 2,
            scheme: EncodingScheme::Angle,
            scale: ScaleFn::PiLinear,
            layers: 1,
            interleave_seed: 0,
        })
        .unwrap();
        let res =
            ReservoirCircuit::from_gates(2, vec![GateOp::cry(0, 1, 0.0), GateOp::rz(1, 0.0)]).unwrap();
        let mut s = StateVector::new_zero(2).unwrap();
        s.apply(&GateOp::ry(1, 1.1)).unwrap();
        let before = s.clone();
        step(&mut s, 0.0, &enc, &res).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn local_z_gives_n_columns() {
        let c = small(TaskKind::Stm);
        let series = c.task.generate().unwrap();
        let f = run_recurrent(&series, &c).unwrap();
        assert_eq!(f.n_cols(), 4);
        assert_eq!(f.labels(), &["Z0", "Z1", "Z2", "Z3"]);
        assert_eq!(f.timestamps()[0], 20);
        assert!(f.rows().flatten().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn observable_selection() {
        let zz = |zz| ObservableSet { local_z: true, zz };
        assert_eq!(zz(ZzSelection::Edges).build(4, Topology::Ring).unwrap().len(), 8);
        assert_eq!(zz(ZzSelection::AllPairs).build(4, Topology::Ring).unwrap().len(), 10);
        assert_eq!(zz(ZzSelection::Edges).build(4, Topology::Chain).unwrap().len(), 7);
        let labels: Vec<String> = zz(ZzSelection::Pairs(vec![(2, 1), (0, 3)]))
            .build(4, Topology::Ring)
            .unwrap()
            .iter()
            .map(PauliString::label)
            .collect();
        assert_eq!(labels, ["Z0", "Z1", "Z2", "Z3", "Z0Z3", "Z1Z2"]);
        assert!(zz(ZzSelection::Pairs(vec![(0, 4)])).build(4, Topology::Ring).is_err());
        let none = ObservableSet { local_z: false, zz: ZzSelection::None };
        assert!(none.build(4, Topology::Ring).is_err());
    }

    #[test]
    fn washout_equal_to_length_gives_empty_matrix() {
        let mut c = small(TaskKind::Stm);
        c.washout = c.task.length;
        let series = c.task.generate().unwrap();
        let f = run_recurrent(&series, &c).unwrap();
        assert!(f.is_empty());
        assert!(matches!(fit_ridge(&f, &[], c.alpha), Err(QrcError::Fit(_))));
    }

    #[test]
    fn recurrent_rejects_shots() {
        let mut c = small(TaskKind::Stm);
        c.backend = Backend::Shots { shots: 100, seed: 1 };
        let series = c.task.generate().unwrap();
        let err = run_recurrent(&series, &c).unwrap_err();
        assert!(err.to_string().contains("collapses"));
        assert!(c.validate().is_err());
    }

    #[test]
    fn windowed_k1_is_memoryless() {
        let mut c = small(TaskKind::Stm);
        c.mode = EvolutionMode::Windowed { k: 1 };
        let p = Pipeline::new(&c).unwrap();
        let a = windowed_row(&p, &[0.1, 0.9, 0.4], 2, 1, Backend::Ideal).unwrap();
        let b = windowed_row(&p, &[0.7, 0.2, 0.4], 2, 1, Backend::Ideal).unwrap();
        assert_eq!(a, b);
        assert!(windowed_row(&p, &[0.1, 0.2], 0, 2, Backend::Ideal).is_err());
    }

    #[test]
    fn split_sizes() {
        let mut c = small(TaskKind::Stm);
        c.train_fraction = 0.5;
        // 160 steps, washout 20 → 140 rows.
        let r = run_case(&c).unwrap();
        assert_eq!(r.train_rows, 70);
        assert_eq!(r.test_rows(), 70);
        assert!(r.train_metrics.r2.is_some() && r.train_metrics.accuracy.is_none());
    }

    #[test]
    fn parity_scores_accuracy() {
        let r = run_case(&small(TaskKind::Parity)).unwrap();
        assert!(r.test_metrics.accuracy.is_some());
        assert!(r.test_metrics.r2.is_none());
    }

    #[test]
    fn run_case_is_deterministic() {
        let c = small(TaskKind::Narma10);
        let a = run_case(&c).unwrap();
        let b = run_case(&c).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(a.test_predictions, b.test_predictions);
    }

    #[test]
    fn validation_errors() {
        let mut c = small(TaskKind::Stm);
        c.train_fraction = 1.0;
        assert!(c.validate().is_err());
        let mut c = small(TaskKind::Stm);
        c.task.length = c.washout + 10;
        assert!(c.validate().is_err());
        let mut c = small(TaskKind::Stm);
        c.encoder.n_qubits = 3;
        assert!(c.validate().is_err());
        let mut c = small(TaskKind::Stm);
        c.mode = EvolutionMode::Windowed { k: 0 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn alpha_sweep_reported() {
        let mut c = small(TaskKind::Stm);
        c.alpha_grid = Some(crate::readout::default_alpha_grid());
        let r = run_case(&c).unwrap();
        let sweep = r.alpha_sweep.unwrap();
        assert_eq!(sweep.len(), 8);
        assert!(sweep.iter().all(|s| s.train_score <= 1.0));
    }

    #[test]
    fn confidence_term_values() {
        let v = confidence_term(200, 0.05);
        assert!((v - (20f64.ln() / 400.0).sqrt()).abs() < 1e-15);
        assert!((v - 0.086_540_919_130_114_26).abs() < 1e-15);
        assert!(confidence_term(usize::MAX, 0.05) < 1e-9);
    }

    #[test]
    fn sweep_and_scan_preconditions() {
        let c = small(TaskKind::Stm);
        assert!(stm_delay_sweep(&c, &[0], 1).is_err());
        assert_eq!(stm_delay_sweep(&c, &[3], 1).unwrap().len(), 1);
        assert!(theory_scan(&c, &[], 0.05, 1).is_err());
        assert!(theory_scan(&c, &[3, 2], 0.05, 1).is_err());
        assert!(theory_scan(&c, &[2, 3], 0.0, 1).is_err());
        assert!(theory_scan(&c, &[2, 3], 1.0, 1).is_err());
    }

    #[test]
    fn scan_rows() {
        let c = small(TaskKind::Narma10);
        let rows = theory_scan(&c, &[2, 3], 0.05, 2).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert_eq!(r.gap, r.train_score - r.test_score);
            assert_eq!(r.confidence_term, confidence_term(r.m, 0.05));
        }
    }

    #[test]
    fn seed_tree_reseeding() {
        let c = ExperimentConfig::defaults(TaskKind::Stm, 1);
        let d = c.reseeded(2);
        assert_eq!(d.master_seed, 2);
        assert_ne!(c.task.seed, d.task.seed);
        assert_eq!(d.reseeded(1), c);
    }
}
