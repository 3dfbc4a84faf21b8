//! The JSON experiment file.
//!
//! Every section and every field is optional on input; whatever is missing
//! is filled from the defaults and the master seed. The echo written next to
//! the results is the same schema with every field present, so feeding it
//! back in reproduces the run exactly.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qrc_core::encoding::{EncoderSpec, EncodingScheme, ScaleFn};
use qrc_core::experiment::{
    Backend, EvolutionMode, ExperimentConfig, ObservableSet, SeedTree, ZzSelection, DEFAULT_REPLICATES,
    DEFAULT_SHOTS,
};
use qrc_core::reservoir::{ReservoirSpec, Topology};
use qrc_core::tasks::{TaskKind, TaskSpec};

use crate::CliError;

pub const DEFAULT_MASTER_SEED: u64 = 0;
pub const DEFAULT_OUTPUT_DIR: &str = "runs";
pub const DEFAULT_SCAN_QUBITS: [usize; 6] = [2, 3, 4, 5, 6, 7];
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default)]
    pub reservoir: ReservoirSection,
    #[serde(default)]
    pub encoder: EncoderSection,
    #[serde(default)]
    pub observables: ObservablesSection,
    #[serde(default)]
    pub mode: ModeSection,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub readout: ReadoutSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TaskKind>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<EncodingScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleFn>,
    /// Seed of the random slot interleaving in reupload layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZzName {
    None,
    Edges,
    AllPairs,
}

/// `"none" | "edges" | "all_pairs"` or an explicit `[[i, j], …]` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZzField {
    Named(ZzName),
    Pairs(Vec<[usize; 2]>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_z: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zz: Option<ZzField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeType {
    Recurrent,
    ReuploadK,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub kind: Option<ModeType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendType {
    Ideal,
    Shots,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub kind: Option<BackendType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub washout: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plots: Option<bool>,
    /// Also write `features.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: String,
    pub plots: bool,
    pub features: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub qubits: Vec<usize>,
    pub delta: f64,
    pub replicates: usize,
}

/// A config with every default and seed filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub output: OutputSettings,
    pub scan: Option<ScanSettings>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub qubits: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub replicates: Option<usize>,
}

pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Schema(e.inner().to_string())
        } else {
            CliError::Schema(format!("{path}: {}", e.inner()))
        }
    })
}

fn schema<T>(key: &str, msg: impl std::fmt::Display) -> Result<T, CliError> {
    Err(CliError::Schema(format!("{key}: {msg}")))
}

impl ConfigFile {
    /// Fills every gap. `kind` is the task implied by the subcommand; a file
    /// naming a different task is rejected. A `--seed` override re-derives all
    /// child seeds, including ones the file set explicitly.
    pub fn resolve(&self, kind: TaskKind, ov: &Overrides, scan: bool) -> Result<Resolved, CliError> {
        if let Some(k) = self.task.kind {
            if k != kind {
                return schema("task.kind", format!("{k:?} does not match the subcommand ({kind:?})"));
            }
        }
        let reseed = ov.seed.is_some();
        let master = ov.seed.or(self.master_seed).unwrap_or(DEFAULT_MASTER_SEED);
        let seeds = SeedTree::from_master(master);
        let pick = |explicit: Option<u64>, derived: u64| if reseed { derived } else { explicit.unwrap_or(derived) };

        let mut c = ExperimentConfig::defaults(kind, master);
        let t = &self.task;
        c.task = TaskSpec {
            kind,
            length: t.length.unwrap_or(c.task.length),
            seed: pick(t.seed, seeds.data),
            delay: t.delay.unwrap_or(c.task.delay),
            window: t.window.unwrap_or(c.task.window),
        };
        let r = &self.reservoir;
        c.reservoir = ReservoirSpec {
            n_qubits: r.n_qubits.unwrap_or(c.reservoir.n_qubits),
            depth: r.depth.unwrap_or(c.reservoir.depth),
            topology: r.topology.unwrap_or(c.reservoir.topology),
            seed: pick(r.seed, seeds.reservoir),
        };
        let e = &self.encoder;
        c.encoder = EncoderSpec {
            n_qubits: c.reservoir.n_qubits,
            scheme: e.scheme.unwrap_or(c.encoder.scheme),
            scale: e.scale.unwrap_or(c.encoder.scale),
            layers: e.layers.unwrap_or(c.encoder.layers),
            interleave_seed: pick(e.seed, seeds.encoder),
        };
        c.observables = ObservableSet {
            local_z: self.observables.local_z.unwrap_or(c.observables.local_z),
            zz: match &self.observables.zz {
                None => c.observables.zz.clone(),
                Some(ZzField::Named(ZzName::None)) => ZzSelection::None,
                Some(ZzField::Named(ZzName::Edges)) => ZzSelection::Edges,
                Some(ZzField::Named(ZzName::AllPairs)) => ZzSelection::AllPairs,
                Some(ZzField::Pairs(p)) => {
                    if let Some([a, b]) = p.iter().find(|[a, b]| a == b) {
                        return schema("observables.zz", format!("pair [{a}, {b}] repeats a qubit"));
                    }
                    ZzSelection::Pairs(p.iter().map(|&[a, b]| (a, b)).collect())
                }
            },
        };
        c.mode = match (self.mode.kind.unwrap_or(ModeType::Recurrent), self.mode.k) {
            (ModeType::Recurrent, Some(_)) => return schema("mode.k", "only valid with type reupload_k"),
            (ModeType::Recurrent, None) => EvolutionMode::Recurrent,
            (ModeType::ReuploadK, Some(0)) => return schema("mode.k", "must be at least 1"),
            (ModeType::ReuploadK, k) => EvolutionMode::Windowed { k: k.unwrap_or(1) },
        };
        let b = &self.backend;
        c.backend = match b.kind.unwrap_or(BackendType::Ideal) {
            BackendType::Ideal => {
                if b.shots.is_some() || b.shot_seed.is_some() {
                    return schema("backend", "shots/shot_seed only valid with type shots");
                }
                Backend::Ideal
            }
            BackendType::Shots => {
                let shots = b.shots.unwrap_or(DEFAULT_SHOTS);
                if shots == 0 {
                    return schema("backend.shots", "must be at least 1");
                }
                if c.mode == EvolutionMode::Recurrent {
                    return schema("backend.type", "shots needs mode reupload_k; recurrent mode is ideal-only");
                }
                Backend::Shots { shots, seed: pick(b.shot_seed, seeds.shots) }
            }
        };
        c.washout = self.protocol.washout.unwrap_or(c.washout);
        c.train_fraction = self.protocol.train_fraction.unwrap_or(c.train_fraction);
        if !(c.train_fraction > 0.0 && c.train_fraction < 1.0) {
            return schema("protocol.train_fraction", format!("must be in (0, 1), got {}", c.train_fraction));
        }
        c.alpha = self.readout.alpha.unwrap_or(c.alpha);
        if !(c.alpha >= 0.0 && c.alpha.is_finite()) {
            return schema("readout.alpha", format!("must be finite and ≥ 0, got {}", c.alpha));
        }
        c.alpha_grid = self.readout.alpha_grid.clone();
        if let Some(g) = &c.alpha_grid {
            if g.is_empty() || g.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                return schema("readout.alpha_grid", "entries must be finite and ≥ 0, list non-empty");
            }
        }
        c.validate().map_err(|e| CliError::Schema(e.to_string()))?;

        let output = OutputSettings {
            dir: ov
                .out
                .clone()
                .or_else(|| self.output.dir.clone())
                .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.to_string()),
            plots: self.output.plots.unwrap_or(true),
            features: self.output.features.unwrap_or(true),
        };

        let scan = if scan {
            let s = self.scan.clone().unwrap_or_default();
            let qubits = ov
                .qubits
                .clone()
                .or(s.qubits)
                .unwrap_or_else(|| DEFAULT_SCAN_QUBITS.to_vec());
            if qubits.is_empty() || qubits.windows(2).any(|w| w[0] >= w[1]) || qubits[0] < 2 {
                return schema("scan.qubits", "must be a non-empty strictly ascending list of widths ≥ 2");
            }
            let delta = ov.delta.or(s.delta).unwrap_or(DEFAULT_DELTA);
            if !(delta > 0.0 && delta < 1.0) {
                return schema("scan.delta", format!("must be in (0, 1), got {delta}"));
            }
            let replicates = ov.replicates.or(s.replicates).unwrap_or(DEFAULT_REPLICATES);
            if replicates == 0 {
                return schema("scan.replicates", "must be at least 1");
            }
            Some(ScanSettings { qubits, delta, replicates })
        } else {
            if self.scan.is_some() {
                return schema("scan", "only valid for theory-scan");
            }
            None
        };
        Ok(Resolved { experiment: c, output, scan })
    }
}

impl Resolved {
    /// The fully explicit file that reproduces this run.
    pub fn echo(&self) -> ConfigFile {
        let c = &self.experiment;
        let (mode_kind, k) = match c.mode {
            EvolutionMode::Recurrent => (ModeType::Recurrent, None),
            EvolutionMode::Windowed { k } => (ModeType::ReuploadK, Some(k)),
        };
        let backend = match c.backend {
            Backend::Ideal => BackendSection { kind: Some(BackendType::Ideal), shots: None, shot_seed: None },
            Backend::Shots { shots, seed } => BackendSection {
                kind: Some(BackendType::Shots),
                shots: Some(shots),
                shot_seed: Some(seed),
            },
        };
        let zz = match &c.observables.zz {
            ZzSelection::None => ZzField::Named(ZzName::None),
            ZzSelection::Edges => ZzField::Named(ZzName::Edges),
            ZzSelection::AllPairs => ZzField::Named(ZzName::AllPairs),
            ZzSelection::Pairs(p) => ZzField::Pairs(p.iter().map(|&(a, b)| [a, b]).collect()),
        };
        ConfigFile {
            master_seed: Some(c.master_seed),
            task: TaskSection {
                kind: Some(c.task.kind),
                length: Some(c.task.length),
                seed: Some(c.task.seed),
                delay: Some(c.task.delay),
                window: Some(c.task.window),
            },
            reservoir: ReservoirSection {
                n_qubits: Some(c.reservoir.n_qubits),
                depth: Some(c.reservoir.depth),
                topology: Some(c.reservoir.topology),
                seed: Some(c.reservoir.seed),
            },
            encoder: EncoderSection {
                scheme: Some(c.encoder.scheme),
                layers: Some(c.encoder.layers),
                scale: Some(c.encoder.scale),
                seed: Some(c.encoder.interleave_seed),
            },
            observables: ObservablesSection { local_z: Some(c.observables.local_z), zz: Some(zz) },
            mode: ModeSection { kind: Some(mode_kind), k },
            backend,
            protocol: ProtocolSection { washout: Some(c.washout), train_fraction: Some(c.train_fraction) },
            readout: ReadoutSection { alpha: Some(c.alpha), alpha_grid: c.alpha_grid.clone() },
            output: OutputSection {
                dir: Some(self.output.dir.clone()),
                plots: Some(self.output.plots),
                features: Some(self.output.features),
            },
            scan: self.scan.as_ref().map(|s| ScanSection {
                qubits: Some(s.qubits.clone()),
                delta: Some(s.delta),
                replicates: Some(s.replicates),
            }),
        }
    }

    /// First 8 hex digits of SHA-256 over the echo, minus the output section,
    /// so the same experiment gets the same suffix wherever it is written.
    pub fn hash(&self) -> String {
        let mut echo = self.echo();
        echo.output = OutputSection::default();
        let bytes = serde_json::to_vec(&echo).expect("config serializes");
        Sha256::digest(&bytes)[..4].iter().map(|b| format!("{b:02x}")).collect()
    }
}
