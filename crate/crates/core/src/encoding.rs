//! Input encoders: plain angle encoding and data re-uploading.
//!
//! A layer is one `RY(f(u_q))` per qubit (the angle slots) followed by that
//! layer's fixed block. Fixed blocks are a `CRZ` ring plus one `RZ` per
//! qubit, with angles drawn once at build time. Plain angle encoding is a
//! single layer with an empty fixed block.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, QrcError, Result};
use crate::reservoir::Topology;
use crate::rng::RandomStream;
use crate::sim::{GateOp, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    Angle,
    Reupload,
}

/// Maps a normalized input to a rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleFn {
    /// `u ↦ π · clamp(u, 0, 1)`
    #[default]
    PiLinear,
}

impl ScaleFn {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            ScaleFn::PiLinear => PI * u.clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub n_qubits: usize,
    pub scheme: EncodingScheme,
    pub scale: ScaleFn,
    pub layers: usize,
    pub interleave_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct EncoderLayer {
    fixed: Vec<GateOp>,
}

/// An immutable encoder; only the angle-slot angles depend on the input.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderCircuit {
    n_qubits: usize,
    scale: ScaleFn,
    layers: Vec<EncoderLayer>,
}

impl EncoderCircuit {
    pub fn build(spec: &EncoderSpec) -> Result<Self> {
        Self::build_with(spec, &mut RandomStream::new(spec.interleave_seed))
    }

    pub fn build_with(spec: &EncoderSpec, rng: &mut RandomStream) -> Result<Self> {
        if !(1..=crate::sim::MAX_QUBITS).contains(&spec.n_qubits) {
            return config_err(format!("encoder width {} out of range", spec.n_qubits));
        }
        if spec.layers == 0 {
            return config_err("encoder needs at least one layer");
        }
        let layers = match spec.scheme {
            EncodingScheme::Angle => {
                if spec.layers != 1 {
                    return config_err(format!(
                        "angle encoding uses exactly one layer, got {}",
                        spec.layers
                    ));
                }
                vec![EncoderLayer { fixed: Vec::new() }]
            }
            EncodingScheme::Reupload => {
                let ring = Topology::Ring.edges(spec.n_qubits);
                (0..spec.layers)
                    .map(|_| {
                        let mut fixed: Vec<GateOp> =
                            ring.iter().map(|&(i, j)| GateOp::crz(i, j, rng.angle())).collect();
                        fixed.extend((0..spec.n_qubits).map(|q| GateOp::rz(q, rng.angle())));
                        EncoderLayer { fixed }
                    })
                    .collect()
            }
        };
        Ok(Self { n_qubits: spec.n_qubits, scale: spec.scale, layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// All input-independent gates, layer by layer.
    pub fn fixed_gates(&self) -> impl Iterator<Item = &GateOp> {
        self.layers.iter().flat_map(|l| l.fixed.iter())
    }

    /// The full gate sequence for input `u`. Inputs shorter than the register
    /// are tiled cyclically across qubits.
    pub fn gates_for(&self, u: &[f64]) -> Result<Vec<GateOp>> {
        if u.is_empty() {
            return Err(QrcError::Data("empty input vector".into()));
        }
        if let Some(bad) = u.iter().find(|v| !v.is_finite()) {
            return Err(QrcError::Data(format!("non-finite input value {bad}")));
        }
        let angles: Vec<f64> = (0..self.n_qubits).map(|q| self.scale.apply(u[q % u.len()])).collect();
        let mut gates = Vec::new();
        for layer in &self.layers {
            gates.extend(angles.iter().enumerate().map(|(q, &a)| GateOp::ry(q, a)));
            gates.extend_from_slice(&layer.fixed);
        }
        Ok(gates)
    }

    /// Applies `U_Enc(u)` to `state` in place.
    pub fn encode(&self, u: &[f64], state: &mut StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return config_err(format!(
                "encoder has {} qubits but state has {}",
                self.n_qubits,
                state.n_qubits()
            ));
        }
        state.apply_all(&self.gates_for(u)?)
    }
}
