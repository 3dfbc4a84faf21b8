//! Fixed random reservoir circuits (`RandomCRotReservoir`).
//!
//! Each layer is a sweep of `CRY(θ)` gates over the topology edges in
//! ascending `(control, target)` order, followed by one `RZ(φ)` per qubit.
//! All angles are drawn once from `Uniform[0, 2π)` and never change.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, QrcError, Result};
use crate::rng::RandomStream;
use crate::sim::{GateOp, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Ring,
    Chain,
    AllToAll,
}

impl Topology {
    /// Edge list as `(i, j)` pairs with `i < j`, sorted ascending and deduplicated.
    pub fn edges(self, n_qubits: usize) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = match self {
            Topology::Ring => (0..n_qubits)
                .map(|i| (i, (i + 1) % n_qubits))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| (i.min(j), i.max(j)))
                .collect(),
            Topology::Chain => (0..n_qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Topology::AllToAll => (0..n_qubits)
                .flat_map(|i| ((i + 1)..n_qubits).map(move |j| (i, j)))
                .collect(),
        };
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub topology: Topology,
    pub seed: u64,
}

/// The frozen gate list realizing `U_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirCircuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
}

impl ReservoirCircuit {
    pub fn build(spec: &ReservoirSpec) -> Result<Self> {
        Self::build_with(spec, &mut RandomStream::new(spec.seed))
    }

    /// Builds the circuit, drawing angles from `rng`.
    pub fn build_with(spec: &ReservoirSpec, rng: &mut RandomStream) -> Result<Self> {
        if spec.n_qubits < 2 {
            return config_err(format!(
                "{:?} reservoir needs at least 2 qubits, got {}",
                spec.topology, spec.n_qubits
            ));
        }
        if spec.n_qubits > crate::sim::MAX_QUBITS {
            return config_err(format!("reservoir width {} exceeds qubit limit", spec.n_qubits));
        }
        if spec.depth == 0 {
            return config_err("reservoir depth must be at least 1");
        }
        let edges = spec.topology.edges(spec.n_qubits);
        let mut gates = Vec::with_capacity(spec.depth * (edges.len() + spec.n_qubits));
        for _ in 0..spec.depth {
            for &(i, j) in &edges {
                gates.push(GateOp::cry(i, j, rng.angle()));
            }
            for q in 0..spec.n_qubits {
                gates.push(GateOp::rz(q, rng.angle()));
            }
        }
        Ok(Self { n_qubits: spec.n_qubits, gates })
    }

    /// Wraps an explicit gate list (used for audits and identity checks).
    pub fn from_gates(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return config_err(format!(
                "reservoir has {} qubits but state has {}",
                self.n_qubits,
                state.n_qubits()
            ));
        }
        state.apply_all(&self.gates)
    }

    /// One gate per line, `KIND control target angle`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(n_qubits: usize, text: &str) -> Result<Self> {
        let gates = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<GateOp>>>()?;
        Self::from_gates(n_qubits, gates).map_err(|e| QrcError::Data(e.to_string()))
    }
}
