//! Dense statevector simulation.
//!
//! Bit convention: qubit `q` is bit `q` of the basis index, so qubit 0 is the
//! least significant bit. `|01⟩` in the usual "q1 q0" reading is index 1.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, QrcError, Result};
use crate::rng::RandomStream;

/// Largest register this simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Allowed drift of `Σ|a_i|²` away from one.
pub const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "CRY")]
    Cry,
    #[serde(rename = "CRZ")]
    Crz,
}

impl GateKind {
    pub fn is_controlled(self) -> bool {
        matches!(self, GateKind::Cry | GateKind::Crz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cry => "CRY",
            GateKind::Crz => "CRZ",
        }
    }
}

/// One elementary rotation, optionally controlled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub angle: f64,
    pub target: usize,
    pub control: Option<usize>,
}

impl GateOp {
    pub fn ry(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Ry, angle, target, control: None }
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rz, angle, target, control: None }
    }

    pub fn cry(control: usize, target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Cry, angle, target, control: Some(control) }
    }

    pub fn crz(control: usize, target: usize, angle: f64) -> Self {
        Self { kind: GateKind::Crz, angle, target, control: Some(control) }
    }

    /// Checks the structural invariants against a register of `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return config_err(format!(
                "gate target {} out of range for {n_qubits} qubits",
                self.target
            ));
        }
        match (self.kind.is_controlled(), self.control) {
            (true, Some(c)) => {
                if c >= n_qubits {
                    return config_err(format!(
                        "gate control {c} out of range for {n_qubits} qubits"
                    ));
                }
                if c == self.target {
                    return config_err(format!("gate control and target are both {c}"));
                }
            }
            (true, None) => return config_err(format!("{} requires a control", self.kind.name())),
            (false, Some(_)) => {
                return config_err(format!("{} takes no control", self.kind.name()))
            }
            (false, None) => {}
        }
        if !self.angle.is_finite() {
            return Err(QrcError::Data(format!("non-finite gate angle {}", self.angle)));
        }
        Ok(())
    }

    /// The 2×2 block acting on the target qubit, row-major.
    fn matrix(&self) -> [Complex64; 4] {
        let half = 0.5 * self.angle;
        match self.kind {
            GateKind::Ry | GateKind::Cry => {
                let (s, c) = half.sin_cos();
                [
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ]
            }
            GateKind::Rz | GateKind::Crz => {
                let (s, c) = half.sin_cos();
                [
                    Complex64::new(c, -s),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(c, s),
                ]
            }
        }
    }
}

/// Audit-log form: `KIND control target angle`, with `-` for no control.
/// The angle uses Rust's shortest round-trip formatting, so parsing the line
/// back yields the identical `f64`.
impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let control = match self.control {
            Some(c) => c.to_string(),
            None => "-".to_string(),
        };
        write!(f, "{} {} {} {:?}", self.kind.name(), control, self.target, self.angle)
    }
}

impl FromStr for GateOp {
    type Err = QrcError;

    fn from_str(line: &str) -> Result<Self> {
        let bad = || QrcError::Data(format!("malformed gate line {line:?}"));
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let kind = match parts[0] {
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "CRY" => GateKind::Cry,
            "CRZ" => GateKind::Crz,
            _ => return Err(bad()),
        };
        let control = match parts[1] {
            "-" => None,
            c => Some(c.parse().map_err(|_| bad())?),
        };
        let target = parts[2].parse().map_err(|_| bad())?;
        let angle = parts[3].parse().map_err(|_| bad())?;
        Ok(GateOp { kind, angle, target, control })
    }
}

/// A Z-type Pauli product on one or two distinct qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    qubits: Vec<usize>,
}

impl PauliString {
    pub fn z(q: usize) -> Self {
        Self { qubits: vec![q] }
    }

    pub fn zz(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return config_err(format!("ZZ observable needs distinct qubits, got {a} twice"));
        }
        Ok(Self { qubits: vec![a.min(b), a.max(b)] })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    /// Column label, e.g. `Z0` or `Z1Z2`.
    pub fn label(&self) -> String {
        self.qubits.iter().map(|q| format!("Z{q}")).collect()
    }

    fn mask(&self) -> usize {
        self.qubits.iter().fold(0, |m, q| m | (1 << q))
    }

    /// `+1` when an even number of the observed bits of `index` are set.
    #[inline]
    pub fn sign(&self, index: usize) -> f64 {
        if (index & self.mask()).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self.qubits.iter().find(|&&q| q >= n_qubits) {
            Some(q) => config_err(format!("observable qubit {q} out of range for {n_qubits} qubits")),
            None => Ok(()),
        }
    }
}

/// A normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn new_zero(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return config_err(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            ));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps explicit amplitudes. The vector must have power-of-two length
    /// and unit norm; it is not renormalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return config_err(format!("amplitude count {len} is not 2^n with n ≥ 1"));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return config_err(format!("{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit"));
        }
        let state = Self { n_qubits, amplitudes };
        let drift = (state.norm_sqr() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(QrcError::Data(format!("state norm drift {drift:e} exceeds tolerance")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let m = gate.matrix();
        let t_mask = 1usize << gate.target;
        let c_mask = gate.control.map_or(0, |c| 1usize << c);
        let diagonal = matches!(gate.kind, GateKind::Rz | GateKind::Crz);
        let amps = &mut self.amplitudes;
        // Visit each pair (i, i | t_mask) once, via indices with the target bit clear.
        for i in 0..amps.len() {
            if i & t_mask != 0 || i & c_mask != c_mask {
                continue;
            }
            let j = i | t_mask;
            if diagonal {
                amps[i] *= m[0];
                amps[j] *= m[3];
            } else {
                let a0 = amps[i];
                let a1 = amps[j];
                amps[i] = m[0] * a0 + m[1] * a1;
                amps[j] = m[2] * a0 + m[3] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Exact `⟨ψ|P|ψ⟩` for a Z-type Pauli product. Does not touch the state.
    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        obs.validate(self.n_qubits)?;
        let mask = obs.mask();
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if (i & mask).count_ones() % 2 == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }

    /// Draws `shots` i.i.d. computational-basis outcomes by inverse CDF over
    /// the cumulative Born probabilities.
    pub fn sample_counts(&self, shots: u64, rng: &mut RandomStream) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return config_err("shots must be at least 1");
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        // Last index with nonzero weight, so rounding in the tail cannot land on a zero-probability outcome.
        let last_support = self
            .amplitudes
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let r = rng.uniform() * total;
            let idx = cumulative.partition_point(|&c| c <= r).min(last_support);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

/// Estimates every observable from one joint Z-basis count table.
pub fn estimate_expectations(
    counts: &BTreeMap<usize, u64>,
    shots: u64,
    observables: &[PauliString],
) -> Result<Vec<f64>> {
    if counts.is_empty() || shots == 0 {
        return Err(QrcError::Data("empty count table".into()));
    }
    let total: u64 = counts.values().sum();
    if total != shots {
        return Err(QrcError::Data(format!("counts sum to {total}, expected {shots}")));
    }
    Ok(observables
        .iter()
        .map(|obs| {
            let signed: f64 = counts.iter().map(|(&i, &c)| obs.sign(i) * c as f64).sum();
            signed / shots as f64
        })
        .collect())
}
