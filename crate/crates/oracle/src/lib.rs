//! Reference implementations for tests.
//!
//! Nothing here is used by the library itself: gates are expanded into full
//! `2^N × 2^N` matrices by Kronecker products and multiplied densely, and
//! ridge solutions come from an SVD pseudo-inverse of the augmented system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qrc_core::rng::RandomStream;
use qrc_core::sim::{GateKind, GateOp};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn identity2() -> DMatrix<Complex64> {
    DMatrix::identity(2, 2)
}

/// The 2×2 rotation, written out independently of the simulator kernels.
pub fn rotation(kind: GateKind, angle: f64) -> DMatrix<Complex64> {
    let h = angle / 2.0;
    match kind {
        GateKind::Ry | GateKind::Cry => DMatrix::from_row_slice(
            2,
            2,
            &[c(h.cos(), 0.0), c(-h.sin(), 0.0), c(h.sin(), 0.0), c(h.cos(), 0.0)],
        ),
        GateKind::Rz | GateKind::Crz => DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, -h),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, h),
            ],
        ),
    }
}

/// `⊗_{q = n−1 … 0} factors[q]`: qubit 0 is the least significant index bit,
/// so it is the rightmost Kronecker factor.
fn kron_chain(factors: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    factors
        .iter()
        .rev()
        .fold(DMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Full-register matrix of one gate.
pub fn gate_matrix(gate: &GateOp, n_qubits: usize) -> DMatrix<Complex64> {
    let u = rotation(gate.kind, gate.angle);
    match gate.control {
        None => {
            let mut f = vec![identity2(); n_qubits];
            f[gate.target] = u;
            kron_chain(&f)
        }
        Some(ctrl) => {
            let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
            let p1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
            let mut off = vec![identity2(); n_qubits];
            off[ctrl] = p0;
            let mut on = vec![identity2(); n_qubits];
            on[ctrl] = p1;
            on[gate.target] = u;
            kron_chain(&off) + kron_chain(&on)
        }
    }
}

/// Product of the gate matrices, first gate rightmost.
pub fn circuit_matrix(gates: &[GateOp], n_qubits: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    gates
        .iter()
        .fold(DMatrix::identity(dim, dim), |acc, g| gate_matrix(g, n_qubits) * acc)
}

pub fn zero_state(n_qubits: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(1 << n_qubits, c(0.0, 0.0));
    v[0] = c(1.0, 0.0);
    v
}

/// Dense evolution of `initial` through `gates`.
pub fn evolve_dense(gates: &[GateOp], n_qubits: usize, initial: &DVector<Complex64>) -> DVector<Complex64> {
    gates
        .iter()
        .fold(initial.clone(), |state, g| gate_matrix(g, n_qubits) * state)
}

/// A random circuit over the full gate set with angles in `[0, 2π)`.
pub fn random_circuit(n_qubits: usize, n_gates: usize, seed: u64) -> Vec<GateOp> {
    let mut rng = RandomStream::new(seed);
    let pick = |rng: &mut RandomStream, n: usize| ((rng.uniform() * n as f64) as usize).min(n - 1);
    (0..n_gates)
        .map(|_| {
            let angle = rng.angle();
            let target = pick(&mut rng, n_qubits);
            let kind = if n_qubits < 2 { pick(&mut rng, 2) } else { pick(&mut rng, 4) };
            let mut other = || {
                let c = pick(&mut rng, n_qubits - 1);
                if c >= target {
                    c + 1
                } else {
                    c
                }
            };
            match kind {
                0 => GateOp::ry(target, angle),
                1 => GateOp::rz(target, angle),
                2 => GateOp::cry(other(), target, angle),
                _ => GateOp::crz(other(), target, angle),
            }
        })
        .collect()
}

/// Ridge weights and bias from the pseudo-inverse of the augmented least
/// squares problem `[X 1; √α I 0] [w; b] ≈ [y; 0]`.
pub fn ridge_pinv(rows: &[Vec<f64>], y: &[f64], alpha: f64) -> (Vec<f64>, f64) {
    let n = rows.len();
    let m = rows[0].len();
    let mut a = DMatrix::<f64>::zeros(n + m, m + 1);
    let mut rhs = DVector::<f64>::zeros(n + m);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..m {
            a[(i, j)] = r[j];
        }
        a[(i, m)] = 1.0;
        rhs[i] = y[i];
    }
    for j in 0..m {
        a[(n + j, j)] = alpha.sqrt();
    }
    let pinv = a.pseudo_inverse(1e-14).expect("svd converges");
    let sol = pinv * rhs;
    (sol.rows(0, m).iter().copied().collect(), sol[m])
}

/// Plain least-squares fit with bias (α = 0) via pseudo-inverse, returning
/// training-set R².
pub fn lstsq_r2(rows: &[Vec<f64>], y: &[f64]) -> f64 {
    let (w, b) = ridge_pinv(rows, y, 0.0);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, v)| {
            let p: f64 = r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b;
            (v - p).powi(2)
        })
        .sum();
    1.0 - ss_res / ss_tot
}
