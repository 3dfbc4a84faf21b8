use proptest::prelude::*;
use qrc_core::encoding::{EncoderCircuit, EncoderSpec, EncodingScheme, ScaleFn};
use qrc_core::readout::{fit_ridge, FeatureMatrix};
use qrc_core::reservoir::{ReservoirCircuit, ReservoirSpec, Topology};
use qrc_core::rng::RandomStream;
use qrc_core::sim::{GateOp, PauliString, StateVector};
use qrc_core::tasks::{TaskKind, TaskSpec};

fn gate(n: usize) -> impl Strategy<Value = GateOp> {
    (0..4u8, 0..n, 1..n.max(2), 0.0..std::f64::consts::TAU).prop_map(move |(k, t, off, a)| {
        let c = (t + off) % n;
        match (k, n) {
            (0, _) | (2, 1) => GateOp::ry(t, a),
            (1, _) | (3, 1) => GateOp::rz(t, a),
            (2, _) => GateOp::cry(c, t, a),
            _ => GateOp::crz(c, t, a),
        }
    })
}

fn circuit() -> impl Strategy<Value = (usize, Vec<GateOp>)> {
    (1..6usize).prop_flat_map(|n| (Just(n), prop::collection::vec(gate(n), 0..60)))
}

fn evolved(n: usize, gates: &[GateOp]) -> StateVector {
    let mut s = StateVector::new_zero(n).unwrap();
    s.apply_all(gates).unwrap();
    s
}

proptest! {
    #[test]
    fn gates_preserve_norm((n, gates) in circuit()) {
        prop_assert!((evolved(n, &gates).norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn expectations_are_bounded_and_non_destructive((n, gates) in circuit(), a in 0..6usize, b in 0..6usize) {
        let s = evolved(n, &gates);
        let before = s.clone();
        let obs = if a % n == b % n { PauliString::z(a % n) } else { PauliString::zz(a % n, b % n).unwrap() };
        let e = s.expectation(&obs).unwrap();
        prop_assert!(e.abs() <= 1.0 + 1e-12);
        prop_assert_eq!(s, before);
    }

    #[test]
    fn sampling_is_reproducible((n, gates) in circuit(), seed in any::<u64>(), shots in 1..2000u64) {
        let s = evolved(n, &gates);
        let a = s.sample_counts(shots, &mut RandomStream::new(seed)).unwrap();
        let b = s.sample_counts(shots, &mut RandomStream::new(seed)).unwrap();
        prop_assert_eq!(a.values().sum::<u64>(), shots);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reservoir_is_input_independent(n in 2..6usize, depth in 1..4usize, seed in any::<u64>(), u in 0.0..1.0f64) {
        let spec = ReservoirSpec { n_qubits: n, depth, topology: Topology::Ring, seed };
        let res = ReservoirCircuit::build(&spec).unwrap();
        let enc = EncoderCircuit::build(&EncoderSpec {
            n_qubits: n, scheme: EncodingScheme::Angle, scale: ScaleFn::PiLinear, layers: 1, interleave_seed: 0,
        }).unwrap();
        let mut s = StateVector::new_zero(n).unwrap();
        enc.encode(&[u], &mut s).unwrap();
        res.apply(&mut s).unwrap();
        let fresh = ReservoirCircuit::build(&spec).unwrap();
        prop_assert_eq!(res.gates(), fresh.gates());
    }

    #[test]
    fn ridge_norm_shrinks(seed in any::<u64>(), a1 in 0.0..5.0f64, a2 in 0.0..5.0f64) {
        let mut rng = RandomStream::new(seed);
        let rows: Vec<Vec<f64>> = (0..25).map(|_| (0..3).map(|_| rng.uniform()).collect()).collect();
        let y: Vec<f64> = (0..25).map(|_| rng.uniform()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let norm = |a: f64| fit_ridge(&x, &y, a).unwrap().weights.iter().map(|w| w * w).sum::<f64>();
        prop_assert!(norm(hi) <= norm(lo) * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn stm_targets_are_delayed_inputs(seed in any::<u64>(), delay in 1..20usize, length in 30..200usize) {
        let spec = TaskSpec { kind: TaskKind::Stm, length, seed, delay, window: 2 };
        let ts = spec.generate().unwrap();
        for t in 0..length {
            match ts.targets[t] {
                Some(y) => prop_assert_eq!(y, ts.inputs[t - delay]),
                None => prop_assert!(t < delay),
            }
        }
    }
}
