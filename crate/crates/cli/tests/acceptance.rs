//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Runs without the libtest harness so the report prints in order and in full.
//! Set `QRC_WRITE_BASELINE=1` to (re)write the frozen theory-scan baseline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use qrc_core::experiment::{
    confidence_term, evolve, raw_input_baseline, replicate, run_case, run_windowed, stm_delay_sweep,
    theory_scan, windowed_row, Backend, EvolutionMode, ExperimentConfig, ObservableSet, Pipeline,
    ScanRow, ZzSelection,
};
use qrc_core::readout::{fit_ridge, r2_score, FeatureMatrix};
use qrc_core::rng::RandomStream;
use qrc_core::sim::{estimate_expectations, PauliString, StateVector};
use qrc_core::tasks::TaskKind;
use qrc_oracle::{evolve_dense, lstsq_r2, random_circuit, ridge_pinv, zero_state};

const SEEDS: usize = 10;
const BASELINE: &str = "tests/data/theory_scan_baseline.csv";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn simulator_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let n = 1 + seed as usize % 4;
        let gates = random_circuit(n, 30, seed);
        let mut s = StateVector::new_zero(n).unwrap();
        s.apply_all(&gates).unwrap();
        let dense = evolve_dense(&gates, n, &zero_state(n));
        for (a, b) in s.amplitudes().iter().zip(dense.iter()) {
            worst = worst.max((a - b).norm());
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-12 && t < Duration::from_secs(5),
        format!("max amplitude deviation {worst:.2e} over 100 circuits, {}", secs(t)),
    )
}

fn unitarity() -> Outcome {
    let gates = random_circuit(10, 10_000, 2024);
    let mut s = StateVector::new_zero(10).unwrap();
    s.apply_all(&gates).unwrap();
    let dev = (s.norm_sqr() - 1.0).abs();
    outcome(dev <= 1e-8, format!("|‖ψ‖² − 1| = {dev:.2e} after 10⁴ gates on 10 qubits"))
}

fn ridge_correctness() -> Outcome {
    let mut rng = RandomStream::new(31337);
    let (mut worst, mut shrink_ok, mut nested_ok) = (0.0f64, 0, 0);
    for i in 0..100 {
        let n = 10 + i % 40;
        let m = 2 + i % 5;
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..m).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let alpha = [0.0, 1e-4, 1e-2, 1.0][i % 4];
        let model = fit_ridge(&x, &y, alpha).unwrap();
        let (w, b) = ridge_pinv(&rows, &y, alpha);
        for (a, e) in model.weights.iter().zip(&w) {
            worst = worst.max((a - e).abs());
        }
        worst = worst.max((model.bias - b).abs());

        let norms: Vec<f64> = [0.0, 1e-3, 1e-1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&a| fit_ridge(&x, &y, a).unwrap().weights.iter().map(|v| v * v).sum::<f64>())
            .collect();
        if norms.windows(2).all(|p| p[1] <= p[0]) {
            shrink_ok += 1;
        }

        let sub = x.select_columns(&[0]).unwrap();
        let r2_sub = r2_score(&fit_ridge(&sub, &y, 0.0).unwrap().predict(&sub).unwrap(), &y).unwrap();
        let r2_full = r2_score(&model_at_zero(&x, &y), &y).unwrap();
        let oracle_sub = lstsq_r2(&rows.iter().map(|r| vec![r[0]]).collect::<Vec<_>>(), &y);
        if r2_full >= r2_sub && (r2_sub - oracle_sub).abs() <= 1e-10 {
            nested_ok += 1;
        }
    }
    outcome(
        worst <= 1e-10 && shrink_ok == 100 && nested_ok == 100,
        format!("max |Δ| vs pseudo-inverse {worst:.2e}; shrinkage {shrink_ok}/100; nesting {nested_ok}/100"),
    )
}

fn model_at_zero(x: &FeatureMatrix, y: &[f64]) -> Vec<f64> {
    fit_ridge(x, y, 0.0).unwrap().predict(x).unwrap()
}

fn parity_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(TaskKind::Parity, 0);
    c.mode = EvolutionMode::Windowed { k: 3 };
    c.observables = ObservableSet { local_z: true, zz: ZzSelection::AllPairs };
    c.task.window = 2;
    c.task.length = 600;
    c.washout = 50;
    c
}

fn parity() -> Outcome {
    let start = Instant::now();
    let base = parity_config();
    let (mut acc, mut raw) = (Vec::new(), Vec::new());
    for r in 0..SEEDS {
        let c = replicate(&base, r);
        let q = run_case(&c).unwrap();
        let b = raw_input_baseline(&c, 3).unwrap();
        assert_eq!(q.features.timestamps(), b.features.timestamps(), "baseline rows differ");
        acc.push(q.test_score());
        raw.push(b.test_score());
    }
    let t = start.elapsed();
    let good = acc.iter().filter(|&&a| a >= 0.95).count();
    let raw_mean = mean(&raw);
    outcome(
        good >= 8 && raw_mean <= 0.6 && t < Duration::from_secs(120),
        format!(
            "reservoir test accuracy ≥ 0.95 on {good}/10 [{}]; raw-input baseline seed-mean {raw_mean:.3} [{}]; {}",
            fmt_list(&acc),
            fmt_list(&raw),
            secs(t)
        ),
    )
}

fn stm_memory() -> Outcome {
    let base = ExperimentConfig::defaults(TaskKind::Stm, 0);
    let delays = [1, 2, 4, 8];
    let curve = stm_delay_sweep(&base, &delays, SEEDS).unwrap();
    let r2: Vec<f64> = curve.iter().map(|&(_, v)| v).collect();
    let decreasing = r2.windows(2).all(|w| w[1] < w[0] + 0.02);
    let drop = r2[0] - r2[3];

    // Not part of the criterion: the same sweep with windowed evolution,
    // which resets the register each step and so cannot keep stale inputs.
    let mut windowed = base.clone();
    windowed.mode = EvolutionMode::Windowed { k: 3 };
    let diag: Vec<f64> = stm_delay_sweep(&windowed, &delays, SEEDS).unwrap().iter().map(|&(_, v)| v).collect();

    outcome(
        decreasing && drop >= 0.1,
        format!(
            "recurrent seed-mean test R² at τ=1,2,4,8: [{}]; R²(1) − R²(8) = {drop:.3} (needs ≥ 0.1); \
             for reference reupload_k=3 gives [{}]",
            fmt_list(&r2),
            fmt_list(&diag)
        ),
    )
}

fn narma10() -> Outcome {
    let base = ExperimentConfig::defaults(TaskKind::Narma10, 0);
    let (mut train, mut test, mut margins) = (Vec::new(), Vec::new(), Vec::new());
    for r in 0..SEEDS {
        let c = replicate(&base, r);
        let res = run_case(&c).unwrap();
        assert!(res.train_score().is_finite() && res.test_score().is_finite());
        train.push(res.train_score());
        test.push(res.test_score());

        let mut rich = c.clone();
        rich.observables = ObservableSet { local_z: true, zz: ZzSelection::AllPairs };
        let series = rich.task.generate().unwrap();
        let all = evolve(&series, &rich).unwrap();
        let n = rich.reservoir.n_qubits;
        let z_only = all.select_columns(&(0..n).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = all.timestamps().iter().map(|&t| series.targets[t].unwrap()).collect();
        let split = (rich.train_fraction * y.len() as f64).floor() as usize;
        let score = |x: &FeatureMatrix| {
            let tx = x.slice_rows(0..split);
            r2_score(&model_at_zero(&tx, &y[..split]), &y[..split]).unwrap()
        };
        margins.push(score(&all) - score(&z_only));
    }
    let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        worst >= 0.0,
        format!(
            "train R² [{}], test R² [{}]; α=0 train R²(Z+ZZ) − R²(Z) ≥ {worst:.3e} on every seed",
            fmt_list(&train),
            fmt_list(&test)
        ),
    )
}

fn shots() -> Outcome {
    let plus = StateVector::from_amplitudes(vec![num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2])
        .unwrap();
    let err = |shots: u64, seed: u64| {
        let counts = plus.sample_counts(shots, &mut RandomStream::new(seed)).unwrap();
        estimate_expectations(&counts, shots, &[PauliString::z(0)]).unwrap()[0].abs()
    };
    let within = (0..100).filter(|&s| err(1024, s) <= 0.15).count();
    let mean_err = (0..100).map(|s| err(10_000, s)).sum::<f64>() / 100.0;
    outcome(
        within >= 95 && mean_err <= 0.02,
        format!("1024 shots: {within}/100 seeds within 0.15; 10⁴ shots: mean error {mean_err:.4}"),
    )
}

fn windowed_agreement() -> Outcome {
    let c = ExperimentConfig::defaults(TaskKind::Stm, 0);
    let series = c.task.generate().unwrap();
    let recurrent = evolve(&series, &c).unwrap();
    let pipeline = Pipeline::new(&c).unwrap();
    let mut worst = 0.0f64;
    for (i, &t) in recurrent.timestamps().iter().enumerate() {
        let w = windowed_row(&pipeline, &series.inputs, t, t + 1, Backend::Ideal).unwrap();
        for (a, b) in w.iter().zip(recurrent.row(i)) {
            worst = worst.max((a - b).abs());
        }
    }
    // Spot-check the full windowed driver too.
    let mut wc = c.clone();
    wc.mode = EvolutionMode::Windowed { k: 301 };
    let full = run_windowed(&series, &wc).unwrap();
    let row = full.timestamps().iter().position(|&t| t == 300).unwrap();
    let rec_row = recurrent.timestamps().iter().position(|&t| t == 300).unwrap();
    for (a, b) in full.row(row).iter().zip(recurrent.row(rec_row)) {
        worst = worst.max((a - b).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max |Δ| {worst:.2e} over {} rows of the default config", recurrent.n_rows()),
    )
}

fn read_baseline(path: &Path) -> Option<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).ok()?;
    Some(
        text.lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect(),
    )
}

fn theory() -> Outcome {
    let start = Instant::now();
    let base = ExperimentConfig::defaults(TaskKind::Narma10, 0);
    let delta = 0.05;
    let rows: Vec<ScanRow> = theory_scan(&base, &[2, 3, 4, 5, 6, 7], delta, SEEDS).unwrap();
    let t = start.elapsed();
    let gaps_ok = rows.iter().filter(|r| r.n_qubits >= 4).all(|r| r.gap >= 0.0);
    let closed = |m: usize| (-(delta.ln()) / (2.0 * m as f64)).powf(0.5);
    let conf_dev = rows
        .iter()
        .map(|r| (r.confidence_term - closed(r.m)).abs().max((confidence_term(r.m, delta) - closed(r.m)).abs()))
        .fold(0.0, f64::max);

    let csv = qrclab::bundle::scan_csv(&rows);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(BASELINE);
    if std::env::var_os("QRC_WRITE_BASELINE").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &csv).unwrap();
    }
    let baseline = match read_baseline(&path) {
        None => Err("baseline missing".to_string()),
        Some(b) => {
            let now: Vec<Vec<f64>> =
                csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
            let dev = b
                .iter()
                .flatten()
                .zip(now.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if b.len() == now.len() && dev <= 1e-9 {
                Ok(dev)
            } else {
                Err(format!("deviates from baseline by {dev:.2e}"))
            }
        }
    };
    let summary: Vec<String> = rows
        .iter()
        .map(|r| format!("N={} gap {:.3}", r.n_qubits, r.gap))
        .collect();
    outcome(
        gaps_ok && conf_dev <= 1e-12 && t < Duration::from_secs(600) && baseline.is_ok(),
        format!(
            "{}; confidence term |Δ| {conf_dev:.1e} (m={}); baseline {}; {}",
            summary.join(", "),
            rows[0].m,
            match &baseline {
                Ok(d) => format!("matches (max |Δ| {d:.1e})"),
                Err(e) => e.clone(),
            },
            secs(t)
        ),
    )
}

fn run_dir(out: &Path) -> PathBuf {
    fs::read_dir(out).unwrap().next().unwrap().unwrap().path()
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_qrclab");
    let mut checked = Vec::new();
    for (cmd, seed) in [("case-memory", "3"), ("case-parity", "4"), ("case-narma10", "5")] {
        let first = tmp.path().join(format!("{cmd}-a"));
        let second = tmp.path().join(format!("{cmd}-b"));
        let ok = Command::new(bin)
            .args([cmd, "--seed", seed, "--out", first.to_str().unwrap()])
            .output()
            .unwrap();
        if !ok.status.success() {
            return outcome(false, format!("{cmd} failed: {}", String::from_utf8_lossy(&ok.stderr)));
        }
        let a = run_dir(&first);
        let echo = a.join("config_echo.json");
        let ok = Command::new(bin)
            .args([cmd, "--config", echo.to_str().unwrap(), "--out", second.to_str().unwrap()])
            .output()
            .unwrap();
        if !ok.status.success() {
            return outcome(false, format!("{cmd} rerun failed: {}", String::from_utf8_lossy(&ok.stderr)));
        }
        let b = run_dir(&second);
        for f in ["predictions.csv", "features.csv"] {
            if fs::read(a.join(f)).unwrap() != fs::read(b.join(f)).unwrap() {
                return outcome(false, format!("{cmd}: {f} differs after re-run from config_echo.json"));
            }
        }
        checked.push(cmd);
    }
    outcome(true, format!("predictions.csv and features.csv byte-identical for {}", checked.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("simulator oracle equivalence", simulator_oracle),
        ("unitarity", unitarity),
        ("ridge correctness", ridge_correctness),
        ("parity benchmark", parity),
        ("STM fading memory", stm_memory),
        ("NARMA10 stress test", narma10),
        ("shots convergence", shots),
        ("windowed/recurrent agreement", windowed_agreement),
        ("theory scan", theory),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {name}: {} — {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
