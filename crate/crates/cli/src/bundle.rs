//! Run artifacts and the atomically published output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use qrc_core::experiment::{RunResult, ScanRow};
use qrc_core::fmt_float;
use qrc_core::readout::FeatureMatrix;

use crate::CliError;

/// Files collected in memory, then published as one directory.
#[derive(Debug, Default)]
pub struct Bundle {
    files: Vec<(String, String)>,
}

impl Bundle {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes everything into a hidden staging directory under `out_dir`
    /// and renames it to `run_<stamp>_<hash>` once complete; nothing is left
    /// behind on failure.
    pub fn publish(&self, out_dir: &Path, stamp: &str, hash: &str) -> Result<PathBuf, CliError> {
        let io = |what: &str, p: &Path, e: std::io::Error| CliError::Io(format!("{what} {}: {e}", p.display()));
        fs::create_dir_all(out_dir).map_err(|e| io("cannot create", out_dir, e))?;
        let base = format!("run_{stamp}_{hash}");
        let staging = out_dir.join(format!(".{base}.tmp{}", std::process::id()));
        let result = (|| {
            fs::create_dir(&staging).map_err(|e| io("cannot create", &staging, e))?;
            for (name, contents) in &self.files {
                let p = staging.join(name);
                fs::write(&p, contents).map_err(|e| io("cannot write", &p, e))?;
            }
            // Same config in the same second: keep both runs.
            let mut target = out_dir.join(&base);
            let mut n = 1;
            while target.exists() {
                n += 1;
                target = out_dir.join(format!("{base}_{n}"));
            }
            fs::rename(&staging, &target).map_err(|e| io("cannot publish", &target, e))?;
            Ok(target)
        })();
        if result.is_err() {
            let _ = fs::remove_dir_all(&staging);
        }
        result
    }
}

pub fn features_csv(features: &FeatureMatrix) -> String {
    let mut out = String::from("t");
    for l in features.labels() {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (t, row) in features.timestamps().iter().zip(features.rows()) {
        out.push_str(&t.to_string());
        for v in row {
            out.push(',');
            out.push_str(&fmt_float(*v));
        }
        out.push('\n');
    }
    out
}

pub fn predictions_csv(r: &RunResult) -> String {
    let mut out = String::from("t,target,prediction,split\n");
    let preds = r.train_predictions.iter().chain(&r.test_predictions);
    for (i, ((t, y), p)) in r.features.timestamps().iter().zip(&r.targets).zip(preds).enumerate() {
        let split = if i < r.train_rows { "train" } else { "test" };
        out.push_str(&format!("{t},{},{},{split}\n", fmt_float(*y), fmt_float(*p)));
    }
    out
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("n_qubits,train_score,test_score,gap,confidence_term\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n_qubits,
            fmt_float(r.train_score),
            fmt_float(r.test_score),
            fmt_float(r.gap),
            fmt_float(r.confidence_term)
        ));
    }
    out
}

/// Headline scores are named `*_accuracy` for parity and `*_r2` otherwise.
pub fn metrics_json(r: &RunResult) -> Value {
    let classification = r.config.task.kind.is_classification();
    let score_key = if classification { "accuracy" } else { "r2" };
    let mut m = Map::new();
    m.insert("task".into(), json!(r.config.task.kind));
    m.insert(format!("train_{score_key}"), json!(r.train_score()));
    m.insert(format!("test_{score_key}"), json!(r.test_score()));
    m.insert("train_mse".into(), json!(r.train_metrics.mse));
    m.insert("test_mse".into(), json!(r.test_metrics.mse));
    m.insert("train_rows".into(), json!(r.train_rows));
    m.insert("test_rows".into(), json!(r.test_rows()));
    m.insert("n_features".into(), json!(r.features.n_cols()));
    m.insert("alpha".into(), json!(r.model.alpha));
    m.insert("bias".into(), json!(r.model.bias));
    m.insert("weights".into(), json!(r.model.weights));
    if let Some(sweep) = &r.alpha_sweep {
        let rows: Vec<Value> = sweep
            .iter()
            .map(|s| json!({"alpha": s.alpha, format!("train_{score_key}"): s.train_score, format!("test_{score_key}"): s.test_score}))
            .collect();
        m.insert("alpha_sweep".into(), Value::Array(rows));
    }
    Value::Object(m)
}

pub fn scan_json(rows: &[ScanRow], replicates: usize) -> Value {
    json!({
        "replicates": replicates,
        "rows": rows.iter().map(|r| json!({
            "n_qubits": r.n_qubits,
            "train_score": r.train_score,
            "test_score": r.test_score,
            "gap": r.gap,
            "confidence_term": r.confidence_term,
            "m": r.m,
            "delta": r.delta,
        })).collect::<Vec<_>>(),
    })
}
