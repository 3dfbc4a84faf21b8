//! `qrclab`: config-driven runs of the reservoir benchmarks.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 runtime or fit error,
//! 3 I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use qrc_core::experiment::{run_case, theory_scan, RunResult, ScanRow};
use qrc_core::tasks::TaskKind;
use qrc_core::QrcError;

pub mod bundle;
pub mod config;
pub mod plot;

use bundle::Bundle;
use config::{ConfigFile, Overrides, Resolved};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Schema(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<QrcError> for CliError {
    fn from(e: QrcError) -> Self {
        match e {
            QrcError::Config(m) => CliError::Schema(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qrclab", version, about = "Gate-based quantum reservoir computing benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Short-term memory: reconstruct u(t − delay).
    CaseMemory(CaseArgs),
    /// Temporal parity: XOR of the last `window` bits.
    CaseParity(CaseArgs),
    /// NARMA10 one-step-ahead forecasting.
    CaseNarma10(CaseArgs),
    /// Train/test score and generalization gap against register width.
    TheoryScan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// JSON experiment file; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; re-derives every child seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parent directory for the run folder.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// Comma-separated register widths, ascending.
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    /// Confidence parameter δ ∈ (0, 1).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code; diagnostics go to stderr, the summary to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("qrclab: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("QRCLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Schema(format!("QRCLAB_THREADS: expected a non-negative integer, got '{v}'")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

/// Runs one command and returns the published run directory.
pub fn execute(command: &Command) -> Result<PathBuf, CliError> {
    let pool = thread_pool()?;
    pool.install(|| match command {
        Command::CaseMemory(a) => cmd_case(TaskKind::Stm, a),
        Command::CaseParity(a) => cmd_case(TaskKind::Parity, a),
        Command::CaseNarma10(a) => cmd_case(TaskKind::Narma10, a),
        Command::TheoryScan(a) => cmd_theory_scan(a),
    })
}

fn load(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
            config::parse(&text)
        }
    }
}

fn echo_json(resolved: &Resolved) -> String {
    let mut s = serde_json::to_string_pretty(&resolved.echo()).expect("config serializes");
    s.push('\n');
    s
}

fn stamp() -> String {
    chrono::Local::now().format("%Y%m%d_%H%M%S").to_string()
}

pub fn cmd_case(kind: TaskKind, args: &CaseArgs) -> Result<PathBuf, CliError> {
    let file = load(args.config.as_deref())?;
    let ov = Overrides { seed: args.seed, out: args.out.clone(), ..Default::default() };
    let resolved = file.resolve(kind, &ov, false)?;
    let result = run_case(&resolved.experiment)?;

    let mut b = Bundle::default();
    b.add("config_echo.json", echo_json(&resolved));
    let metrics = bundle::metrics_json(&result);
    b.add("metrics.json", serde_json::to_string_pretty(&metrics).expect("json") + "\n");
    b.add("predictions.csv", bundle::predictions_csv(&result));
    if resolved.output.features {
        b.add("features.csv", bundle::features_csv(&result.features));
    }
    if resolved.output.plots {
        b.add("predictions.svg", test_plot(&result)?);
    }
    let dir = b.publish(Path::new(&resolved.output.dir), &stamp(), &resolved.hash())?;
    println!("{}", summary(&result));
    Ok(dir)
}

fn test_plot(r: &RunResult) -> Result<String, CliError> {
    let split = r.train_rows;
    plot::predictions_plot(&r.features.timestamps()[split..], &r.targets[split..], &r.test_predictions)
}

pub fn summary(r: &RunResult) -> String {
    let key = if r.config.task.kind.is_classification() { "accuracy" } else { "r2" };
    format!(
        "{:?}: train_{key}={:.6} test_{key}={:.6} rows={}/{}",
        r.config.task.kind,
        r.train_score(),
        r.test_score(),
        r.train_rows,
        r.test_rows()
    )
    .to_lowercase()
}

pub fn cmd_theory_scan(args: &ScanArgs) -> Result<PathBuf, CliError> {
    let file = load(args.case.config.as_deref())?;
    let kind = file.task.kind.unwrap_or(TaskKind::Narma10);
    let ov = Overrides {
        seed: args.case.seed,
        out: args.case.out.clone(),
        qubits: args.qubits.clone(),
        delta: args.delta,
        replicates: args.replicates,
    };
    let resolved = file.resolve(kind, &ov, true)?;
    let scan = resolved.scan.as_ref().expect("scan settings resolved");
    let rows: Vec<ScanRow> = theory_scan(&resolved.experiment, &scan.qubits, scan.delta, scan.replicates)?;

    let mut b = Bundle::default();
    b.add("config_echo.json", echo_json(&resolved));
    let metrics = bundle::scan_json(&rows, scan.replicates);
    b.add("metrics.json", serde_json::to_string_pretty(&metrics).expect("json") + "\n");
    b.add("scan.csv", bundle::scan_csv(&rows));
    if resolved.output.plots {
        let n: Vec<usize> = rows.iter().map(|r| r.n_qubits).collect();
        let train: Vec<f64> = rows.iter().map(|r| r.train_score).collect();
        let test: Vec<f64> = rows.iter().map(|r| r.test_score).collect();
        b.add("scan.svg", plot::scan_plot(&n, &train, &test)?);
    }
    let dir = b.publish(Path::new(&resolved.output.dir), &stamp(), &resolved.hash())?;
    for r in &rows {
        println!(
            "n={} train={:.6} test={:.6} gap={:.6} confidence={:.6}",
            r.n_qubits, r.train_score, r.test_score, r.gap, r.confidence_term
        );
    }
    Ok(dir)
}
