//! `robustperiod`: detect periods in a CSV column, generate synthetic series,
//! or run seeded benchmarks.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 internal error.

mod input;
mod output;

use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use input::{read_csv, Column};
use output::{dump_diagnostics, emit, to_json, ReportJson};
use robustperiod::synthbench::{generate_detailed, run_benchmark, SCENARIOS};
use robustperiod::{detect, DetectorConfig, Error, SyntheticSpec, Waveform};

#[derive(Debug, Parser)]
#[command(
    name = "robustperiod",
    version,
    about = "Robust multi-period detection for time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect periods in one column of a CSV file and print a JSON report.
    Detect(DetectArgs),
    /// Write a synthetic series as single-column CSV; ground truth goes to stderr.
    Synth(SynthArgs),
    /// Run seeded detections on synthetic data and print aggregate scores.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Zero-based index or header name.
    #[arg(long, default_value = "0")]
    column: Column,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Write per-level periodogram and ACF CSV files into this directory.
    #[arg(long, value_name = "DIR")]
    dump_diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectorFlags {
    /// Plain wavelet variance and periodogram throughout.
    #[arg(long)]
    no_robust: bool,
    /// HP smoothing on the unit time interval.
    #[arg(long)]
    lambda: Option<f64>,
    /// Huber threshold.
    #[arg(long)]
    zeta: Option<f64>,
    /// Fisher test significance level.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    acf_height: Option<f64>,
    #[arg(long)]
    share_threshold: Option<f64>,
}

impl DetectorFlags {
    fn config(&self) -> DetectorConfig {
        let mut cfg = DetectorConfig {
            robust_mode: !self.no_robust,
            ..DetectorConfig::default()
        };
        if let Some(v) = self.lambda {
            cfg.preprocess.hp_lambda = v;
        }
        if let Some(v) = self.zeta {
            cfg.admm.zeta = v;
        }
        if let Some(v) = self.alpha {
            cfg.fisher_alpha = v;
        }
        if let Some(v) = self.acf_height {
            cfg.acf_height = v;
        }
        if let Some(v) = self.share_threshold {
            cfg.share_threshold = v;
        }
        cfg
    }
}

#[derive(Debug, Args)]
struct SpecFlags {
    /// Comma-separated period lengths.
    #[arg(long, value_delimiter = ',')]
    periods: Option<Vec<usize>>,
    /// Comma-separated amplitudes, one per period (default all 1).
    #[arg(long, value_delimiter = ',')]
    amplitudes: Option<Vec<f64>>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    waveform: Option<Waveform>,
    #[arg(long)]
    noise_var: Option<f64>,
    #[arg(long)]
    outlier_ratio: Option<f64>,
    #[arg(long)]
    outlier_amplitude: Option<f64>,
    #[arg(long)]
    trend: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SpecFlags {
    fn apply(&self, mut spec: SyntheticSpec) -> SyntheticSpec {
        if let Some(p) = &self.periods {
            spec.periods = p.clone();
            spec.amplitudes = vec![1.0; p.len()];
        }
        if let Some(a) = &self.amplitudes {
            spec.amplitudes = a.clone();
        }
        if let Some(v) = self.length {
            spec.length = v;
        }
        if let Some(v) = self.waveform {
            spec.waveform = v;
        }
        if let Some(v) = self.noise_var {
            spec.noise_variance = v;
        }
        if let Some(v) = self.outlier_ratio {
            spec.outlier_ratio = v;
        }
        if let Some(v) = self.outlier_amplitude {
            spec.outlier_amplitude = v;
        }
        if let Some(v) = self.trend {
            spec.trend_amplitude = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        spec
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    spec: SpecFlags,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Named scenario; spec flags override its fields.
    #[arg(long)]
    scenario: Option<String>,
    #[command(flatten)]
    spec: SpecFlags,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Relative matching tolerance.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    #[command(flatten)]
    detector: DetectorFlags,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Empty
            | Error::TooShort { .. }
            | Error::NonFinite { .. }
            | Error::InvalidParameter { .. }
            | Error::UnsupportedOrder(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn io_failure(what: &str) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Input(format!("{what}: {e}"))
}

fn cmd_detect(args: &DetectArgs) -> Result<(), Failure> {
    let series = read_csv(&args.input, &args.column).map_err(|e| Failure::Input(e.to_string()))?;
    let cfg = args.detector.config();
    let detection = detect(&series, &cfg)?;
    if let Some(dir) = &args.dump_diagnostics {
        dump_diagnostics(dir, &detection).map_err(io_failure("cannot write diagnostics"))?;
    }
    let json = to_json(&ReportJson::from(&detection.report))
        .map_err(|e| Failure::Internal(e.to_string()))?;
    emit(args.output.as_deref(), json.as_bytes()).map_err(io_failure("cannot write report"))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let spec = args.spec.apply(SyntheticSpec::default());
    let synthetic = generate_detailed(&spec)?;
    let mut csv = String::with_capacity(spec.length * 20 + 6);
    csv.push_str("value\n");
    for v in synthetic.series.values() {
        csv.push_str(&format!("{v}\n"));
    }
    emit(args.output.as_deref(), csv.as_bytes()).map_err(io_failure("cannot write series"))?;
    let truth = serde_json::json!({
        "periods": spec.periods,
        "outlier_positions": synthetic.outlier_positions,
    });
    eprintln!("{truth}");
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let (name, base) = match &args.scenario {
        Some(name) => {
            let spec = SyntheticSpec::scenario(name).ok_or_else(|| {
                Failure::Input(format!(
                    "unknown scenario `{name}` (one of {})",
                    SCENARIOS.join(", ")
                ))
            })?;
            (name.clone(), spec)
        }
        None => ("custom".to_string(), SyntheticSpec::default()),
    };
    let spec = args.spec.apply(base);
    let out = run_benchmark(&spec, args.runs, &args.detector.config(), args.tolerance)?;
    let json = to_json(&out.summary(name)).map_err(|e| Failure::Internal(e.to_string()))?;
    emit(args.output.as_deref(), json.as_bytes()).map_err(io_failure("cannot write summary"))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Input(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
