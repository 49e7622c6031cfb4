use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qclab_cli::config::{self, Command, RunConfig};
use qclab_cli::{emit_outputs, output, run_pipeline};

#[derive(Parser, Debug)]
#[command(name = "qclab", version, about = "Zeros, diffraction and reconstruction of exponential sums")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Every stage, forward and back, with roundtrip residuals.
    Analyze(Args),
    /// Real zeros of an exponential sum.
    Zeros(Args),
    /// Atoms of the diffraction measure.
    Diffract(Args),
    /// Gaussian Poisson identity residual.
    Poisson(Args),
    /// Exponential sum rebuilt from a measure.
    Reconstruct(Args),
    /// Density, almost periods and summation diagnostics of a point set.
    Apset(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// CSV input: `omega,re,im`, `point,multiplicity` or `gamma,re,im`.
    #[arg(long)]
    input: PathBuf,
    /// Window `A,B`.
    #[arg(long, allow_hyphen_values = true, value_parser = config::parse_window)]
    window: Option<(f64, f64)>,
    /// Height of the inverse; automatic when omitted.
    #[arg(long)]
    height: Option<f64>,
    #[arg(long, default_value_t = config::DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Bohr grid step.
    #[arg(long, default_value_t = config::DEFAULT_GRID)]
    grid: f64,
    /// Bohr half-length.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Almost-period tolerance.
    #[arg(long, default_value_t = config::DEFAULT_EPS)]
    eps: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Measure CSV for `poisson` instead of a computed one.
    #[arg(long)]
    measure: Option<PathBuf>,
}

fn config_from(cli: Cli) -> Result<RunConfig, String> {
    let (command, a) = match cli.command {
        Sub::Analyze(a) => (Command::Analyze, a),
        Sub::Zeros(a) => (Command::Zeros, a),
        Sub::Diffract(a) => (Command::Diffract, a),
        Sub::Poisson(a) => (Command::Poisson, a),
        Sub::Reconstruct(a) => (Command::Reconstruct, a),
        Sub::Apset(a) => (Command::Apset, a),
    };
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(format!("--{name} must be positive, got {v}"))
        }
    };
    positive("cutoff", a.cutoff)?;
    positive("grid", a.grid)?;
    positive("eps", a.eps)?;
    if let Some(t) = a.t {
        positive("T", t)?;
    }
    if let Some(h) = a.height {
        if !h.is_finite() {
            return Err(format!("--height must be finite, got {h}"));
        }
    }
    if !a.input.is_file() {
        return Err(format!("input {} is not a readable file", a.input.display()));
    }
    let mut cfg = RunConfig::new(command, a.input, a.out);
    cfg.window = a.window;
    cfg.height = a.height;
    cfg.cutoff = a.cutoff;
    cfg.grid = a.grid;
    cfg.t = a.t;
    cfg.eps = a.eps;
    cfg.seed = a.seed;
    cfg.measure = a.measure;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match config_from(cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = output::prepare_dir(&cfg.out) {
        eprintln!("error: output directory {}: {e}", cfg.out.display());
        return ExitCode::from(1);
    }
    let run = run_pipeline(&cfg);
    if let Err(e) = emit_outputs(&run, &cfg.out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match &run.report.error {
        Some(err) => {
            eprintln!("stage {} failed: {}", err.stage, err.message);
            ExitCode::from(2)
        }
        None => ExitCode::SUCCESS,
    }
}
