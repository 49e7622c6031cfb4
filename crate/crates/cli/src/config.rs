//! Run configuration and its defaults.

use std::path::PathBuf;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Zeros,
    Diffract,
    Poisson,
    Reconstruct,
    Apset,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Zeros => "zeros",
            Command::Diffract => "diffract",
            Command::Poisson => "poisson",
            Command::Reconstruct => "reconstruct",
            Command::Apset => "apset",
        }
    }
}

/// Window used for exponential-sum inputs when none is given.
pub const DEFAULT_WINDOW: (f64, f64) = (-100.0, 100.0);
pub const DEFAULT_CUTOFF: f64 = 10.0;
pub const DEFAULT_GRID: f64 = 0.25;
pub const DEFAULT_EPS: f64 = 0.05;
pub const BOHR_THRESHOLD: f64 = 0.1;
pub const ROUNDTRIP_HALF_WIDTH: f64 = 20.0;
pub const POISSON_SIGMA: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    /// Point measure used by `poisson` instead of a computed one.
    pub measure: Option<PathBuf>,
    pub window: Option<(f64, f64)>,
    /// `None` selects the height automatically.
    pub height: Option<f64>,
    pub cutoff: f64,
    pub grid: f64,
    /// Bohr half-length; `None` uses the largest that fits the window.
    pub t: Option<f64>,
    pub eps: f64,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: input.into(),
            measure: None,
            window: None,
            height: None,
            cutoff: DEFAULT_CUTOFF,
            grid: DEFAULT_GRID,
            t: None,
            eps: DEFAULT_EPS,
            seed: 0,
            out: out.into(),
        }
    }
}

/// Parses `A,B` with `A < B`.
pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("window `{s}` must look like A,B"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("window [{a}, {b}] must be finite with A < B"));
    }
    Ok((a, b))
}
