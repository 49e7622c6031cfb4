//! The JSON report. Field order is declaration order, so output is stable.

use num_complex::Complex64;
use qclab::apset::{AlmostPeriod, CountingConstants, DensityEstimate, LindelofReport};
use qclab::diffraction::Atom;
use qclab::io::InputKind;
use qclab::reconstruct::{TypeEstimate, Verdict};
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub input_kind: Option<InputKind>,
    pub config: ConfigSnapshot,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeros: Option<ZerosSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apset: Option<ApsetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffraction: Option<DiffractionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisson: Option<PoissonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            schema: SCHEMA,
            command: cfg.command.name(),
            input_kind: None,
            config: ConfigSnapshot::from(cfg),
            warnings: Vec::new(),
            zeros: None,
            apset: None,
            diffraction: None,
            poisson: None,
            reconstruct: None,
            error: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Every setting and tolerance the run used.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigSnapshot {
    pub input: String,
    pub measure: Option<String>,
    pub window: Option<(f64, f64)>,
    pub height: Option<f64>,
    pub cutoff: f64,
    pub grid: f64,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub eps: f64,
    pub seed: u64,
    pub freq_tol: f64,
    pub prune_tol: f64,
    pub max_terms: Option<usize>,
    pub resid_tol: f64,
    pub boundary_tol: f64,
    pub edge_margin: f64,
    pub bohr_threshold: f64,
    pub poisson_sigma: f64,
    pub t3_budget: f64,
    pub roundtrip_half_width: f64,
}

impl From<&RunConfig> for ConfigSnapshot {
    fn from(c: &RunConfig) -> Self {
        let algebra = qclab::AlgebraConfig::<f64>::from_env().ok();
        let zo = qclab::zeros::ZeroOptions::<f64>::default();
        let defaults = qclab::AlgebraConfig::<f64>::default();
        Self {
            input: c.input.display().to_string(),
            measure: c.measure.as_ref().map(|p| p.display().to_string()),
            window: c.window,
            height: c.height,
            cutoff: c.cutoff,
            grid: c.grid,
            t: c.t,
            eps: c.eps,
            seed: c.seed,
            freq_tol: defaults.freq_tol,
            prune_tol: defaults.prune_tol,
            max_terms: algebra.map(|a| a.max_terms),
            resid_tol: zo.resid_tol,
            boundary_tol: zo.boundary_tol,
            edge_margin: zo.contour.edge_margin,
            bohr_threshold: crate::config::BOHR_THRESHOLD,
            poisson_sigma: crate::config::POISSON_SIGMA,
            t3_budget: qclab::reconstruct::DEFAULT_T3_BUDGET,
            roundtrip_half_width: crate::config::ROUNDTRIP_HALF_WIDTH,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZerosSection {
    pub window: (f64, f64),
    pub distinct: usize,
    pub total: u64,
    pub max_multiplicity: u32,
    /// `max |f(a)| / ‖f‖_W` over the returned zeros.
    pub max_residual: f64,
    pub scan_step: f64,
    pub strip: Option<(f64, f64)>,
    pub strip_total: Option<u32>,
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodSummary {
    pub epsilon: f64,
    pub d: f64,
    pub search_range: (f64, f64),
    pub rejected: usize,
    pub periods: Vec<AlmostPeriod<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiSummary {
    pub d: f64,
    pub index_offset: i64,
    pub count: usize,
    pub sup_abs: f64,
    pub mean: f64,
    /// Indices needing a sub-ulp correction term.
    pub corrections: usize,
    pub reconstruction_exact: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", content = "data", rename_all = "lowercase")]
pub enum Section<T> {
    Present(T),
    Absent { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ApsetSection {
    pub density: DensityEstimate<f64>,
    pub counting: CountingConstants,
    pub max_gap: Option<f64>,
    pub almost_periods: PeriodSummary,
    pub phi: PhiSummary,
    /// Translation applied before the summation diagnostics.
    pub shift: f64,
    pub lindelof: Section<LindelofReport<f64>>,
    pub krein_levin: Section<Vec<(usize, f64)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomRow {
    pub gamma: f64,
    pub b: Complex64,
}

impl From<&Atom<f64>> for AtomRow {
    fn from(a: &Atom<f64>) -> Self {
        Self {
            gamma: a.gamma,
            b: a.b,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LogDerivSection {
    pub height: f64,
    pub h_norm: f64,
    pub logderiv_norm: f64,
    pub bound: f64,
    pub d: f64,
    pub cutoff: f64,
    pub atoms: Vec<AtomRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BohrSection {
    #[serde(rename = "T")]
    pub t: f64,
    pub threshold: f64,
    pub grid_step: f64,
    pub cutoff: f64,
    pub d: f64,
    pub atoms: Vec<AtomRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Agreement {
    pub matched: usize,
    pub only_logderiv: Vec<f64>,
    pub only_bohr: Vec<f64>,
    pub max_abs_diff: f64,
    pub d_diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSummary {
    pub t3_value: f64,
    pub kappa_fit: Option<f64>,
    pub m_at_cutoff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffractionSection {
    pub logderiv: Section<LogDerivSection>,
    pub bohr: BohrSection,
    pub agreement: Option<Agreement>,
    /// `d` of the measure minus the density of the zeros, and the density
    /// error bound it is compared with.
    pub density_gap: Option<(f64, f64)>,
    pub conjugate_defect: f64,
    pub measure_source: &'static str,
    pub growth: GrowthSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonSection {
    pub measure_source: String,
    pub sigma: f64,
    pub residual: f64,
    pub points_side: Complex64,
    pub atoms_side: Complex64,
    pub points_tail: f64,
    pub atoms_tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub terms: usize,
    pub min_omega: f64,
    pub max_omega: f64,
    pub q_min_abs: f64,
    pub q_max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Roundtrip {
    pub window: (f64, f64),
    pub original: u64,
    pub rebuilt: u64,
    pub max_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GSummary {
    pub slope_fit: f64,
    pub verdict: Verdict,
    pub sup_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeSummary {
    pub pi_d: f64,
    pub rebuilt: TypeEstimate<f64>,
    pub input: Option<TypeEstimate<f64>>,
    pub zeros: Option<TypeEstimate<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductCheck {
    pub points: usize,
    pub max_rel_diff: f64,
    pub max_truncation_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructSection {
    pub measure_source: String,
    pub d: f64,
    pub log_series_norm: f64,
    pub t3: f64,
    pub tail_bound: f64,
    pub degenerate: bool,
    pub spectrum: SpectrumSummary,
    pub roundtrip: Option<Roundtrip>,
    pub exponential_type: TypeSummary,
    pub g: GSummary,
    pub product_check: Option<ProductCheck>,
}
