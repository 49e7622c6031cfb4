//! Stage orchestration: zeros → apset → diffraction → poisson → reconstruct.

use num_complex::Complex64;
use qclab::apset::{self, DEFAULT_K2_SAMPLES};
use qclab::diffraction::{self, GaussianSpec, LogDerivOptions, PointMeasure};
use qclab::io::{self, InputKind};
use qclab::reconstruct::{self, DEFAULT_T3_BUDGET};
use qclab::wiener::Height;
use qclab::zeros::{find_real_zeros, ZeroOptions};
use qclab::{AlgebraConfig, Error, ExpSum, ZeroSet};

use crate::config::{
    Command, RunConfig, BOHR_THRESHOLD, DEFAULT_WINDOW, POISSON_SIGMA, ROUNDTRIP_HALF_WIDTH,
};
use crate::report::*;

/// Window nudges tried when a window end sits on a zero.
const NUDGES: usize = 6;
/// Frequencies closer than this are the same atom when comparing routes.
const MATCH_TOL: f64 = 1e-3;
const TYPE_Y: [f64; 2] = [4.0, 8.0];
const G_WINDOWS: usize = 7;

/// Data behind the CSV outputs.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub zeros: Option<ZeroSet<f64>>,
    pub measure: Option<PointMeasure<f64>>,
    pub rebuilt: Option<ExpSum<f64>>,
    pub g_windows: Option<Vec<(f64, f64)>>,
    pub growth: Option<Vec<(f64, f64)>>,
    pub poisson_vs_t: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug)]
pub struct Run {
    pub report: Report,
    pub artifacts: Artifacts,
}

type Staged<T> = std::result::Result<T, StageError>;

fn stage<T>(name: &str, r: qclab::Result<T>) -> Staged<T> {
    r.map_err(|e| StageError {
        stage: name.to_string(),
        message: e.to_string(),
    })
}

enum Input {
    Sum(ExpSum<f64>),
    Zeros(ZeroSet<f64>),
    Measure(PointMeasure<f64>),
}

/// Runs `cfg.command`. Stage failures end the run and are recorded in
/// `report.error`; everything computed before the failure is kept.
pub fn run_pipeline(cfg: &RunConfig) -> Run {
    let mut st = State {
        cfg,
        report: Report::new(cfg),
        art: Artifacts::default(),
    };
    if let Err(e) = st.run() {
        st.report.error = Some(e);
    }
    Run {
        report: st.report,
        artifacts: st.art,
    }
}

struct State<'a> {
    cfg: &'a RunConfig,
    report: Report,
    art: Artifacts,
}

impl State<'_> {
    fn run(&mut self) -> Staged<()> {
        let input = self.read_input()?;
        let cmd = self.cfg.command;
        let (sum, zeros) = match input {
            Input::Measure(mu) => {
                if !matches!(cmd, Command::Reconstruct | Command::Analyze) {
                    return Err(StageError {
                        stage: "input".into(),
                        message: format!(
                            "`{}` needs an exponential sum or a zero set, got a measure",
                            cmd.name()
                        ),
                    });
                }
                self.art.measure = Some(mu.clone());
                return self.reconstruct(&mu, "input", None, None);
            }
            Input::Sum(f) => {
                let z = self.zeros(&f)?;
                (Some(f), z)
            }
            Input::Zeros(z) => {
                self.report.zeros = Some(summarize_given(&z));
                (None, z)
            }
        };
        self.art.zeros = Some(zeros.clone());
        if cmd == Command::Zeros {
            return Ok(());
        }

        if matches!(cmd, Command::Apset | Command::Analyze) {
            self.apset(&zeros)?;
        }
        if cmd == Command::Apset {
            return Ok(());
        }

        let external = match (&self.cfg.measure, cmd) {
            (Some(p), Command::Poisson) => {
                let parsed = stage("input", io::read_measure::<f64>(p))?;
                self.report.warnings.extend(parsed.warnings);
                Some(parsed.value)
            }
            _ => None,
        };
        let (mu, source) = match external {
            Some(mu) => (mu, "file".to_string()),
            None => {
                let (mu, src) = self.diffraction(sum.as_ref(), &zeros)?;
                (mu, src.to_string())
            }
        };
        self.art.measure = Some(mu.clone());

        if matches!(cmd, Command::Poisson | Command::Analyze) {
            self.poisson(&zeros, &mu, &source)?;
        }
        if matches!(cmd, Command::Reconstruct | Command::Analyze) {
            self.reconstruct(&mu, &source, sum.as_ref(), Some(&zeros))?;
        }
        Ok(())
    }

    fn read_input(&mut self) -> Staged<Input> {
        let path = &self.cfg.input;
        let kind = stage("input", io::detect_kind(path))?;
        self.report.input_kind = Some(kind);
        match kind {
            InputKind::ExpSum => {
                let alg = stage("input", AlgebraConfig::from_env())?;
                let f = stage("input", io::read_exp_sum(path, &alg))?;
                Ok(Input::Sum(f))
            }
            InputKind::ZeroSet => {
                let parsed = stage("input", io::read_zero_set(path, self.cfg.window))?;
                self.report.warnings.extend(parsed.warnings);
                Ok(Input::Zeros(parsed.value))
            }
            InputKind::Measure => {
                let parsed = stage("input", io::read_measure(path))?;
                self.report.warnings.extend(parsed.warnings);
                Ok(Input::Measure(parsed.value))
            }
        }
    }

    fn zeros(&mut self, f: &ExpSum<f64>) -> Staged<ZeroSet<f64>> {
        let opts = ZeroOptions::default();
        let (window, nudge) = match self.cfg.window {
            Some(w) => (w, false),
            None => (DEFAULT_WINDOW, true),
        };
        let (found, used) = stage("zeros", zeros_with_nudge(f, window, nudge, &opts))?;
        if used != window {
            self.report.warnings.push(format!(
                "a zero sat on the window boundary; window moved to [{}, {}]",
                used.0, used.1
            ));
        }
        if found.no_zeros {
            self.report
                .warnings
                .push("a single exponential has no zeros".into());
        }
        if !found.is_complete() {
            self.report.warnings.push(format!(
                "strip count {:?} differs from the real zero total {}",
                found.strip_total,
                found.zeros.total_count()
            ));
        }
        let norm = f.wiener_norm();
        let max_residual = found
            .zeros
            .points()
            .iter()
            .map(|p| f.eval_real(p.a).norm() / norm)
            .fold(0.0, f64::max);
        self.report.zeros = Some(ZerosSection {
            window: used,
            distinct: found.zeros.len(),
            total: found.zeros.total_count(),
            max_multiplicity: max_mult(&found.zeros),
            max_residual,
            scan_step: found.scan_step,
            strip: found.strip,
            strip_total: found.strip_total,
            complete: found.is_complete(),
        });
        Ok(found.zeros)
    }

    fn apset(&mut self, a: &ZeroSet<f64>) -> Staged<()> {
        let kc = stage(
            "apset/density",
            apset::counting_constants(a, DEFAULT_K2_SAMPLES, self.cfg.seed),
        )?;
        let density = stage("apset/density", apset::density_with(a, &kc))?;
        let d = density.d;
        let len = a.window_length();
        let range = (0.0, (len / 8.0).min(20.0));
        let ap = stage(
            "apset/almost_periods",
            apset::almost_periods(a, self.cfg.eps, range, Some(d)),
        )?;
        let phi = stage("apset/phi", apset::phi_representation(a, d))?;
        let pts = a.expanded();
        let exact = phi
            .phi
            .iter()
            .all(|&(n, _)| phi.point(n) == Some(pts[(n + phi.index_offset) as usize]));
        let mean = if phi.phi.is_empty() {
            0.0
        } else {
            phi.phi.iter().map(|p| p.1).sum::<f64>() / phi.phi.len() as f64
        };

        let (shifted, shift) = a.off_origin();
        let (lo, hi) = shifted.window();
        let r = hi.min(-lo);
        let n_list: Vec<f64> = (0..5).rev().map(|k| r / f64::from(1u32 << k)).collect();
        let lindelof = match apset::lindelof_sum(&shifted, &n_list) {
            Ok(l) => Section::Present(l),
            Err(e) => Section::Absent {
                reason: e.to_string(),
            },
        };

        let mut taus: Vec<i64> = ap.periods.iter().map(|p| p.shift_h).take(4).collect();
        if taus.is_empty() {
            taus = vec![1, 2];
        }
        let krein_levin = match phi.index_range() {
            Some((lo_n, hi_n)) => {
                let t_max = taus.iter().map(|t| t.abs()).max().unwrap_or(0);
                let reach = (-lo_n).min(hi_n) - t_max;
                if reach < 16 {
                    Section::Absent {
                        reason: format!("only {reach} indices on each side"),
                    }
                } else {
                    let ns: Vec<usize> = (0..5)
                        .rev()
                        .map(|k| (reach as usize) >> k)
                        .filter(|&n| n > 0)
                        .collect();
                    match apset::krein_levin_trend(&phi, &taus, &ns) {
                        Ok(t) => Section::Present(t),
                        Err(e) => Section::Absent {
                            reason: e.to_string(),
                        },
                    }
                }
            }
            None => Section::Absent {
                reason: "empty set".into(),
            },
        };

        self.report.apset = Some(ApsetSection {
            density,
            counting: kc,
            max_gap: apset::max_gap(a),
            almost_periods: PeriodSummary {
                epsilon: ap.epsilon,
                d: ap.d,
                search_range: ap.search_range,
                rejected: ap.rejected,
                periods: ap.periods,
            },
            phi: PhiSummary {
                d: phi.d,
                index_offset: phi.index_offset,
                count: phi.phi.len(),
                sup_abs: phi.sup_abs(),
                mean,
                corrections: phi.corrections.len(),
                reconstruction_exact: exact,
            },
            shift,
            lindelof,
            krein_levin,
        });
        Ok(())
    }

    /// Returns the measure used downstream and the route it came from.
    fn diffraction(
        &mut self,
        f: Option<&ExpSum<f64>>,
        a: &ZeroSet<f64>,
    ) -> Staged<(PointMeasure<f64>, &'static str)> {
        let cfg = self.cfg;
        let logderiv = match f {
            Some(f) => {
                let opts = LogDerivOptions {
                    height: cfg.height.map(Height::Fixed).unwrap_or(Height::Auto),
                    cutoff: cfg.cutoff,
                    ..LogDerivOptions::default()
                };
                Some(stage(
                    "diffraction/logderiv",
                    diffraction::logderiv_measure(f, &opts),
                )?)
            }
            None => None,
        };

        let (lo, hi) = a.window();
        let t = cfg.t.unwrap_or(hi.min(-lo));
        let peaks = stage(
            "diffraction/bohr",
            diffraction::bohr_peaks(a, cfg.cutoff, t, BOHR_THRESHOLD),
        )?;
        // Atoms are reported for |γ| < cutoff on both routes.
        let k_max = ((cfg.cutoff / cfg.grid).ceil() as i64 - 1).max(0);
        let mut grid: Vec<f64> = (-k_max..=k_max).map(|k| k as f64 * cfg.grid).collect();
        for p in peaks {
            if grid.iter().all(|g| (g - p).abs() >= 1.0 / (4.0 * t)) {
                grid.push(p);
                grid.push(-p);
            }
        }
        let scan = stage(
            "diffraction/bohr",
            diffraction::bohr_scan(a, &grid, t, BOHR_THRESHOLD),
        )?;
        let bohr = stage("diffraction/bohr", diffraction::refine_masses(a, &scan, t))?;

        let agreement = logderiv.as_ref().map(|l| agreement(&l.measure, &bohr));
        let density_gap = self
            .report
            .apset
            .as_ref()
            .map(|s| (bohr.d - s.density.d, s.density.error_bound));

        let (mu, source) = match &logderiv {
            Some(l) => (l.measure.clone(), "logderiv"),
            None => (bohr.clone(), "bohr"),
        };

        let extent = mu.extent().max(cfg.grid);
        let s_grid: Vec<f64> = (1..=64).map(|j| extent * j as f64 / 64.0).collect();
        let growth = diffraction::growth_profile(&mu, &s_grid);
        self.art.growth = Some(growth.m_of_s.clone());

        self.report.diffraction = Some(DiffractionSection {
            logderiv: match &logderiv {
                Some(l) => Section::Present(LogDerivSection {
                    height: l.height,
                    h_norm: l.h_norm,
                    logderiv_norm: l.logderiv_norm,
                    bound: l.bound,
                    d: l.measure.d,
                    cutoff: cfg.cutoff,
                    atoms: l.measure.atoms.iter().map(AtomRow::from).collect(),
                }),
                None => Section::Absent {
                    reason: "input is a zero set; no exponential sum to expand".into(),
                },
            },
            bohr: BohrSection {
                t,
                threshold: BOHR_THRESHOLD,
                grid_step: cfg.grid,
                cutoff: cfg.cutoff,
                d: bohr.d,
                atoms: bohr.atoms.iter().map(AtomRow::from).collect(),
            },
            agreement,
            density_gap,
            conjugate_defect: mu.conjugate_defect(MATCH_TOL),
            measure_source: source,
            growth: GrowthSummary {
                t3_value: growth.t3_value,
                kappa_fit: growth.kappa_fit,
                m_at_cutoff: growth.m_of_s.last().map(|p| p.1).unwrap_or(0.0),
            },
        });
        Ok((mu, source))
    }

    fn poisson(&mut self, a: &ZeroSet<f64>, mu: &PointMeasure<f64>, source: &str) -> Staged<()> {
        let spec = GaussianSpec {
            sigma: POISSON_SIGMA,
            ..GaussianSpec::default()
        };
        let rep = stage("poisson", diffraction::poisson_residual(a, mu, &spec))?;
        // Residual of the Bohr masses at the same frequencies as the
        // half-length grows.
        let (lo, hi) = a.window();
        let r = hi.min(-lo);
        let mut vs_t = Vec::new();
        for k in (0..6).rev() {
            let t = r / f64::from(1u32 << k);
            let Ok(mu_t) = diffraction::refine_masses(a, mu, t) else { continue };
            if let Ok(p) = diffraction::poisson_residual(a, &mu_t, &spec) {
                vs_t.push((t, p.residual));
            }
        }
        self.art.poisson_vs_t = Some(vs_t);
        self.report.poisson = Some(PoissonSection {
            measure_source: source.to_string(),
            sigma: spec.sigma,
            residual: rep.residual,
            points_side: rep.points_side,
            atoms_side: rep.atoms_side,
            points_tail: rep.points_tail,
            atoms_tail: rep.atoms_tail,
        });
        Ok(())
    }

    fn reconstruct(
        &mut self,
        mu: &PointMeasure<f64>,
        source: &str,
        f: Option<&ExpSum<f64>>,
        zeros: Option<&ZeroSet<f64>>,
    ) -> Staged<()> {
        let d = mu.d;
        stage(
            "reconstruct/log_series",
            reconstruct::log_series_at_height_one(mu, d, DEFAULT_T3_BUDGET),
        )?;
        let rebuilt = stage(
            "reconstruct/rebuild",
            reconstruct::rebuild_dirichlet(mu, d, DEFAULT_T3_BUDGET),
        )?;
        let sum = &rebuilt.sum;
        self.art.rebuilt = Some(sum.clone());

        let roundtrip = match zeros {
            Some(a) => Some(stage("reconstruct/roundtrip", roundtrip(sum, a))?),
            None => None,
        };

        let ty = stage(
            "reconstruct/type",
            reconstruct::exponential_type(sum, &TYPE_Y),
        )?;
        let ty_input = f.and_then(|f| reconstruct::exponential_type(f, &TYPE_Y).ok());
        let ty_zeros = zeros.and_then(|a| reconstruct::exponential_type_of_zeros(a, &TYPE_Y).ok());

        let xs: Vec<f64> = (0..G_WINDOWS).map(|k| 10.0 * f64::from(1u32 << k)).collect();
        let g = reconstruct::g_boundedness(mu, &xs);
        self.art.g_windows = Some(g.windows.clone());

        let product_check = match (f, zeros) {
            (Some(f), Some(a)) => product_check(f, a),
            _ => None,
        };

        let terms = sum.terms();
        let (q_min, q_max) = terms.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), t| {
            (lo.min(t.q.norm()), hi.max(t.q.norm()))
        });
        let (w_lo, w_hi) = sum.spectrum_bounds().unwrap_or((0.0, 0.0));
        self.report.reconstruct = Some(ReconstructSection {
            measure_source: source.to_string(),
            d,
            log_series_norm: rebuilt.log.norm,
            t3: rebuilt.log.t3,
            tail_bound: rebuilt.log.tail_bound,
            degenerate: rebuilt.degenerate,
            spectrum: SpectrumSummary {
                terms: terms.len(),
                min_omega: w_lo,
                max_omega: w_hi,
                q_min_abs: if terms.is_empty() { 0.0 } else { q_min },
                q_max_abs: q_max,
            },
            roundtrip,
            exponential_type: TypeSummary {
                pi_d: std::f64::consts::PI * d,
                rebuilt: ty,
                input: ty_input,
                zeros: ty_zeros,
            },
            g: GSummary {
                slope_fit: g.slope_fit,
                verdict: g.bounded_verdict,
                sup_max: g.windows.last().map(|w| w.1).unwrap_or(0.0),
            },
            product_check,
        });
        Ok(())
    }
}

/// [`find_real_zeros`], moving both window ends by a small irregular amount
/// when one of them is a zero and `nudge` is set.
pub fn zeros_with_nudge(
    f: &ExpSum<f64>,
    window: (f64, f64),
    nudge: bool,
    opts: &ZeroOptions<f64>,
) -> qclab::Result<(qclab::zeros::RealZeros<f64>, (f64, f64))> {
    let mut w = window;
    let mut k = 0;
    loop {
        match find_real_zeros(f, w, opts) {
            Err(Error::BoundaryZero { .. }) if nudge && k < NUDGES => {
                let s = 0.0137 + 0.0371 * k as f64;
                w = (window.0 + s, window.1 + s);
                k += 1;
            }
            r => return r.map(|z| (z, w)),
        }
    }
}

fn max_mult(a: &ZeroSet<f64>) -> u32 {
    a.points().iter().map(|p| p.mult).max().unwrap_or(0)
}

fn summarize_given(a: &ZeroSet<f64>) -> ZerosSection {
    ZerosSection {
        window: a.window(),
        distinct: a.len(),
        total: a.total_count(),
        max_multiplicity: max_mult(a),
        max_residual: 0.0,
        scan_step: 0.0,
        strip: None,
        strip_total: None,
        complete: true,
    }
}

fn agreement(l: &PointMeasure<f64>, b: &PointMeasure<f64>) -> Agreement {
    let mut matched = 0;
    let mut max_abs_diff = 0.0f64;
    let mut only_logderiv = Vec::new();
    for atom in &l.atoms {
        match b.mass_at(atom.gamma, MATCH_TOL) {
            Some(m) => {
                matched += 1;
                max_abs_diff = max_abs_diff.max((m - atom.b).norm());
            }
            None => {
                only_logderiv.push(atom.gamma);
                max_abs_diff = max_abs_diff.max(atom.b.norm());
            }
        }
    }
    let only_bohr: Vec<f64> = b
        .atoms
        .iter()
        .filter(|atom| l.mass_at(atom.gamma, MATCH_TOL).is_none())
        .map(|atom| atom.gamma)
        .collect();
    for g in &only_bohr {
        if let Some(m) = b.mass_at(*g, MATCH_TOL) {
            max_abs_diff = max_abs_diff.max(m.norm());
        }
    }
    Agreement {
        matched,
        only_logderiv,
        only_bohr,
        max_abs_diff,
        d_diff: (l.d - b.d).abs(),
    }
}

/// Zeros of the rebuilt sum against the original ones over the central
/// window.
fn roundtrip(sum: &ExpSum<f64>, a: &ZeroSet<f64>) -> qclab::Result<Roundtrip> {
    let (lo, hi) = a.window();
    let w = (
        (-ROUNDTRIP_HALF_WIDTH).max(lo),
        ROUNDTRIP_HALF_WIDTH.min(hi),
    );
    let (found, used) = zeros_with_nudge(sum, w, true, &ZeroOptions::default())?;
    let used = (used.0.max(lo), used.1.min(hi));
    let original = a.restrict(used.0, used.1)?;
    let rebuilt = found.zeros.restrict(used.0, used.1)?;
    let (x, y) = (original.expanded(), rebuilt.expanded());
    let max_error = (x.len() == y.len()).then(|| {
        x.iter()
            .zip(&y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    });
    Ok(Roundtrip {
        window: used,
        original: original.total_count(),
        rebuilt: rebuilt.total_count(),
        max_error,
    })
}

/// `|P(x)|` of the canonical product against `|f(x)/f(0)|` at a few real
/// points away from the zeros.
fn product_check(f: &ExpSum<f64>, a: &ZeroSet<f64>) -> Option<ProductCheck> {
    let f0 = f.eval_real(0.0).norm();
    if f0 == 0.0 {
        return None;
    }
    let norm = f.wiener_norm();
    let mut max_rel = 0.0f64;
    let mut max_trunc = 0.0f64;
    let mut points = 0;
    for j in 0..27 {
        let x = -5.0 + 0.37 * j as f64 + 0.011;
        let fx = f.eval_real(x).norm();
        if fx < 1e-3 * norm {
            continue;
        }
        let p = reconstruct::canonical_product(a, Complex64::new(x, 0.0)).ok()?;
        if p.shift != 0.0 || p.zero_mult.is_some() {
            return None;
        }
        let want = fx / f0;
        max_rel = max_rel.max((p.value.norm() - want).abs() / want);
        max_trunc = max_trunc.max(p.truncation_error);
        points += 1;
    }
    Some(ProductCheck {
        points,
        max_rel_diff: max_rel,
        max_truncation_error: max_trunc,
    })
}
