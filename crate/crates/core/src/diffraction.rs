//! The Fourier transform of a zero counting measure as a list of atoms,
//! computed from Bohr means of the points or analytically from `f′/f`, and
//! checked against the Poisson summation identity.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::apset::counting_constants;
use crate::error::{Error, Result};
use crate::real::{ls_slope, unit_phase, CompensatedComplex, Real};
use crate::wiener::{
    neumann_inverse, AlgebraConfig, ExpSum, Height, NeumannOptions,
};
use crate::zeros::{find_real_zeros, ZeroOptions, ZeroSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom<T> {
    pub gamma: T,
    pub b: Complex<T>,
}

/// `d·δ₀ + Σ b_γ δ_γ`, atoms sorted by `γ ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct PointMeasure<T> {
    pub d: T,
    pub atoms: Vec<Atom<T>>,
    /// Atoms are only known for `|γ| < cutoff`.
    pub cutoff: Option<T>,
}

impl<T: Real> PointMeasure<T> {
    pub fn new(d: T, mut atoms: Vec<Atom<T>>, cutoff: Option<T>) -> Result<Self> {
        if !d.is_finite() || d < T::zero() {
            return Err(Error::InvalidInput(format!("density {d} must be finite and ≥ 0")));
        }
        for a in &atoms {
            if !(a.gamma.is_finite() && a.b.re.is_finite() && a.b.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite atom".into()));
            }
            if a.gamma == T::zero() {
                return Err(Error::InvalidInput(
                    "the mass at 0 is the density, not an atom".into(),
                ));
            }
        }
        atoms.sort_by(|x, y| x.gamma.partial_cmp(&y.gamma).expect("finite"));
        for w in atoms.windows(2) {
            if w[0].gamma == w[1].gamma {
                return Err(Error::InvalidInput(format!("duplicate atom at {}", w[0].gamma)));
            }
        }
        Ok(Self { d, atoms, cutoff })
    }

    /// Atoms with `γ > 0`.
    pub fn positive_atoms(&self) -> impl Iterator<Item = &Atom<T>> {
        self.atoms.iter().filter(|a| a.gamma > T::zero())
    }

    /// Mass at the atom nearest to `gamma` within `tol`; `γ = 0` gives `d`.
    pub fn mass_at(&self, gamma: T, tol: T) -> Option<Complex<T>> {
        if gamma.abs() <= tol {
            return Some(Complex::new(self.d, T::zero()));
        }
        self.atoms
            .iter()
            .filter(|a| (a.gamma - gamma).abs() <= tol)
            .min_by(|x, y| {
                (x.gamma - gamma)
                    .abs()
                    .partial_cmp(&(y.gamma - gamma).abs())
                    .expect("finite")
            })
            .map(|a| a.b)
    }

    /// Copy with every atom within `tol` of `gamma` removed.
    pub fn without_atom(&self, gamma: T, tol: T) -> Self {
        Self {
            d: self.d,
            atoms: self
                .atoms
                .iter()
                .filter(|a| (a.gamma - gamma).abs() > tol)
                .copied()
                .collect(),
            cutoff: self.cutoff,
        }
    }

    /// Adds `conj(b_γ)` at `−γ` for every positive atom lacking a partner.
    pub fn symmetrized(&self, tol: T) -> Self {
        let mut atoms = self.atoms.clone();
        for a in self.positive_atoms() {
            if self.mass_at(-a.gamma, tol).is_none() {
                atoms.push(Atom {
                    gamma: -a.gamma,
                    b: a.b.conj(),
                });
            }
        }
        atoms.sort_by(|x, y| x.gamma.partial_cmp(&y.gamma).expect("finite"));
        Self {
            d: self.d,
            atoms,
            cutoff: self.cutoff,
        }
    }

    /// `max |b(−γ) − conj(b(γ))|` over positive atoms; a missing partner
    /// counts as mass zero.
    pub fn conjugate_defect(&self, tol: T) -> T {
        self.positive_atoms().fold(T::zero(), |m, a| {
            let partner = self.mass_at(-a.gamma, tol).unwrap_or_default();
            m.max((partner - a.b.conj()).norm())
        })
    }

    /// Largest `Σ|b_γ|` over unit intervals `[x, x+1)`, the density at 0
    /// included.
    pub fn unit_mass(&self) -> T {
        let mut pts: Vec<(T, T)> = self.atoms.iter().map(|a| (a.gamma, a.b.norm())).collect();
        pts.push((T::zero(), self.d));
        pts.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        let mut best = T::zero();
        let mut j = 0;
        let mut acc = T::zero();
        for i in 0..pts.len() {
            while j < pts.len() && pts[j].0 < pts[i].0 + T::one() {
                acc += pts[j].1;
                j += 1;
            }
            best = best.max(acc);
            acc -= pts[i].1;
        }
        best
    }

    /// Largest `|γ|` covered: the cutoff when set, else the largest atom.
    pub fn extent(&self) -> T {
        self.cutoff.unwrap_or_else(|| {
            self.atoms
                .iter()
                .fold(T::zero(), |m, a| m.max(a.gamma.abs()))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrEstimate<T> {
    pub value: Complex<T>,
    /// `k₁/T`.
    pub error: T,
}

fn check_half_length<T: Real>(a: &ZeroSet<T>, t: T) -> Result<()> {
    let (lo, hi) = a.window();
    if !(t > T::zero()) || -t < lo || t > hi {
        return Err(Error::Domain(format!(
            "T = {t} exceeds the window [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn bohr_sum<T: Real>(a: &ZeroSet<T>, gamma: T, t: T) -> Complex<T> {
    let mut acc = CompensatedComplex::new();
    let pts = a.points();
    let start = pts.partition_point(|p| p.a <= -t);
    for p in &pts[start..] {
        if p.a >= t {
            break;
        }
        let m = T::from_usize_lossy(p.mult as usize);
        acc.add(unit_phase(-gamma * p.a) * m);
    }
    acc.value() / (T::lit(2.0) * t)
}

fn smooth_sum<T: Real>(a: &ZeroSet<T>, gamma: T, t: T) -> Complex<T> {
    let l = t / T::lit(6.0);
    let mut acc = CompensatedComplex::new();
    let pts = a.points();
    let start = pts.partition_point(|p| p.a <= -t);
    for p in &pts[start..] {
        if p.a >= t {
            break;
        }
        let u = p.a / l;
        let w = (-T::PI() * u * u).exp() * T::from_usize_lossy(p.mult as usize);
        acc.add(unit_phase(-gamma * p.a) * w);
    }
    acc.value() / l
}

/// Atom test shared by [`bohr_scan`] and [`bohr_peaks`]: the tapered mean
/// at `T` exceeds `threshold` and moves by less than `threshold/4` from
/// its value at `T/2`. The taper keeps sidelobes of nearby atoms out of
/// the drift.
fn is_atom<T: Real>(a: &ZeroSet<T>, gamma: T, t: T, threshold: T) -> bool {
    let full = smooth_sum(a, gamma, t);
    if full.norm() <= threshold {
        return false;
    }
    (full - smooth_sum(a, gamma, t * T::lit(0.5))).norm() < threshold / T::lit(4.0)
}

/// `(2T)⁻¹ Σ_{|a|<T} mult·e^{−2πiγa}`.
pub fn bohr_coefficient<T: Real>(a: &ZeroSet<T>, gamma: T, t: T) -> Result<BohrEstimate<T>> {
    check_half_length(a, t)?;
    let k1 = if a.is_empty() {
        0
    } else {
        counting_constants(a, 0, 0)?.k1
    };
    Ok(BohrEstimate {
        value: bohr_sum(a, gamma, t),
        error: T::lit(k1 as f64) / t,
    })
}

/// Gaussian-weighted mean `L⁻¹ Σ_{|a|<T} mult·e^{−π(a/L)²} e^{−2πiγa}`
/// with `L = T/6`. By the Poisson identity this equals
/// `Σ_λ b_λ e^{−πL²(λ−γ)²}`, so for a measure whose atoms are separated
/// from `γ` by many multiples of `1/L` it reproduces `b_γ` to rounding.
/// The attached error covers only the weight cut at `±T`.
pub fn smooth_bohr_coefficient<T: Real>(
    a: &ZeroSet<T>,
    gamma: T,
    t: T,
) -> Result<BohrEstimate<T>> {
    check_half_length(a, t)?;
    let value = smooth_sum(a, gamma, t);
    let k1 = if a.is_empty() {
        0
    } else {
        counting_constants(a, 0, 0)?.k1
    };
    let cut = T::lit(2.0 * k1 as f64) * (-T::lit(36.0) * T::PI()).exp();
    Ok(BohrEstimate { value, error: cut })
}

/// Replaces the density and every atom mass of `mu` by
/// [`smooth_bohr_coefficient`] estimates at the same frequencies.
pub fn refine_masses<T: Real>(a: &ZeroSet<T>, mu: &PointMeasure<T>, t: T) -> Result<PointMeasure<T>> {
    let d = smooth_bohr_coefficient(a, T::zero(), t)?.value.re;
    let atoms = mu
        .atoms
        .iter()
        .map(|x| {
            Ok(Atom {
                gamma: x.gamma,
                b: smooth_bohr_coefficient(a, x.gamma, t)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PointMeasure::new(d, atoms, mu.cutoff)
}

/// Bohr coefficients over `grid`. A nonzero grid point becomes an atom when
/// its tapered mean exceeds `threshold` in modulus and moves by less than
/// `threshold/4` between `T/2` and `T`; the mass stored is the plain mean.
/// The density is the plain mean at 0.
pub fn bohr_scan<T: Real>(
    a: &ZeroSet<T>,
    grid: &[T],
    t: T,
    threshold: T,
) -> Result<PointMeasure<T>> {
    check_half_length(a, t)?;
    let err = bohr_coefficient(a, T::zero(), t)?.error;
    if !(threshold > T::lit(2.0) * err) {
        return Err(Error::InvalidInput(format!(
            "threshold {threshold} must exceed twice the error estimate {err}"
        )));
    }
    let d = bohr_sum(a, T::zero(), t).re;
    let mut grid: Vec<T> = grid.iter().copied().filter(|g| *g != T::zero()).collect();
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
    grid.dedup();
    let mut atoms = Vec::new();
    for &gamma in &grid {
        if is_atom(a, gamma, t, threshold) {
            atoms.push(Atom {
                gamma,
                b: bohr_sum(a, gamma, t),
            });
        }
    }
    let cutoff = grid.iter().fold(T::zero(), |m, g| m.max(g.abs()));
    PointMeasure::new(d, atoms, Some(cutoff))
}

/// Frequencies in `(0, gamma_max]` that pass the [`bohr_scan`] atom test,
/// found without a fine grid: peaks of `|Bohr mean|` above `threshold/2` are
/// located on a coarse grid at a short half-length, tracked while the
/// half-length doubles up to `t`, and finally centred on the tapered mean.
pub fn bohr_peaks<T: Real>(a: &ZeroSet<T>, gamma_max: T, t: T, threshold: T) -> Result<Vec<T>> {
    check_half_length(a, t)?;
    let t0 = t.min(T::lit(16.0));
    let step = T::one() / (T::lit(8.0) * t0);
    let n = (gamma_max / step).floor().to_usize().unwrap_or(0);
    let vals: Vec<T> = (0..=n + 1)
        .map(|k| bohr_sum(a, step * T::from_usize_lossy(k), t0).norm())
        .collect();
    let mut peaks: Vec<T> = Vec::new();
    for k in 1..=n {
        if vals[k] > threshold * T::lit(0.5) && vals[k] >= vals[k - 1] && vals[k] >= vals[k + 1] {
            let mut gamma = step * T::from_usize_lossy(k);
            let mut tk = t0;
            let mut width = step;
            loop {
                gamma = golden_max(|g| bohr_sum(a, g, tk).norm(), gamma - width, gamma + width);
                if tk >= t {
                    break;
                }
                tk = (tk * T::lit(2.0)).min(t);
                width = T::one() / (T::lit(4.0) * tk);
            }
            let w = T::one() / t;
            gamma = golden_max(|g| smooth_sum(a, g, t).norm(), gamma - w, gamma + w);
            if is_atom(a, gamma, t, threshold) && gamma > T::zero() && gamma <= gamma_max {
                peaks.push(gamma);
            }
        }
    }
    peaks.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let tol = T::one() / (T::lit(4.0) * t);
    peaks.dedup_by(|x, y| (*x - *y).abs() < tol);
    Ok(peaks)
}

fn golden_max<T: Real>(g: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let r = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    let tol = T::lit(1e-12) * T::one().max(a.abs());
    for _ in 0..100 {
        if b - a <= tol {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    (a + b) * T::lit(0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogDerivOptions<T> {
    pub height: Height<T>,
    /// Atoms are produced for `0 < γ < cutoff`.
    pub cutoff: T,
    /// Atoms with `|b| ≤ atom_floor` are treated as rounding noise.
    pub atom_floor: T,
    /// Stopping tolerance of the Neumann series. Zero runs the series until
    /// every new frequency lies beyond the cutoff, which keeps the high
    /// atoms exact after the `e^{2πγs}` rescaling.
    pub neumann_tol: T,
    /// Refuse sums whose zeros near the origin are not all real.
    pub check_realness: bool,
}

impl<T: Real> Default for LogDerivOptions<T> {
    fn default() -> Self {
        Self {
            height: Height::Auto,
            cutoff: T::lit(10.0),
            atom_floor: T::lit(1e-7),
            neumann_tol: T::zero(),
            check_realness: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct LogDerivMeasure<T> {
    pub measure: PointMeasure<T>,
    pub height: T,
    pub h_norm: T,
    /// `‖f′·f⁻¹‖_W` at the height, truncated at the cutoff.
    pub logderiv_norm: T,
    /// `2π·max|ω|·Σ|q_n/q₁|e^{−2π(ω_n−ω₁)s} / (1 − ‖H‖_W)`.
    pub bound: T,
}

/// Atoms of the zero counting measure of `f` from the expansion
/// `f′(x+is)/f(x+is) = Σ p_γ e^{2πiγx}`: `d = −p₀/(πi)` and
/// `b_γ = i p_γ e^{2πγs}/(2π)`, negative atoms by conjugation.
pub fn logderiv_measure<T: Real>(
    f: &ExpSum<T>,
    opts: &LogDerivOptions<T>,
) -> Result<LogDerivMeasure<T>> {
    if f.len() < 2 {
        return Err(Error::Domain(
            "a single exponential has no zeros; the measure is undefined".into(),
        ));
    }
    if !(opts.cutoff > T::zero()) {
        return Err(Error::InvalidInput("cutoff must be positive".into()));
    }
    if opts.check_realness {
        check_real_zeros(f)?;
    }
    let cfg = AlgebraConfig::<T>::from_env()?.without_pruning();
    let nopts = NeumannOptions {
        height: opts.height,
        tol: opts.neumann_tol,
        max_iter: 100_000,
        ceiling: Some(opts.cutoff),
    };
    let inv = neumann_inverse(f, &nopts, &cfg)?;
    let s = inv.height;
    let fs = f.at_height(s, &cfg)?;
    let dfs = fs.derivative(&cfg)?;
    let ld = dfs.multiply_below(&inv.inverse, Some(opts.cutoff), &cfg)?;

    let pi_i = Complex::new(T::zero(), T::PI());
    let tol = cfg.freq_tol;
    let p0 = ld.coefficient_at(T::zero(), tol);
    let d = (-p0 / pi_i).re;
    let scale = Complex::new(T::zero(), T::one() / T::two_pi());
    let mut atoms = Vec::new();
    for t in ld.terms() {
        if t.omega <= tol || t.omega >= opts.cutoff {
            continue;
        }
        let b = scale * t.q * (T::two_pi() * t.omega * s).exp();
        if !(b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::Overflow(format!("atom at {} overflows", t.omega)));
        }
        if b.norm() > opts.atom_floor {
            atoms.push(Atom { gamma: t.omega, b });
            atoms.push(Atom {
                gamma: -t.omega,
                b: b.conj(),
            });
        }
    }
    let measure = PointMeasure::new(d.max(T::zero()), atoms, Some(opts.cutoff))?;

    let first = f.terms()[0];
    let tail: T = f
        .terms()
        .iter()
        .map(|t| t.q.norm() / first.q.norm() * (-T::two_pi() * (t.omega - first.omega) * s).exp())
        .sum();
    let bound = T::two_pi() * f.max_abs_frequency() * tail / (T::one() - inv.h_norm);
    Ok(LogDerivMeasure {
        measure,
        height: s,
        h_norm: inv.h_norm,
        logderiv_norm: ld.wiener_norm(),
        bound,
    })
}

/// Compares real zeros with all zeros over a window around the origin
/// holding a few dozen of them.
fn check_real_zeros<T: Real>(f: &ExpSum<T>) -> Result<()> {
    let (lo, hi) = f.spectrum_bounds().expect("nonempty");
    let w = T::lit(4.0).max(T::lit(12.0) / (hi - lo));
    let opts = ZeroOptions::default();
    let mut last = None;
    for k in 0..6 {
        let shift = T::lit(0.0137 + 0.0371 * k as f64);
        match find_real_zeros(f, (-w + shift, w + shift), &opts) {
            Ok(z) => {
                let total = z.strip_total.unwrap_or(0);
                if u64::from(total) != z.zeros.total_count() {
                    return Err(Error::Domain(format!(
                        "{} of {total} zeros near the origin are real; the measure needs real zeros",
                        z.zeros.total_count()
                    )));
                }
                return Ok(());
            }
            Err(e @ (Error::BoundaryZero { .. } | Error::ContourTooClose { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec<T> {
    /// `g(x) = e^{−πx²/σ²}`, `ĝ(t) = σe^{−πσ²t²}`.
    pub sigma: T,
    pub tail_tol: T,
}

impl<T: Real> Default for GaussianSpec<T> {
    fn default() -> Self {
        Self {
            sigma: T::one(),
            tail_tol: T::lit(1e-10),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport<T> {
    pub residual: T,
    /// `Σ mult·ĝ(a)` over the points.
    pub points_side: Complex<T>,
    /// `d·g(0) + Σ b_γ g(γ)`.
    pub atoms_side: Complex<T>,
    pub points_tail: T,
    pub atoms_tail: T,
}

/// `Σ_{j≥0} 2 e^{−π(r+j)²/w²}`, the two-sided Gaussian tail beyond `r` with
/// unit spacing.
fn gaussian_tail<T: Real>(r: T, w: T) -> T {
    let mut acc = T::zero();
    let mut j = 0usize;
    loop {
        let x = r + T::from_usize_lossy(j);
        let term = T::lit(2.0) * (-T::PI() * x * x / (w * w)).exp();
        acc += term;
        j += 1;
        if term <= acc * T::epsilon() || j > 100_000 {
            break;
        }
    }
    acc
}

/// Smallest `r` with `scale·gaussian_tail(r, w) ≤ tol`.
fn required_extent<T: Real>(scale: T, w: T, tol: T) -> T {
    let mut r = T::one();
    while scale * gaussian_tail(r, w) > tol && r < T::lit(1e12) {
        r *= T::lit(1.25);
    }
    r
}

/// `|Σ mult·ĝ(a_n) − (d·g(0) + Σ b_γ g(γ))|` with the tails of both sums
/// bounded from `k₁` and the largest atom mass per unit interval.
pub fn poisson_residual<T: Real>(
    a: &ZeroSet<T>,
    mu: &PointMeasure<T>,
    spec: &GaussianSpec<T>,
) -> Result<PoissonReport<T>> {
    let sigma = spec.sigma;
    if !(sigma > T::zero()) {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    let k1 = if a.is_empty() {
        T::one()
    } else {
        T::lit(counting_constants(a, 0, 0)?.k1 as f64)
    };
    let (lo, hi) = a.window();
    let r = hi.min(-lo);
    // ĝ(t) = σ e^{−π t²/(1/σ)²}
    let points_tail = k1 * sigma * gaussian_tail(r.max(T::zero()), T::one() / sigma);
    let mass = mu.unit_mass().max(T::one());
    let atoms_tail = mass * gaussian_tail(mu.extent(), sigma);
    if points_tail > spec.tail_tol || atoms_tail > spec.tail_tol {
        let need_r = required_extent(k1 * sigma, T::one() / sigma, spec.tail_tol);
        let need_g = required_extent(mass, sigma, spec.tail_tol);
        return Err(Error::InsufficientData {
            message: format!(
                "tails {points_tail:e} (points, half-length {r}) and {atoms_tail:e} \
                 (atoms, cutoff {}) exceed {}; atoms are needed up to |γ| = {need_g}",
                mu.extent(),
                spec.tail_tol
            ),
            required_half_length: need_r.to_f64_lossy(),
        });
    }

    let mut lhs = CompensatedComplex::new();
    for p in a.points() {
        let v = sigma * (-T::PI() * sigma * sigma * p.a * p.a).exp();
        lhs.add(Complex::new(v * T::from_usize_lossy(p.mult as usize), T::zero()));
    }
    let mut rhs = CompensatedComplex::new();
    rhs.add(Complex::new(mu.d, T::zero()));
    for atom in &mu.atoms {
        let g = (-T::PI() * atom.gamma * atom.gamma / (sigma * sigma)).exp();
        rhs.add(atom.b * g);
    }
    let (l, rr) = (lhs.value(), rhs.value());
    Ok(PoissonReport {
        residual: (l - rr).norm(),
        points_side: l,
        atoms_side: rr,
        points_tail,
        atoms_tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct GrowthProfile<T> {
    /// `(s, Σ_{0<γ≤s} |b_γ|)`.
    pub m_of_s: Vec<(T, T)>,
    /// `Σ_{0<γ<1} |b_γ|/γ`.
    pub t3_value: T,
    /// Least-squares slope of `log m` against `log s` over the top decade
    /// of `s`, when at least two such points have `m > 0`.
    pub kappa_fit: Option<T>,
}

pub fn growth_profile<T: Real>(mu: &PointMeasure<T>, s_grid: &[T]) -> GrowthProfile<T> {
    let mut pos: Vec<(T, T)> = mu.positive_atoms().map(|a| (a.gamma, a.b.norm())).collect();
    pos.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    let mut grid = s_grid.to_vec();
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
    let mut m_of_s = Vec::with_capacity(grid.len());
    let mut j = 0;
    let mut acc = T::zero();
    for &s in &grid {
        while j < pos.len() && pos[j].0 <= s {
            acc += pos[j].1;
            j += 1;
        }
        m_of_s.push((s, acc));
    }
    let t3_value = pos
        .iter()
        .filter(|(g, _)| *g < T::one())
        .map(|(g, m)| *m / *g)
        .sum();
    let kappa_fit = grid.last().and_then(|&s_max| {
        let (xs, ys): (Vec<T>, Vec<T>) = m_of_s
            .iter()
            .filter(|(s, m)| *s >= s_max / T::lit(10.0) && *s > T::zero() && *m > T::zero())
            .map(|(s, m)| (s.ln(), m.ln()))
            .unzip();
        (xs.len() >= 2).then(|| ls_slope(&xs, &ys))
    });
    GrowthProfile {
        m_of_s,
        t3_value,
        kappa_fit,
    }
}
