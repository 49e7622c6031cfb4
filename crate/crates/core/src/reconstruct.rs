//! From zeros or atoms back to functions: the canonical product over a zero
//! set, the exponential sum rebuilt from a point measure, the `g`-function
//! test for almost periodicity and exponential-type estimates.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::diffraction::PointMeasure;
use crate::error::{Error, Result};
use crate::real::{exp_m1, ls_slope, CompensatedComplex, Real};
use crate::wiener::{AlgebraConfig, ExpSum, Term};
use crate::zeros::ZeroSet;

/// Default ceiling on `Σ_{0<γ<1} |b_γ|/γ` accepted by
/// [`log_series_at_height_one`].
pub const DEFAULT_T3_BUDGET: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductValue<T> {
    pub value: Complex<T>,
    /// Heuristic size of the error left after the tail correction.
    pub truncation_error: T,
    /// Translation applied because `0` was a point of the set; the value is
    /// that of the translated set's product at `z + shift`.
    pub shift: T,
    /// Set when `z` sits on a point; then `value` is zero.
    pub zero_mult: Option<u32>,
    pub pairs: usize,
}

/// Symmetric pairing `a_0; (a_1, a_{−1}); (a_2, a_{−2}); …` of a finite set.
struct Pairing<T> {
    pts: Vec<T>,
    offset: usize,
    pairs: usize,
    d: T,
    mean_phi: T,
    phi_spread: T,
}

impl<T: Real> Pairing<T> {
    fn new(a: &ZeroSet<T>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::EmptySet);
        }
        let pts = a.expanded();
        let offset = pts.partition_point(|&x| x < T::zero());
        let pairs = if offset < pts.len() {
            offset.min(pts.len() - offset - 1)
        } else {
            0
        };
        let d = T::lit(a.total_count() as f64) / a.window_length();
        let mut sum = T::zero();
        let mut phis = Vec::with_capacity(2 * pairs);
        for n in 1..=pairs {
            let nf = T::from_usize_lossy(n) / d;
            let p_pos = pts[offset + n] - nf;
            let p_neg = pts[offset - n] + nf;
            sum += p_pos + p_neg;
            phis.push(p_pos);
            phis.push(p_neg);
        }
        let mean_phi = if pairs > 0 {
            sum / T::from_usize_lossy(2 * pairs)
        } else {
            T::zero()
        };
        let phi_spread = phis
            .iter()
            .fold(T::zero(), |m, &p| m.max((p - mean_phi).abs()));
        Ok(Self {
            pts,
            offset,
            pairs,
            d,
            mean_phi,
            phi_spread,
        })
    }

    fn used(&self) -> impl Iterator<Item = T> + '_ {
        let hi = if self.offset < self.pts.len() {
            self.offset + self.pairs + 1
        } else {
            self.offset
        };
        self.pts[self.offset - self.pairs..hi].iter().copied()
    }

    /// `Σ_{n>N} [log(1−z/a_n) + log(1−z/a_{−n})]` for `a_{±n} ≈ ±n/d + m`.
    fn tail(&self, z: Complex<T>) -> Complex<T> {
        let n = T::from_usize_lossy(self.pairs) + T::lit(0.5);
        let two = T::lit(2.0);
        (z * two * self.mean_phi - z * z) * (self.d * self.d) / n
    }

    fn tail_error(&self, z: Complex<T>) -> T {
        let n = T::from_usize_lossy(self.pairs) + T::lit(0.5);
        let r = z.norm();
        let dr = self.d * r;
        T::lit(2.0) * self.d * dr * self.phi_spread / n + dr * dr * dr / (n * n)
    }
}

/// `(1 − z/a_0) Π_{n≥1} (1 − z/a_n)(1 − z/a_{−n})` over the symmetric part
/// of the window, plus a closed-form estimate of the missing pairs.
pub fn canonical_product<T: Real>(a: &ZeroSet<T>, z: Complex<T>) -> Result<ProductValue<T>> {
    let (set, shift) = a.off_origin();
    let w = z + shift;
    let p = Pairing::new(&set)?;
    for pt in set.points() {
        let scale = T::one().max(pt.a.abs());
        if (w - pt.a).norm() <= T::lit(1e-12) * scale {
            return Ok(ProductValue {
                value: Complex::default(),
                truncation_error: T::zero(),
                shift,
                zero_mult: Some(pt.mult),
                pairs: p.pairs,
            });
        }
    }
    let log = product_log(&p, w);
    Ok(ProductValue {
        value: log.exp(),
        truncation_error: p.tail_error(w),
        shift,
        zero_mult: None,
        pairs: p.pairs,
    })
}

fn product_log<T: Real>(p: &Pairing<T>, w: Complex<T>) -> Complex<T> {
    let mut acc = CompensatedComplex::new();
    let one = Complex::new(T::one(), T::zero());
    for x in p.used() {
        acc.add((one - w / x).ln());
    }
    acc.add(p.tail(w));
    acc.value()
}

/// `log |canonical product|`, finite even where the value itself overflows.
pub fn canonical_product_log_abs<T: Real>(a: &ZeroSet<T>, z: Complex<T>) -> Result<T> {
    let (set, shift) = a.off_origin();
    let p = Pairing::new(&set)?;
    Ok(product_log(&p, z + shift).re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct LogSeries<T> {
    /// `Σ_{γ>0} −(b_γ/γ) e^{−2πγ} e^{2πiγx}`.
    pub series: ExpSum<T>,
    pub t3: T,
    pub norm: T,
    /// Bound on the dropped part beyond the measure's cutoff.
    pub tail_bound: T,
}

/// The series of `log f(x+i) + iπdx` up to an additive constant.
pub fn log_series_at_height_one<T: Real>(
    mu: &PointMeasure<T>,
    d: T,
    t3_budget: T,
) -> Result<LogSeries<T>> {
    if !(d > T::zero()) {
        return Err(Error::Domain(format!("density must be positive, got {d}")));
    }
    let mut t3 = T::zero();
    let mut raw = Vec::new();
    for atom in mu.positive_atoms() {
        let g = atom.gamma;
        if g < T::one() {
            t3 += atom.b.norm() / g;
        }
        let damp = (-T::two_pi() * g).exp();
        raw.push(Term::new(g, -atom.b / g * damp));
    }
    if t3 > t3_budget {
        return Err(Error::T3Budget {
            t3: t3.to_f64_lossy(),
            budget: t3_budget.to_f64_lossy(),
        });
    }
    let series = ExpSum::canonicalize(raw, &AlgebraConfig::from_env()?)?;
    let tail_bound = match mu.cutoff {
        Some(c) if c > T::zero() => {
            let mass = mu.unit_mass();
            let mut acc = T::zero();
            let mut j = 0usize;
            loop {
                let g = c + T::from_usize_lossy(j);
                let term = mass * (-T::two_pi() * g).exp() / g;
                acc += term;
                j += 1;
                if term <= acc * T::epsilon() || j > 10_000 {
                    break;
                }
            }
            acc
        }
        _ => T::zero(),
    };
    Ok(LogSeries {
        norm: series.wiener_norm(),
        series,
        t3,
        tail_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Rebuilt<T> {
    pub sum: ExpSum<T>,
    pub log: LogSeries<T>,
    /// No atoms: the result is a single exponential.
    pub degenerate: bool,
}

/// Exponentiates the height-one log series, maps `ω ↦ ω − d/2` with
/// `p ↦ p e^{2πω − πd}` and normalises so that the value at 0 is 1.
pub fn rebuild_dirichlet<T: Real>(mu: &PointMeasure<T>, d: T, t3_budget: T) -> Result<Rebuilt<T>> {
    let log = log_series_at_height_one(mu, d, t3_budget)?;
    let cfg = AlgebraConfig::from_env()?;
    let big_f = log.series.exp_series(&cfg)?;
    let half_d = d * T::lit(0.5);
    let mut raw = Vec::with_capacity(big_f.len());
    for t in big_f.terms() {
        let factor = (T::two_pi() * t.omega - T::PI() * d).exp();
        if !factor.is_finite() {
            return Err(Error::Overflow(format!(
                "e^(2π·{} − π·{d}) overflows",
                t.omega
            )));
        }
        raw.push(Term::new(t.omega - half_d, t.q * factor));
    }
    let f = ExpSum::canonicalize(raw, &cfg)?;
    let at0 = f.evaluate(Complex::default())?;
    if at0.norm() == T::zero() {
        return Err(Error::Domain("rebuilt sum vanishes at 0".into()));
    }
    let sum = f.scale(Complex::new(T::one(), T::zero()) / at0);
    Ok(Rebuilt {
        degenerate: mu.positive_atoms().next().is_none(),
        sum,
        log,
    })
}

/// `Σ_{0<γ<1} b_γ (e^{2πiγz} − 1)/γ`.
pub fn g_function<T: Real>(mu: &PointMeasure<T>, z: Complex<T>) -> Complex<T> {
    let mut acc = CompensatedComplex::new();
    let i2pi = Complex::new(T::zero(), T::two_pi());
    for atom in mu.positive_atoms() {
        if atom.gamma < T::one() {
            acc.add(atom.b * exp_m1(i2pi * z * atom.gamma) / atom.gamma);
        }
    }
    acc.value()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct GReport<T> {
    /// `(X, sup_{|x|≤X} |g(x)|)`.
    pub windows: Vec<(T, T)>,
    pub slope_fit: T,
    pub bounded_verdict: Verdict,
}

pub const BOUNDED_SLOPE: f64 = 0.02;
pub const GROWING_SLOPE: f64 = 0.1;

/// Running maxima of `|g|` on the real axis. Samples are spaced
/// `1/(32·γ_max)` with `γ_max` the largest frequency below 1; each local
/// maximum is refined by golden-section search. The slope is the
/// least-squares fit of `log sup` against `log X` over the upper half of the
/// windows.
pub fn g_boundedness<T: Real>(mu: &PointMeasure<T>, x_grid: &[T]) -> GReport<T> {
    let mut xs: Vec<T> = x_grid.iter().copied().filter(|x| *x > T::zero()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    xs.dedup();
    let g_max = mu
        .positive_atoms()
        .filter(|a| a.gamma < T::one())
        .fold(T::zero(), |m, a| m.max(a.gamma));
    if g_max == T::zero() {
        return GReport {
            windows: xs.iter().map(|&x| (x, T::zero())).collect(),
            slope_fit: T::zero(),
            bounded_verdict: Verdict::Bounded,
        };
    }
    let h = T::one() / (T::lit(32.0) * g_max);
    let abs_g = |x: T| g_function(mu, Complex::new(x, T::zero())).norm();
    let mut windows = Vec::with_capacity(xs.len());
    let mut sup = T::zero();
    let mut done = T::zero();
    for &x_max in &xs {
        // extend the sampled range [−done, done] to [−x_max, x_max]
        for sign in [T::one(), -T::one()] {
            let mut x = done;
            let mut prev2 = abs_g(sign * (x - h).max(T::zero()));
            let mut prev = abs_g(sign * x);
            while x < x_max {
                let next_x = (x + h).min(x_max);
                let cur = abs_g(sign * next_x);
                if prev >= prev2 && prev >= cur {
                    let lo = (x - h).max(T::zero());
                    let peak = golden_peak(&abs_g, sign, lo, next_x);
                    sup = sup.max(peak);
                }
                sup = sup.max(cur).max(prev);
                prev2 = prev;
                prev = cur;
                x = next_x;
            }
        }
        done = x_max;
        windows.push((x_max, sup));
    }
    let top = &windows[windows.len() / 2..];
    let (lx, ly): (Vec<T>, Vec<T>) = top
        .iter()
        .filter(|(_, s)| *s > T::zero())
        .map(|(x, s)| (x.ln(), s.ln()))
        .unzip();
    let slope_fit = if lx.len() >= 2 { ls_slope(&lx, &ly) } else { T::zero() };
    let bounded_verdict = if slope_fit < T::lit(BOUNDED_SLOPE) {
        Verdict::Bounded
    } else if slope_fit > T::lit(GROWING_SLOPE) {
        Verdict::Growing
    } else {
        Verdict::Inconclusive
    };
    GReport {
        windows,
        slope_fit,
        bounded_verdict,
    }
}

fn golden_peak<T: Real>(g: &impl Fn(T) -> T, sign: T, mut a: T, mut b: T) -> T {
    let r = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(sign * c), g(sign * d));
    for _ in 0..80 {
        if b - a <= T::lit(1e-13) * T::one().max(b.abs()) {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(sign * c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(sign * d);
        }
    }
    gc.max(gd)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeEstimate<T> {
    /// `log|f(iy)|/y` at the largest `y`.
    pub raw: T,
    /// Two-point extrapolation removing the `1/y` term.
    pub richardson: T,
    pub y: T,
}

impl<T: Real> TypeEstimate<T> {
    pub fn estimate(&self) -> T {
        self.richardson
    }
}

fn type_from_logs<T: Real>(y_grid: &[T], log_abs: impl Fn(T) -> Result<T>) -> Result<TypeEstimate<T>> {
    let mut ys: Vec<T> = y_grid.iter().copied().filter(|y| *y > T::zero()).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    ys.dedup();
    let y1 = *ys
        .last()
        .ok_or_else(|| Error::InvalidInput("need a positive y".into()))?;
    let e = |y: T| -> Result<T> {
        let l = log_abs(y)?;
        if !l.is_finite() {
            return Err(Error::Overflow(format!("log|f(i·{y})| is not finite")));
        }
        Ok(l / y)
    };
    let e1 = e(y1)?;
    let richardson = if ys.len() >= 2 {
        let y2 = ys[ys.len() - 2];
        let e2 = e(y2)?;
        (y1 * e1 - y2 * e2) / (y1 - y2)
    } else {
        e1
    };
    Ok(TypeEstimate {
        raw: e1,
        richardson,
        y: y1,
    })
}

/// `lim y⁻¹ log|f(iy)|` from log-domain evaluations on `y_grid`.
pub fn exponential_type<T: Real>(f: &ExpSum<T>, y_grid: &[T]) -> Result<TypeEstimate<T>> {
    if f.is_empty() {
        return Err(Error::InvalidInput("the zero sum has no type".into()));
    }
    type_from_logs(y_grid, |y| Ok(f.log_abs(Complex::new(T::zero(), y))))
}

/// [`exponential_type`] for the canonical product of a zero set.
pub fn exponential_type_of_zeros<T: Real>(a: &ZeroSet<T>, y_grid: &[T]) -> Result<TypeEstimate<T>> {
    type_from_logs(y_grid, |y| {
        canonical_product_log_abs(a, Complex::new(T::zero(), y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffraction::Atom;
    use std::f64::consts::PI;

    fn lattice_measure(k_max: i32) -> PointMeasure<f64> {
        let atoms = (1..=k_max)
            .flat_map(|k| {
                let b = Complex::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
                [
                    Atom { gamma: k as f64, b },
                    Atom { gamma: -(k as f64), b },
                ]
            })
            .collect();
        PointMeasure::new(1.0, atoms, Some(k_max as f64 + 0.5)).unwrap()
    }

    #[test]
    fn product_of_half_lattice() {
        let a = ZeroSet::lattice(0.5, 1.0, (-1e4, 1e4), 1).unwrap();
        let at = |z| canonical_product(&a, z).unwrap().value;
        assert_eq!(at(Complex::new(0.0, 0.0)), Complex::new(1.0, 0.0));
        assert!((at(Complex::new(1.0, 0.0)) - Complex::new(-1.0, 0.0)).norm() < 1e-4);
        let ch = PI.cosh();
        assert!((at(Complex::new(0.0, 1.0)) - Complex::new(ch, 0.0)).norm() < 1e-3);
        let r = canonical_product(&a, Complex::new(2.5, 0.0)).unwrap();
        assert_eq!(r.zero_mult, Some(1));
    }

    #[test]
    fn product_translates_origin() {
        let a = ZeroSet::lattice(0.0, 1.0, (-100.0, 100.0), 1).unwrap();
        let r = canonical_product(&a, Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(r.shift, 0.5);
        assert_eq!(r.zero_mult, Some(1));
        // the translated set is ℤ+½, whose product is cos(πw)
        let r = canonical_product(&a, Complex::new(0.25, 0.0)).unwrap();
        assert!((r.value.re - (PI * 0.75).cos()).abs() < 1e-3);
    }

    #[test]
    fn log_series_lattice() {
        let s = log_series_at_height_one(&lattice_measure(5), 1.0, 1e3).unwrap();
        let t = s.series.terms()[0];
        assert_eq!(t.omega, 1.0);
        assert!((t.q.re - 1.8674e-3).abs() < 1e-7);
        let empty = PointMeasure::new(1.0, vec![], None).unwrap();
        assert!(log_series_at_height_one(&empty, 1.0, 1e3).unwrap().series.is_empty());
        assert!(matches!(
            log_series_at_height_one(&empty, 0.0, 1e3),
            Err(Error::Domain(_))
        ));
        let tiny = PointMeasure::new(
            1.0,
            vec![Atom {
                gamma: 1e-6,
                b: Complex::new(1.0, 0.0),
            }],
            None,
        )
        .unwrap();
        assert!(matches!(
            log_series_at_height_one(&tiny, 1.0, 1e3),
            Err(Error::T3Budget { .. })
        ));
    }

    #[test]
    fn rebuild_cosine() {
        let r = rebuild_dirichlet(&lattice_measure(10), 1.0, 1e3).unwrap();
        let terms = r.sum.terms();
        assert_eq!(terms.len(), 2, "{terms:?}");
        assert!((terms[0].omega + 0.5).abs() < 1e-12 && (terms[1].omega - 0.5).abs() < 1e-12);
        for t in terms {
            assert!((t.q - Complex::new(0.5, 0.0)).norm() < 1e-8);
        }
        assert!(!r.degenerate);
        let e = PointMeasure::new(1.0, vec![], None).unwrap();
        let r = rebuild_dirichlet(&e, 1.0, 1e3).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.sum.len(), 1);
    }

    #[test]
    fn g_cases() {
        let g = g_boundedness(&lattice_measure(5), &[10.0, 100.0]);
        assert_eq!(g.bounded_verdict, Verdict::Bounded);
        assert!(g.windows.iter().all(|w| w.1 == 0.0));

        let single = PointMeasure::new(
            1.0,
            vec![Atom {
                gamma: 0.6,
                b: Complex::new(-0.6, 0.0),
            }],
            None,
        )
        .unwrap();
        let v = g_function(&single, Complex::new(0.3, 0.0));
        let want = Complex::new(1.0, 0.0) - Complex::new(0.0, 1.2 * PI * 0.3).exp();
        assert!((v - want).norm() < 1e-14);
        let grid: Vec<f64> = (0..8).map(|k| 10f64 * 2f64.powi(k)).collect();
        let r = g_boundedness(&single, &grid);
        assert!((r.windows.last().unwrap().1 - 2.0).abs() < 1e-12);
        assert_eq!(r.bounded_verdict, Verdict::Bounded);
    }

    #[test]
    fn type_estimates() {
        let f = ExpSum::cosine(0.5);
        let t = exponential_type(&f, &[10.0, 20.0]).unwrap();
        assert!((t.raw - (PI - 2f64.ln() / 20.0)).abs() < 1e-9);
        assert!((t.estimate() - PI).abs() < 1e-6);
        let single = ExpSum::from_pairs(&[(0.25, Complex::new(3.0, 0.0))]).unwrap();
        let t = exponential_type(&single, &[5.0, 10.0]).unwrap();
        assert!((t.estimate() + 2.0 * PI * 0.25).abs() < 1e-12);
        let a = ZeroSet::lattice(0.5, 1.0, (-1e4, 1e4), 1).unwrap();
        let t = exponential_type_of_zeros(&a, &[5.0, 10.0]).unwrap();
        assert!((t.estimate() - PI).abs() < 0.05 * PI);
    }
}
