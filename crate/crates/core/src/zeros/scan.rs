//! Real zeros of an exponential sum over a finite window.
//!
//! A sum with only real zeros factors as `c·e^{2πiβz}·P(z)` with `P` real on
//! the real axis and `β` the midpoint of the spectrum. The scanner therefore
//! works with `r(x) = Re(e^{−iφ} e^{−2πiβx} f(x))`, which equals `±|c|P(x)`
//! in that case and in general has every real zero of `f` among its zeros.
//! Candidates are verified against `|f|` and their multiplicities read off
//! from small argument-principle boxes.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::contour::{count_zeros_rectangle, zero_strip, ContourOptions, Rect};
use super::{ZeroPoint, ZeroSet};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::wiener::{AlgebraConfig, ExpSum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroOptions<T> {
    /// Accept a root when `|f(a)| ≤ resid_tol · ‖f‖_W`.
    pub resid_tol: T,
    /// `|f|` at a window end below `boundary_tol · ‖f‖_W` is an error.
    pub boundary_tol: T,
    /// Absolute Newton/bisection convergence.
    pub newton_tol: T,
    pub max_newton: usize,
    /// Overrides the scan step `1/(16B)`.
    pub step: Option<T>,
    /// Compare the multiplicity total against a strip count over the window.
    pub verify_total: bool,
    pub contour: ContourOptions<T>,
    /// Edge margin for the small multiplicity boxes, which sit close to
    /// neighbouring zeros by design.
    pub box_edge_margin: T,
}

impl<T: Real> Default for ZeroOptions<T> {
    fn default() -> Self {
        Self {
            resid_tol: T::lit(1e-8),
            boundary_tol: T::lit(1e-6),
            newton_tol: T::lit(1e-12),
            max_newton: 60,
            step: None,
            verify_total: true,
            contour: ContourOptions::default(),
            box_edge_margin: T::lit(1e-12),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RealZeros<T> {
    pub zeros: ZeroSet<T>,
    /// Set when `f` has fewer than two terms and so no zeros at all.
    pub no_zeros: bool,
    pub scan_step: T,
    /// Zero count of the strip `[window] × [y_lo, y_hi]` containing every
    /// zero with real part in the window.
    pub strip_total: Option<u32>,
    pub strip: Option<(T, T)>,
}

impl<T: Real> RealZeros<T> {
    /// Multiplicity total equals the strip count.
    pub fn is_complete(&self) -> bool {
        self.strip_total
            .map(|n| u64::from(n) == self.zeros.total_count())
            .unwrap_or(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealnessReport {
    pub real_count: u64,
    pub total_count: u64,
    pub all_real: bool,
}

/// Real-valued companion of `f` used for sign scanning, with its first two
/// derivatives.
struct Realified<T> {
    r: ExpSum<T>,
    dr: ExpSum<T>,
    ddr: ExpSum<T>,
}

impl<T: Real> Realified<T> {
    fn new(f: &ExpSum<T>) -> Result<Self> {
        let cfg = AlgebraConfig::default().without_pruning();
        let (lo, hi) = f.spectrum_bounds().expect("nonempty");
        let beta = (lo + hi) * T::lit(0.5);
        let first = f.terms()[0].q;
        let last = f.terms()[f.len() - 1].q;
        let phi = (first * last).arg() * T::lit(0.5);
        let rot = Complex::from_polar(T::one(), -phi);
        let r = f.shift_frequencies(-beta).scale(rot);
        let dr = r.derivative(&cfg)?;
        let ddr = dr.derivative(&cfg)?;
        Ok(Self { r, dr, ddr })
    }

    fn half_width(&self) -> T {
        self.r.max_abs_frequency()
    }

    fn r(&self, x: T) -> T {
        self.r.eval_real(x).re
    }

    fn dr(&self, x: T) -> T {
        self.dr.eval_real(x).re
    }

    fn ddr(&self, x: T) -> T {
        self.ddr.eval_real(x).re
    }
}

/// All real zeros of `f` in `window`, with multiplicities.
pub fn find_real_zeros<T: Real>(
    f: &ExpSum<T>,
    window: (T, T),
    opts: &ZeroOptions<T>,
) -> Result<RealZeros<T>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("bad window [{lo}, {hi}]")));
    }
    if f.len() < 2 {
        return Ok(RealZeros {
            zeros: ZeroSet::new(window, Vec::new())?,
            no_zeros: true,
            scan_step: T::zero(),
            strip_total: Some(0),
            strip: None,
        });
    }
    let scale = f.wiener_norm();
    for x in [lo, hi] {
        if f.eval_real(x).norm() < opts.boundary_tol * scale {
            return Err(Error::BoundaryZero {
                x: x.to_f64_lossy(),
                tol: opts.boundary_tol.to_f64_lossy(),
            });
        }
    }

    let re = Realified::new(f)?;
    let bandwidth = re.half_width();
    let step = opts
        .step
        .unwrap_or_else(|| T::one() / (T::lit(16.0) * bandwidth));
    let n_cells = ((hi - lo) / step).ceil().to_usize().unwrap_or(1).max(1);
    let xs: Vec<T> = (0..=n_cells)
        .map(|k| {
            if k == n_cells {
                hi
            } else {
                lo + T::from_usize_lossy(k) * step
            }
        })
        .collect();
    let rs: Vec<T> = xs.iter().map(|&x| re.r(x)).collect();
    let r_scale = re.r.wiener_norm();

    let finder = RootFinder { re: &re, opts };
    let mut roots: Vec<T> = Vec::new();
    for k in 0..n_cells {
        let (a, b) = (xs[k], xs[k + 1]);
        let (ra, rb) = (rs[k], rs[k + 1]);
        if ra == T::zero() {
            roots.push(a);
        } else if ra * rb < T::zero() {
            roots.push(finder.bracketed(a, b, ra)?);
        }
    }
    if rs[n_cells] == T::zero() {
        roots.push(hi);
    }
    // local minima of |r| without a sign change: double roots or close pairs
    let dip = T::lit(0.2) * r_scale;
    for k in 1..n_cells {
        let (rp, rk, rn) = (rs[k - 1], rs[k], rs[k + 1]);
        if rk == T::zero() || rp * rk <= T::zero() || rk * rn <= T::zero() {
            continue;
        }
        if rk.abs() <= rp.abs() && rk.abs() <= rn.abs() && rk.abs() < dip {
            roots.extend(finder.dip(xs[k - 1], xs[k + 1], rk.signum(), r_scale)?);
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9) * T::one().max(a.abs()));

    // verification and multiplicities
    let mut points: Vec<ZeroPoint<T>> = Vec::with_capacity(roots.len());
    for (i, &a) in roots.iter().enumerate() {
        if f.eval_real(a).norm() > opts.resid_tol * scale {
            continue;
        }
        let mut w = step;
        if i > 0 {
            w = w.min(T::lit(0.45) * (a - roots[i - 1]));
        }
        if i + 1 < roots.len() {
            w = w.min(T::lit(0.45) * (roots[i + 1] - a));
        }
        let box_opts = ContourOptions {
            edge_margin: opts.box_edge_margin,
            ..opts.contour
        };
        let mult = stable_multiplicity(f, a, w, &box_opts)?;
        if mult > 0 {
            points.push(ZeroPoint { a, mult });
        }
    }
    let zeros = ZeroSet::new(window, points)?;

    let (strip_total, strip) = if opts.verify_total {
        let (y_lo, y_hi) = zero_strip(f);
        let n = count_zeros_rectangle(f, &Rect::new(lo, hi, y_lo, y_hi), &opts.contour)?;
        (Some(n), Some((y_lo, y_hi)))
    } else {
        (None, None)
    };

    Ok(RealZeros {
        zeros,
        no_zeros: false,
        scan_step: step,
        strip_total,
        strip,
    })
}

/// Box count around `a`, shrinking the box until two successive counts
/// agree so that nearby non-real zeros drop out.
fn stable_multiplicity<T: Real>(
    f: &ExpSum<T>,
    a: T,
    w0: T,
    opts: &ContourOptions<T>,
) -> Result<u32> {
    let mut w = w0;
    let mut prev = count_zeros_rectangle(f, &Rect::around(a, w), opts)?;
    let floor = T::lit(1e-9) * T::one().max(a.abs());
    while w > floor {
        let next_w = w / T::lit(8.0);
        let next = match count_zeros_rectangle(f, &Rect::around(a, next_w), opts) {
            Ok(n) => n,
            // too small a box for a multiple zero's flat neighbourhood
            Err(Error::ContourTooClose { .. }) => return Ok(prev),
            Err(e) => return Err(e),
        };
        if next == prev {
            return Ok(prev);
        }
        prev = next;
        w = next_w;
    }
    Ok(prev)
}

struct RootFinder<'a, T> {
    re: &'a Realified<T>,
    opts: &'a ZeroOptions<T>,
}

impl<T: Real> RootFinder<'_, T> {
    fn tol(&self, x: T) -> T {
        self.opts.newton_tol.max(T::lit(4.0) * x.ulp())
    }

    /// Safeguarded Newton on `r` inside a sign-change bracket.
    fn bracketed(&self, mut a: T, mut b: T, mut ra: T) -> Result<T> {
        let mut x = (a + b) * T::lit(0.5);
        for _ in 0..self.opts.max_newton {
            let rx = self.re.r(x);
            if rx == T::zero() {
                return Ok(x);
            }
            if rx * ra < T::zero() {
                b = x;
            } else {
                a = x;
                ra = rx;
            }
            let d = self.re.dr(x);
            let newton = x - rx / d;
            let next = if d != T::zero() && newton > a && newton < b {
                newton
            } else {
                (a + b) * T::lit(0.5)
            };
            let tol = self.tol(x);
            if (next - x).abs() <= tol || (b - a) <= tol {
                return Ok(next);
            }
            x = next;
        }
        Err(Error::Convergence {
            what: format!("root refinement near x = {x}"),
            iterations: self.opts.max_newton,
        })
    }

    /// Handles a dip of `sign·r` on `[a, b]`: returns a double-root
    /// candidate, two simple roots, or nothing.
    fn dip(&self, a: T, b: T, sign: T, r_scale: T) -> Result<Vec<T>> {
        let g = |x: T| sign * self.re.r(x);
        let c = golden_min(g, a, b, T::lit(1e-10) * T::one().max(a.abs()));
        let c = self.critical_point(c, a, b);
        let rc = g(c);
        if rc < T::zero() {
            let left = self.bracketed(a, c, self.re.r(a))?;
            let right = self.bracketed(c, b, self.re.r(c))?;
            Ok(vec![left, right])
        } else if rc <= self.opts.resid_tol * r_scale {
            Ok(vec![c])
        } else {
            Ok(Vec::new())
        }
    }

    /// Newton on `r′` from `x0`, kept inside `[a, b]`.
    fn critical_point(&self, x0: T, a: T, b: T) -> T {
        let mut x = x0;
        for _ in 0..self.opts.max_newton {
            let d2 = self.re.ddr(x);
            if d2 == T::zero() {
                break;
            }
            let next = x - self.re.dr(x) / d2;
            if !(next > a && next < b) {
                break;
            }
            if (next - x).abs() <= self.tol(x) {
                return next;
            }
            x = next;
        }
        x
    }
}

fn golden_min<T: Real>(g: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    (a + b) * T::lit(0.5)
}

/// Compares the strip count `[window] × [−strip_height, strip_height]` with
/// the multiplicity total of the real zeros in the window.
pub fn realness_check<T: Real>(
    f: &ExpSum<T>,
    window: (T, T),
    strip_height: T,
    opts: &ZeroOptions<T>,
) -> Result<RealnessReport> {
    if f.len() < 2 {
        return Ok(RealnessReport {
            real_count: 0,
            total_count: 0,
            all_real: true,
        });
    }
    let mut o = *opts;
    o.verify_total = false;
    let real = find_real_zeros(f, window, &o)?.zeros.total_count();
    let rect = Rect::new(window.0, window.1, -strip_height, strip_height);
    let total = u64::from(count_zeros_rectangle(f, &rect, &opts.contour)?);
    Ok(RealnessReport {
        real_count: real,
        total_count: total,
        all_real: real == total,
    })
}
