//! Zero counting by the argument principle along rectangle boundaries.
//!
//! The winding of `f` is accumulated segment by segment. A segment
//! `[z_a, z_b]` of length `L` is accepted once `D·L < ρ·max(|f(z_a)|, |f(z_b)|)`
//! with `D` a bound on `|f′|` over the segment; the image of the segment then
//! stays inside a disc that excludes the origin, so its argument increment is
//! the principal value of `arg(f(z_b)/f(z_a))`. Segments failing the test are
//! halved.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::wiener::ExpSum;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// Square box of half-width `w` centred on the real point `a`.
    pub fn around(a: T, w: T) -> Self {
        Self::new(a - w, a + w, -w, w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions<T> {
    /// `|f|` below `edge_margin · ‖f‖_W` on the contour is an error.
    pub edge_margin: T,
    /// Acceptance ratio `ρ` of the segment test.
    pub accept_ratio: T,
    /// Shortest segment before giving up.
    pub min_segment: T,
    pub initial_segments: usize,
}

impl<T: Real> Default for ContourOptions<T> {
    fn default() -> Self {
        Self {
            edge_margin: T::lit(1e-6),
            accept_ratio: T::lit(0.9),
            min_segment: T::lit(1e-13),
            initial_segments: 8,
        }
    }
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity.
pub fn count_zeros_rectangle<T: Real>(
    f: &ExpSum<T>,
    rect: &Rect<T>,
    opts: &ContourOptions<T>,
) -> Result<u32> {
    if !(rect.x0 < rect.x1 && rect.y0 < rect.y1) {
        return Err(Error::InvalidInput("degenerate rectangle".into()));
    }
    if f.is_empty() {
        return Err(Error::InvalidInput(
            "the zero function has no isolated zeros".into(),
        ));
    }
    let corners = [
        Complex::new(rect.x0, rect.y0),
        Complex::new(rect.x1, rect.y0),
        Complex::new(rect.x1, rect.y1),
        Complex::new(rect.x0, rect.y1),
    ];
    let margin = opts.edge_margin * f.wiener_norm();
    let ctx = Walker { f, opts, margin };
    let mut total = T::zero();
    for i in 0..4 {
        let (za, zb) = (corners[i], corners[(i + 1) % 4]);
        total += ctx.edge_winding(za, zb)?;
    }
    let turns = total / T::two_pi();
    let rounded = turns.round();
    if (turns - rounded).abs() > T::lit(0.25) || rounded < T::zero() {
        return Err(Error::Convergence {
            what: format!("winding number {turns} not near a nonnegative integer"),
            iterations: 0,
        });
    }
    Ok(rounded.to_u32().unwrap_or(0))
}

struct Walker<'a, T> {
    f: &'a ExpSum<T>,
    opts: &'a ContourOptions<T>,
    margin: T,
}

impl<T: Real> Walker<'_, T> {
    fn value(&self, z: Complex<T>) -> Result<Complex<T>> {
        let v = self.f.evaluate(z)?;
        if v.norm() <= self.margin {
            return Err(Error::ContourTooClose {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        Ok(v)
    }

    /// `sup |f′|` over the segment, from the term-wise bound with the
    /// damping factor maximised over the segment's height range.
    fn derivative_bound(&self, za: Complex<T>, zb: Complex<T>) -> T {
        let (ya, yb) = (za.im, zb.im);
        self.f
            .terms()
            .iter()
            .map(|t| {
                let ea = (-T::two_pi() * t.omega * ya).exp();
                let eb = (-T::two_pi() * t.omega * yb).exp();
                T::two_pi() * t.omega.abs() * t.q.norm() * ea.max(eb)
            })
            .sum()
    }

    fn edge_winding(&self, za: Complex<T>, zb: Complex<T>) -> Result<T> {
        let n = self.opts.initial_segments.max(1);
        let nf = T::from_usize_lossy(n);
        let mut total = T::zero();
        let mut prev_z = za;
        let mut prev_v = self.value(za)?;
        for k in 1..=n {
            let z = if k == n {
                zb
            } else {
                za + (zb - za) * (T::from_usize_lossy(k) / nf)
            };
            let v = self.value(z)?;
            total += self.segment(prev_z, prev_v, z, v)?;
            prev_z = z;
            prev_v = v;
        }
        Ok(total)
    }

    fn segment(&self, za: Complex<T>, va: Complex<T>, zb: Complex<T>, vb: Complex<T>) -> Result<T> {
        let len = (zb - za).norm();
        let d = self.derivative_bound(za, zb);
        if d * len < self.opts.accept_ratio * va.norm().max(vb.norm()) {
            return Ok((vb / va).arg());
        }
        let scale = za.norm().max(zb.norm()).max(T::one());
        if len < self.opts.min_segment * scale {
            let mid = (za + zb) * T::lit(0.5);
            return Err(Error::ContourTooClose {
                re: mid.re.to_f64_lossy(),
                im: mid.im.to_f64_lossy(),
            });
        }
        let zm = (za + zb) * T::lit(0.5);
        let vm = self.value(zm)?;
        Ok(self.segment(za, va, zm, vm)? + self.segment(zm, vm, zb, vb)?)
    }
}

/// Heights `(y_lo, y_hi)` outside which `f` has no zeros: above `y_hi` the
/// lowest-frequency term dominates the rest by a factor two, below `y_lo` the
/// highest-frequency term does. Always `y_lo < 0 < y_hi`.
pub fn zero_strip<T: Real>(f: &ExpSum<T>) -> (T, T) {
    let pad = T::lit(0.1);
    let terms = f.terms();
    if terms.len() < 2 {
        return (-pad, pad);
    }
    let half = T::lit(0.5);
    let low = terms[0];
    let high = terms[terms.len() - 1];
    // Σ_{n≥2} |q_n/q_1| e^{-2π(ω_n-ω_1) y}, decreasing in y
    let upper = |y: T| -> T {
        terms[1..]
            .iter()
            .map(|t| t.q.norm() / low.q.norm() * (-T::two_pi() * (t.omega - low.omega) * y).exp())
            .sum()
    };
    // Σ_{n<N} |q_n/q_N| e^{2π(ω_N-ω_n) y}, increasing in y
    let lower = |y: T| -> T {
        terms[..terms.len() - 1]
            .iter()
            .map(|t| t.q.norm() / high.q.norm() * (T::two_pi() * (high.omega - t.omega) * y).exp())
            .sum()
    };
    let y_hi = solve_monotone(|y| upper(y) <= half, T::one()).max(pad);
    let y_lo = -solve_monotone(|y| lower(-y) <= half, T::one()).max(pad);
    (y_lo, y_hi)
}

/// Smallest `y ≥ 0` (to bisection accuracy) with `ok(y)`, for `ok` monotone
/// false → true.
fn solve_monotone<T: Real>(ok: impl Fn(T) -> bool, start: T) -> T {
    if ok(T::zero()) {
        return T::zero();
    }
    let mut hi = start;
    while !ok(hi) {
        hi *= T::lit(2.0);
        if !hi.is_finite() {
            return hi;
        }
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::lit(1e-12) * hi {
            break;
        }
    }
    hi
}
