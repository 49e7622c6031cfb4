//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `2π`.
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Distance to the next representable value above `|self|`.
    fn ulp(self) -> Self {
        if !self.is_finite() {
            return Self::nan();
        }
        if self == Self::zero() {
            return Self::min_positive_value();
        }
        let (_, exp, _) = self.abs().integer_decode();
        Self::lit(2.0).powi(exp as i32)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{2πi t}` with the argument reduced modulo one before scaling, which keeps
/// phases accurate for large `t`.
#[inline]
pub fn unit_phase<T: Real>(t: T) -> Complex<T> {
    let frac = t - t.round();
    let (s, c) = (T::two_pi() * frac).sin_cos();
    Complex::new(c, s)
}

/// `e^{w} − 1` without cancellation for small `|w|`.
pub fn exp_m1<T: Real>(w: Complex<T>) -> Complex<T> {
    let (s, c) = w.im.sin_cos();
    let half = (w.im * T::lit(0.5)).sin();
    let em1 = w.re.exp_m1();
    // e^a cos b − 1 = (e^a − 1) cos b − 2 sin²(b/2)
    let re = em1 * c - T::lit(2.0) * half * half;
    let im = w.re.exp() * s;
    Complex::new(re, im)
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedComplex<T> {
    re: Compensated<T>,
    im: Compensated<T>,
}

impl<T: Real> CompensatedComplex<T> {
    pub fn new() -> Self {
        Self {
            re: Compensated::new(),
            im: Compensated::new(),
        }
    }

    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

/// Least-squares slope of `ys` against `xs`. Returns zero for fewer than two
/// distinct abscissae.
pub fn ls_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return T::zero();
    }
    let nf = T::from_usize_lossy(n);
    let mx = xs[..n].iter().copied().sum::<T>() / nf;
    let my = ys[..n].iter().copied().sum::<T>() / nf;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if sxx == T::zero() {
        T::zero()
    } else {
        sxy / sxx
    }
}

/// Median of a slice (sorted copy, mean of the middle pair for even length).
pub fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) * T::lit(0.5)
    })
}
