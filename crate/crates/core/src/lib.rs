//! Exponential sums with real zeros and the pure-point diffraction of their
//! zero sets.
//!
//! The crate works in both directions:
//!
//! * **forward**: a finite exponential sum `f(z) = Σ q_n e^{2πiω_n z}` →
//!   its real zeros ([`zeros`]) → almost-periodic-set analytics ([`apset`]) →
//!   the atoms `b_γ` of the Fourier transform of the zero counting measure
//!   ([`diffraction`]), computed both from Bohr means of the zeros and
//!   analytically from the logarithmic derivative `f′/f`;
//! * **inverse**: atoms `b_γ` and density `d` → an exponential sum with the
//!   prescribed zeros ([`reconstruct`]), together with the `g`-function
//!   boundedness evidence and exponential-type estimates.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the tolerances in
//! the defaults are tuned for.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apset;
pub mod diffraction;
pub mod error;
pub mod io;
pub mod real;
pub mod reconstruct;
pub mod wiener;
pub mod zeros;

pub use error::{Error, Result};
pub use real::Real;

pub use apset::{AlmostPeriodReport, CountingConstants, DensityEstimate, PhiRepresentation};
pub use diffraction::{GrowthProfile, PointMeasure};
pub use reconstruct::GReport;
pub use wiener::{AlgebraConfig, ExpSum, Term};
pub use zeros::ZeroSet;

pub type ExpSum64 = ExpSum<f64>;
pub type ExpSum32 = ExpSum<f32>;
pub type ZeroSet64 = ZeroSet<f64>;
pub type ZeroSet32 = ZeroSet<f32>;
pub type PointMeasure64 = PointMeasure<f64>;
pub type PointMeasure32 = PointMeasure<f32>;
pub type Complex64 = num_complex::Complex<f64>;
