//! Finite exponential sums `f(z) = Σ q_n e^{2πi ω_n z}` and their algebra.
//!
//! Frequencies are measured in cycles per unit length. Every constructor and
//! algebra operation returns a *canonical* sum: terms sorted by frequency,
//! frequencies closer than `freq_tol` merged, and coefficients smaller than
//! `prune_tol · ‖f‖_W` dropped. The Wiener norm `‖f‖_W = Σ |q_n|` is
//! submultiplicative under [`ExpSum::multiply`].

mod neumann;

pub use neumann::{auto_height, neumann_inverse, neumann_residual, Height, NeumannInverse, NeumannOptions};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{unit_phase, CompensatedComplex, Real};

/// Environment variable that overrides [`AlgebraConfig::max_terms`].
pub const MAX_TERMS_ENV: &str = "QCLAB_MAX_TERMS";

/// Tolerances shared by all algebra operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraConfig<T> {
    /// Frequencies closer than this (in cycles) are identified.
    pub freq_tol: T,
    /// Relative pruning threshold against the current Wiener norm.
    pub prune_tol: T,
    /// Hard cap on the number of terms of any canonical sum.
    pub max_terms: usize,
}

impl<T: Real> Default for AlgebraConfig<T> {
    fn default() -> Self {
        Self {
            freq_tol: T::lit(1e-9),
            prune_tol: T::lit(1e-14),
            max_terms: 200_000,
        }
    }
}

impl<T: Real> AlgebraConfig<T> {
    /// Defaults, with `max_terms` taken from `QCLAB_MAX_TERMS` when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(v) = std::env::var(MAX_TERMS_ENV) {
            cfg.max_terms = v.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("{MAX_TERMS_ENV}={v:?} is not a positive integer"))
            })?;
            if cfg.max_terms == 0 {
                return Err(Error::InvalidInput(format!("{MAX_TERMS_ENV} must be positive")));
            }
        }
        Ok(cfg)
    }

    /// Same tolerances without relative pruning. Used where coefficients of
    /// very different magnitude must all be retained (truncated inverses).
    pub fn without_pruning(self) -> Self {
        Self {
            prune_tol: T::zero(),
            ..self
        }
    }
}

/// One term `q · e^{2πi ω z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term<T> {
    pub omega: T,
    pub q: Complex<T>,
}

impl<T> Term<T> {
    pub fn new(omega: T, q: Complex<T>) -> Self {
        Self { omega, q }
    }
}

/// Canonical finite exponential sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ExpSum<T> {
    terms: Vec<Term<T>>,
}

impl<T: Real> Default for ExpSum<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Real> ExpSum<T> {
    pub fn empty() -> Self {
        Self { terms: Vec::new() }
    }

    /// The constant sum `{(0, c)}`.
    pub fn constant(c: Complex<T>) -> Self {
        if c.is_zero() {
            Self::empty()
        } else {
            Self {
                terms: vec![Term::new(T::zero(), c)],
            }
        }
    }

    pub fn one() -> Self {
        Self::constant(Complex::one())
    }

    /// `cos(2π ν z)` as the two-term sum `½e^{−2πiνz} + ½e^{2πiνz}`.
    pub fn cosine(nu: T) -> Self {
        let half = Complex::new(T::lit(0.5), T::zero());
        Self::canonicalize(
            vec![Term::new(-nu, half), Term::new(nu, half)],
            &AlgebraConfig::default(),
        )
        .expect("finite cosine terms")
    }

    /// Sorts, merges frequencies within `freq_tol`, prunes relative to the
    /// Wiener norm. Idempotent.
    pub fn canonicalize(mut raw: Vec<Term<T>>, cfg: &AlgebraConfig<T>) -> Result<Self> {
        for t in &raw {
            if !t.omega.is_finite() || !t.q.re.is_finite() || !t.q.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite term (omega={}, q={}+{}i)",
                    t.omega, t.q.re, t.q.im
                )));
            }
        }
        raw.sort_by(|a, b| a.omega.partial_cmp(&b.omega).expect("finite frequencies"));

        let mut merged: Vec<Term<T>> = Vec::with_capacity(raw.len());
        let mut iter = raw.into_iter().peekable();
        while let Some(first) = iter.next() {
            let anchor = first.omega;
            let mut acc = CompensatedComplex::new();
            acc.add(first.q);
            while let Some(next) = iter.peek() {
                if next.omega - anchor <= cfg.freq_tol {
                    acc.add(next.q);
                    iter.next();
                } else {
                    break;
                }
            }
            merged.push(Term::new(anchor, acc.value()));
        }

        let norm: T = merged.iter().map(|t| t.q.norm()).sum();
        let threshold = cfg.prune_tol * norm;
        merged.retain(|t| {
            let a = t.q.norm();
            a > T::zero() && a >= threshold
        });
        if merged.len() > cfg.max_terms {
            return Err(Error::Capacity {
                terms: merged.len(),
                max_terms: cfg.max_terms,
            });
        }
        Ok(Self { terms: merged })
    }

    /// Builds from `(ω, q)` pairs and canonicalizes with default tolerances.
    pub fn from_pairs(pairs: &[(T, Complex<T>)]) -> Result<Self> {
        Self::canonicalize(
            pairs.iter().map(|&(w, q)| Term::new(w, q)).collect(),
            &AlgebraConfig::default(),
        )
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `‖f‖_W = Σ |q_n|`.
    pub fn wiener_norm(&self) -> T {
        self.terms.iter().map(|t| t.q.norm()).sum()
    }

    /// Smallest and largest frequency.
    pub fn spectrum_bounds(&self) -> Option<(T, T)> {
        Some((self.terms.first()?.omega, self.terms.last()?.omega))
    }

    /// `max |ω_n|`.
    pub fn max_abs_frequency(&self) -> T {
        self.terms
            .iter()
            .map(|t| t.omega.abs())
            .fold(T::zero(), T::max)
    }

    /// Coefficient at `omega` (within `tol`), zero if absent.
    pub fn coefficient_at(&self, omega: T, tol: T) -> Complex<T> {
        self.terms
            .iter()
            .find(|t| (t.omega - omega).abs() <= tol)
            .map(|t| t.q)
            .unwrap_or_else(Complex::zero)
    }

    /// True when terms pair `ω ↔ −ω` with conjugate coefficients, i.e. the
    /// sum is real on the real axis.
    pub fn is_conjugate_symmetric(&self, freq_tol: T, rel_tol: T) -> bool {
        let scale = self.wiener_norm().max(T::min_positive_value());
        self.terms.iter().all(|t| {
            let partner = self.coefficient_at(-t.omega, freq_tol);
            (partner - t.q.conj()).norm() <= rel_tol * scale
        })
    }

    /// Unchecked evaluation; may return non-finite values for extreme `Im z`.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = CompensatedComplex::new();
        for t in &self.terms {
            let damp = (-T::two_pi() * t.omega * z.im).exp();
            acc.add(t.q * unit_phase(t.omega * z.re) * damp);
        }
        acc.value()
    }

    /// Evaluation on the real axis.
    pub fn eval_real(&self, x: T) -> Complex<T> {
        let mut acc = CompensatedComplex::new();
        for t in &self.terms {
            acc.add(t.q * unit_phase(t.omega * x));
        }
        acc.value()
    }

    /// `Σ q_n e^{2πi ω_n z}`, reporting overflow as an error.
    pub fn evaluate(&self, z: Complex<T>) -> Result<Complex<T>> {
        let v = self.eval(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!(
                "evaluation at {}+{}i is not finite",
                z.re, z.im
            )))
        }
    }

    /// `log |f(z)|` computed by log-sum-exp, finite where `evaluate` would
    /// overflow.
    pub fn log_abs(&self, z: Complex<T>) -> T {
        if self.terms.is_empty() {
            return T::neg_infinity();
        }
        let exps: Vec<T> = self
            .terms
            .iter()
            .map(|t| t.q.norm().ln() - T::two_pi() * t.omega * z.im)
            .collect();
        let top = exps.iter().copied().fold(T::neg_infinity(), T::max);
        let mut acc = CompensatedComplex::new();
        for (t, e) in self.terms.iter().zip(&exps) {
            let unit = t.q / t.q.norm();
            acc.add(unit * unit_phase(t.omega * z.re) * (*e - top).exp());
        }
        acc.value().norm().ln() + top
    }

    /// `c · f`.
    pub fn scale(&self, c: Complex<T>) -> Self {
        if c.is_zero() {
            return Self::empty();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.omega, t.q * c))
                .collect(),
        }
    }

    /// Multiplies by `e^{2πi δ z}`.
    pub fn shift_frequencies(&self, delta: T) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.omega + delta, t.q))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self, cfg: &AlgebraConfig<T>) -> Result<Self> {
        let mut raw = self.terms.clone();
        raw.extend_from_slice(&other.terms);
        Self::canonicalize(raw, cfg)
    }

    pub fn sub(&self, other: &Self, cfg: &AlgebraConfig<T>) -> Result<Self> {
        self.add(&other.scale(-Complex::one()), cfg)
    }

    pub fn multiply(&self, other: &Self, cfg: &AlgebraConfig<T>) -> Result<Self> {
        self.multiply_below(other, None, cfg)
    }

    /// Product with every output frequency above `ceiling` discarded. When
    /// both factors have nonnegative spectra beyond some base this is an
    /// exact truncation of the full product.
    pub fn multiply_below(
        &self,
        other: &Self,
        ceiling: Option<T>,
        cfg: &AlgebraConfig<T>,
    ) -> Result<Self> {
        if self.is_empty() || other.is_empty() {
            return Ok(Self::empty());
        }
        let raw_pairs = self.len().saturating_mul(other.len());
        let raw_cap = cfg.max_terms.saturating_mul(64);
        if raw_pairs > raw_cap {
            return Err(Error::Capacity {
                terms: raw_pairs,
                max_terms: cfg.max_terms,
            });
        }
        let limit = ceiling.map(|c| c + cfg.freq_tol);
        let mut raw = Vec::with_capacity(raw_pairs);
        for a in &self.terms {
            for b in &other.terms {
                let w = a.omega + b.omega;
                if limit.is_some_and(|c| w > c) {
                    // `other` is sorted, later terms only increase w.
                    break;
                }
                raw.push(Term::new(w, a.q * b.q));
            }
        }
        Self::canonicalize(raw, cfg)
    }

    /// Term-wise `q_n ↦ 2πi ω_n q_n`.
    pub fn derivative(&self, cfg: &AlgebraConfig<T>) -> Result<Self> {
        let raw = self
            .terms
            .iter()
            .map(|t| Term::new(t.omega, t.q * Complex::new(T::zero(), T::two_pi() * t.omega)))
            .collect();
        Self::canonicalize(raw, cfg)
    }

    /// Represents `x ↦ f(x + is)` via `q_n ↦ q_n e^{−2π ω_n s}`.
    pub fn at_height(&self, s: T, cfg: &AlgebraConfig<T>) -> Result<Self> {
        let mut raw = Vec::with_capacity(self.len());
        for t in &self.terms {
            let factor = (-T::two_pi() * t.omega * s).exp();
            if !factor.is_finite() {
                return Err(Error::Overflow(format!(
                    "e^(-2π·{}·{}) overflows",
                    t.omega, s
                )));
            }
            raw.push(Term::new(t.omega, t.q * factor));
        }
        Self::canonicalize(raw, cfg)
    }

    /// `e^g` by its power series in the algebra.
    pub fn exp_series(&self, cfg: &AlgebraConfig<T>) -> Result<Self> {
        const MAX_ORDER: usize = 10_000;
        let g_norm = self.wiener_norm();
        let mut acc = Self::one();
        let mut power = Self::one();
        for k in 1..=MAX_ORDER {
            power = power
                .multiply(self, cfg)?
                .scale(Complex::new(T::one() / T::from_usize_lossy(k), T::zero()));
            acc = acc.add(&power, cfg)?;
            let kf = T::from_usize_lossy(k + 1);
            if power.is_empty()
                || (kf > T::lit(2.0) * g_norm
                    && power.wiener_norm() <= T::epsilon() * acc.wiener_norm())
            {
                return Ok(acc);
            }
        }
        Err(Error::Capacity {
            terms: acc.len(),
            max_terms: cfg.max_terms,
        })
    }
}
