//! Inversion of `x ↦ f(x + is)` by a Neumann series around the term with the
//! lowest frequency.
//!
//! Writing `f(x+is) = q₁ e^{2πiω₁(x+is)} (1 + H(x))` with
//! `H = Σ_{n≥2} (q_n/q₁) e^{−2π(ω_n−ω₁)s} e^{2πi(ω_n−ω₁)x}`, the inverse is
//! `q₁⁻¹ e^{2πω₁s} e^{−2πiω₁x} Σ_j (−H)^j` whenever `‖H‖_W < 1`.

use num_complex::Complex;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{AlgebraConfig, ExpSum, Term};
use crate::error::{Error, Result};
use crate::real::Real;

/// Height at which the inverse is formed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Height<T> {
    /// Choose the height from the two tail bounds (see [`auto_height`]).
    Auto,
    Fixed(T),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeumannOptions<T> {
    pub height: Height<T>,
    /// Target Wiener-norm residual of `f_s · f_s⁻¹ − 1`.
    pub tol: T,
    pub max_iter: usize,
    /// Discard all frequencies of `(1+H)⁻¹` above this value.
    pub ceiling: Option<T>,
}

impl<T: Real> Default for NeumannOptions<T> {
    fn default() -> Self {
        Self {
            height: Height::Auto,
            tol: T::lit(1e-10),
            max_iter: 10_000,
            ceiling: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct NeumannInverse<T> {
    /// Inverse of `x ↦ f(x + i·height)`.
    pub inverse: ExpSum<T>,
    /// `(1 + H)⁻¹`, spectrum in `[0, ∞)`.
    pub series: ExpSum<T>,
    pub height: T,
    pub h_norm: T,
    pub iterations: usize,
    pub lowest_omega: T,
    pub lowest_q: Complex<T>,
}

impl<T: Real> NeumannInverse<T> {
    /// `‖(1+H)⁻¹‖_W`, equal to `‖inverse‖_W · |q₁| e^{−2πω₁s}`.
    pub fn normalized_norm(&self) -> T {
        self.series.wiener_norm()
    }
}

/// Picks `M` as the smallest index whose high tail `Σ_{n>M}|q_n|` is below
/// `|q₁|/3`, then the smallest height `s ≥ 0` with
/// `e^{2π(ω₁−ω′)s} Σ_{n≥2}|q_n/q₁| < 1/3`, `ω′ = min_{2≤n≤M} ω_n`.
/// Returns `(s, M)`.
pub fn auto_height<T: Real>(f: &ExpSum<T>) -> Result<(T, usize)> {
    let terms = f.terms();
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot invert the empty sum".into()))?;
    let q1 = first.q.norm();
    let ratios: Vec<T> = terms.iter().map(|t| t.q.norm() / q1).collect();
    let third = T::one() / T::lit(3.0);

    let mut tail: T = ratios[1..].iter().copied().sum();
    let mut m = 1;
    while m < ratios.len() && tail >= third {
        tail -= ratios[m];
        m += 1;
    }
    let total: T = ratios[1..].iter().copied().sum();
    if m == 1 || total < third {
        return Ok((T::zero(), m));
    }
    // sorted terms: min over 2..=M is the second frequency
    let gap = terms[1].omega - first.omega;
    let s_star = (T::lit(3.0) * total).ln() / (T::two_pi() * gap);
    let s = s_star + s_star.max(T::one()) * T::lit(1e-9);
    Ok((s, m))
}

/// Inverts `x ↦ f(x + is)` in the algebra.
pub fn neumann_inverse<T: Real>(
    f: &ExpSum<T>,
    opts: &NeumannOptions<T>,
    cfg: &AlgebraConfig<T>,
) -> Result<NeumannInverse<T>> {
    let terms = f.terms();
    let first = *terms
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot invert the empty sum".into()))?;
    let s = match opts.height {
        Height::Auto => auto_height(f)?.0,
        Height::Fixed(s) => s,
    };

    let mut h_raw = Vec::with_capacity(terms.len() - 1);
    for t in &terms[1..] {
        let delta = t.omega - first.omega;
        let damp = (-T::two_pi() * delta * s).exp();
        if !damp.is_finite() {
            return Err(Error::Overflow(format!("e^(-2π·{delta}·{s}) overflows")));
        }
        h_raw.push(Term::new(delta, t.q / first.q * damp));
    }
    let h = ExpSum::canonicalize(h_raw, cfg)?;
    let h_norm = h.wiener_norm();
    if h_norm >= T::one() {
        return Err(Error::Divergence {
            h_norm: h_norm.to_f64_lossy(),
            height: s.to_f64_lossy(),
        });
    }

    let minus_h = h.scale(-Complex::one());
    let stop = opts.tol * (T::one() - h_norm);
    let mut series = ExpSum::one();
    let mut power = ExpSum::one();
    let mut iterations = 0;
    loop {
        if iterations >= opts.max_iter {
            return Err(Error::Convergence {
                what: "Neumann series".into(),
                iterations,
            });
        }
        iterations += 1;
        power = power.multiply_below(&minus_h, opts.ceiling, cfg)?;
        if power.is_empty() {
            break;
        }
        series = series.add(&power, cfg)?;
        if power.wiener_norm() < stop {
            break;
        }
    }

    let prefactor = (T::two_pi() * first.omega * s).exp();
    if !prefactor.is_finite() {
        return Err(Error::Overflow(format!(
            "e^(2π·{}·{s}) overflows",
            first.omega
        )));
    }
    let inverse = series
        .scale(Complex::new(prefactor, T::zero()) / first.q)
        .shift_frequencies(-first.omega);
    Ok(NeumannInverse {
        inverse,
        series,
        height: s,
        h_norm,
        iterations,
        lowest_omega: first.omega,
        lowest_q: first.q,
    })
}

/// `‖f_s · inverse − 1‖_W`.
pub fn neumann_residual<T: Real>(
    f: &ExpSum<T>,
    inv: &NeumannInverse<T>,
    cfg: &AlgebraConfig<T>,
) -> Result<T> {
    let fs = f.at_height(inv.height, cfg)?;
    let prod = fs.multiply(&inv.inverse, cfg)?;
    Ok(prod.sub(&ExpSum::one(), cfg)?.wiener_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn geometric_series_at_zero_height() {
        let f = ExpSum::from_pairs(&[(0.0, c(1.0)), (1.0, c(0.5))]).unwrap();
        let opts = NeumannOptions {
            height: Height::Fixed(0.0),
            ..Default::default()
        };
        let cfg = AlgebraConfig::default();
        let inv = neumann_inverse(&f, &opts, &cfg).unwrap();
        for (k, t) in inv.inverse.terms().iter().enumerate() {
            assert_eq!(t.omega, k as f64);
            assert!((t.q.re - (-0.5f64).powi(k as i32)).abs() < 1e-15);
        }
        assert!((inv.inverse.wiener_norm() - 2.0).abs() < 1e-9);
        assert!(neumann_residual(&f, &inv, &cfg).unwrap() < 1e-10);
    }

    #[test]
    fn single_term_inverse() {
        let f: ExpSum<f64> = ExpSum::one();
        let inv = neumann_inverse(&f, &Default::default(), &AlgebraConfig::default()).unwrap();
        assert_eq!(inv.inverse, ExpSum::one());
        assert_eq!(inv.height, 0.0);
    }

    #[test]
    fn cosine_at_height_one() {
        let f = ExpSum::cosine(0.5);
        let opts = NeumannOptions {
            height: Height::Fixed(1.0),
            ..Default::default()
        };
        let cfg = AlgebraConfig::default();
        let inv = neumann_inverse(&f, &opts, &cfg).unwrap();
        let e = (-2.0 * std::f64::consts::PI).exp();
        assert!((inv.h_norm - e).abs() < 1e-16);
        assert!((inv.h_norm - 0.001867).abs() < 1e-6);
        assert!(inv.normalized_norm() < 3.0);
        assert!(neumann_residual(&f, &inv, &cfg).unwrap() < 1e-10);
    }

    #[test]
    fn auto_height_cosine() {
        let (s, m) = auto_height(&ExpSum::cosine(0.5)).unwrap();
        assert_eq!(m, 2);
        let expect = 3f64.ln() / (2.0 * std::f64::consts::PI);
        assert!(s > expect && s < expect * (1.0 + 1e-8));
        let inv = neumann_inverse(
            &ExpSum::cosine(0.5),
            &Default::default(),
            &AlgebraConfig::default(),
        )
        .unwrap();
        assert!(inv.h_norm < 1.0 / 3.0);
        assert!(inv.normalized_norm() < 3.0);
    }

    #[test]
    fn divergence_reported() {
        let f = ExpSum::cosine(0.5);
        let opts = NeumannOptions {
            height: Height::Fixed(0.0),
            ..Default::default()
        };
        assert!(matches!(
            neumann_inverse(&f, &opts, &AlgebraConfig::default()),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn iteration_cap_reported() {
        let f = ExpSum::from_pairs(&[(0.0, c(1.0)), (1.0, c(0.9))]).unwrap();
        let opts = NeumannOptions {
            height: Height::Fixed(0.0),
            max_iter: 5,
            ..Default::default()
        };
        assert!(matches!(
            neumann_inverse(&f, &opts, &AlgebraConfig::default()),
            Err(Error::Convergence { .. })
        ));
    }
}
