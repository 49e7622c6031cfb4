//! Analytics for almost periodic multisets on the line: density, counting
//! constants, ε-almost periods, the representation `a_n = n/d + φ(n)` and
//! two summation diagnostics.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{median, unit_phase, Compensated, CompensatedComplex, Real};
use crate::zeros::ZeroSet;

/// Fewest points accepted by [`density`].
pub const MIN_POINTS: u64 = 10;
/// Number of window lengths sampled for `k2` by default.
pub const DEFAULT_K2_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate<T> {
    pub d: T,
    pub window_length: T,
    pub error_bound: T,
    pub count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingConstants {
    pub k1: u64,
    pub k2: u64,
    pub windows_sampled: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostPeriod<T> {
    pub tau: T,
    pub shift_h: i64,
    pub sup_dev: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct AlmostPeriodReport<T> {
    pub epsilon: T,
    pub d: T,
    pub periods: Vec<AlmostPeriod<T>>,
    pub search_range: (T, T),
    /// Shifts whose matching was uniform to `ε` but whose `τ` strayed more
    /// than `ε` from `h/d`.
    pub rejected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct PhiRepresentation<T> {
    pub d: T,
    /// Position of `a_0` in the sorted, multiplicity-expanded point list.
    pub index_offset: i64,
    pub phi: Vec<(i64, T)>,
    /// Sparse `(n, c)` with `(n/d + φ(n)) + c = a_n`, for the few indices
    /// near the origin where `|a_n| ≪ |n/d|` and no double `φ(n)` alone
    /// reproduces `a_n`. `c` is a few ulps of `n/d`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<(i64, T)>,
}

impl<T: Real> PhiRepresentation<T> {
    pub fn sup_abs(&self) -> T {
        self.phi
            .iter()
            .fold(T::zero(), |m, &(_, v)| m.max(v.abs()))
    }

    /// `n/d + φ(n)`, plus the correction where one is stored; equal to
    /// `a_n` bit for bit.
    pub fn point(&self, n: i64) -> Option<T> {
        let p = T::from_i64_lossy(n) / self.d + self.get(n)?;
        Some(
            match self.corrections.binary_search_by(|c| c.0.cmp(&n)) {
                Ok(i) => p + self.corrections[i].1,
                Err(_) => p,
            },
        )
    }

    pub fn get(&self, n: i64) -> Option<T> {
        let first = self.phi.first()?.0;
        let idx = n.checked_sub(first)?;
        if idx < 0 {
            return None;
        }
        self.phi.get(idx as usize).map(|&(_, v)| v)
    }

    /// Index range `[n_min, n_max]`.
    pub fn index_range(&self) -> Option<(i64, i64)> {
        Some((self.phi.first()?.0, self.phi.last()?.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierEstimate<T> {
    pub theta: T,
    pub value: Complex<T>,
    pub error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct LindelofReport<T> {
    /// `(N, Σ_{|a|<N} 1/a)`.
    pub sums: Vec<(T, T)>,
    /// Largest pairwise difference among the sums for the upper half of the
    /// `N` values.
    pub cauchy: T,
}

fn nonempty<T: Real>(a: &ZeroSet<T>) -> Result<()> {
    if a.is_empty() {
        Err(Error::EmptySet)
    } else {
        Ok(())
    }
}

/// Density over the whole window of `a`, with the bound
/// `(2k₂ + 2k₁)/length` from default counting constants.
pub fn density<T: Real>(a: &ZeroSet<T>) -> Result<DensityEstimate<T>> {
    nonempty(a)?;
    let kc = counting_constants(a, DEFAULT_K2_SAMPLES, 0)?;
    density_with(a, &kc)
}

pub fn density_with<T: Real>(a: &ZeroSet<T>, kc: &CountingConstants) -> Result<DensityEstimate<T>> {
    nonempty(a)?;
    let count = a.total_count();
    if count < MIN_POINTS {
        return Err(Error::WindowTooShort(format!(
            "{count} points; need at least {MIN_POINTS}"
        )));
    }
    let length = a.window_length();
    let d = T::lit(count as f64) / length;
    let error_bound = T::lit((2 * kc.k2 + 2 * kc.k1) as f64) / length;
    Ok(DensityEstimate {
        d,
        window_length: length,
        error_bound,
        count,
    })
}

/// `k1 = max_x #A∩[x, x+1)`, the right end pulled in by a relative `1e-9`;
/// `k2` is the largest spread `max_x #A∩[x,x+h) − min_x #A∩[x,x+h)` over
/// `samples` random lengths
/// `h ∈ (0, min(16, L/4))`, each computed exactly over all interior
/// positions `x`.
pub fn counting_constants<T: Real>(
    a: &ZeroSet<T>,
    samples: usize,
    seed: u64,
) -> Result<CountingConstants> {
    nonempty(a)?;
    let c = a.counter();
    let k1 = a
        .points()
        .iter()
        .map(|p| {
            // Unit gaps of computed zeros carry rounding noise.
            let slack = T::lit(1e-9) * (T::one() + p.a.abs());
            c.half_open(p.a, p.a + T::one() - slack)
        })
        .max()
        .unwrap_or(0);

    let (lo, hi) = a.window();
    let h_max = T::lit(16.0).min((hi - lo) / T::lit(4.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k2 = 0;
    for _ in 0..samples {
        let h = T::lit(rng.gen_range(1e-3..1.0)) * h_max;
        k2 = k2.max(window_spread(a, h));
    }
    Ok(CountingConstants {
        k1,
        k2,
        windows_sampled: samples,
    })
}

/// Spread of `x ↦ #A∩[x, x+h)` over the positions with `[x, x+h)` inside
/// the window. The count jumps up when `x + h` passes a point and down when
/// `x` passes one, so extremes sit at `x = a_j` (max) or just after it
/// (min), besides the ends of the position range.
pub fn window_spread<T: Real>(a: &ZeroSet<T>, h: T) -> u64 {
    let (lo, hi) = a.window();
    let (x_lo, x_hi) = (lo, hi - h);
    if x_hi < x_lo {
        return 0;
    }
    let c = a.counter();
    let mut max = c.half_open(x_lo, x_lo + h).max(c.half_open(x_hi, x_hi + h));
    let mut min = c.half_open(x_lo, x_lo + h).min(c.half_open(x_hi, x_hi + h));
    for p in a.points() {
        if p.a >= x_lo && p.a <= x_hi {
            max = max.max(c.half_open(p.a, p.a + h));
        }
        if p.a >= x_lo && p.a < x_hi {
            min = min.min(c.left_open(p.a, p.a + h));
        }
    }
    max - min
}

/// ε-almost periods `τ ∈ tau_range`, searched as index shifts: for each
/// integer `h ≠ 0` with `h/d` near the range, `τ_h` is the median of
/// `a_{n+h} − a_n` over the interior and the shift is kept when every
/// difference lies within `ε` of `τ_h` and `|τ_h − h/d| ≤ ε`. Points within
/// `max(1, |τ|_max)` of the window ends are ignored.
pub fn almost_periods<T: Real>(
    a: &ZeroSet<T>,
    epsilon: T,
    tau_range: (T, T),
    d: Option<T>,
) -> Result<AlmostPeriodReport<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    if !(tau_range.0 <= tau_range.1) {
        return Err(Error::InvalidInput("empty tau range".into()));
    }
    let d = match d {
        Some(d) if d > T::zero() => d,
        Some(_) => return Err(Error::Domain("density must be positive".into())),
        None => density(a)?.d,
    };
    let pts = a.expanded();
    let (lo, hi) = a.window();
    let tau_max = tau_range.0.abs().max(tau_range.1.abs());
    let band = T::one().max(tau_max);
    let inner: Vec<usize> = (0..pts.len())
        .filter(|&i| pts[i] >= lo + band && pts[i] <= hi - band)
        .collect();
    if inner.is_empty() {
        return Err(Error::WindowTooShort(format!(
            "no points farther than {band} from the window ends"
        )));
    }

    let h_lo = ((tau_range.0 - epsilon) * d).ceil().to_i64().unwrap_or(0);
    let h_hi = ((tau_range.1 + epsilon) * d).floor().to_i64().unwrap_or(-1);
    let n = pts.len() as i64;
    let mut periods = Vec::new();
    let mut rejected = 0;
    let mut diffs: Vec<T> = Vec::with_capacity(inner.len());
    for h in h_lo..=h_hi {
        if h == 0 {
            continue;
        }
        diffs.clear();
        for &i in &inner {
            let j = i as i64 + h;
            if j < 0 || j >= n {
                continue;
            }
            let bj = pts[j as usize];
            if bj < lo + band - tau_max || bj > hi - band + tau_max {
                continue;
            }
            diffs.push(bj - pts[i]);
        }
        let Some(tau) = median(&diffs) else { continue };
        let sup_dev = diffs
            .iter()
            .fold(T::zero(), |m, &x| m.max((x - tau).abs()));
        if sup_dev >= epsilon {
            continue;
        }
        if (tau - T::from_i64_lossy(h) / d).abs() > epsilon {
            rejected += 1;
            continue;
        }
        if tau >= tau_range.0 && tau <= tau_range.1 {
            periods.push(AlmostPeriod {
                tau,
                shift_h: h,
                sup_dev,
            });
        }
    }
    Ok(AlmostPeriodReport {
        epsilon,
        d,
        periods,
        search_range: tau_range,
        rejected,
    })
}

/// `φ(n) = a_n − n/d`, indexed so that `a_0` is the smallest nonnegative
/// point. Each `φ(n)` is adjusted by a few ulps where needed so that
/// `n/d + φ(n)` reproduces `a_n` exactly in floating point; where no such
/// double exists a correction term is recorded.
pub fn phi_representation<T: Real>(a: &ZeroSet<T>, d: T) -> Result<PhiRepresentation<T>> {
    if !(d > T::zero() && d.is_finite()) {
        return Err(Error::Domain(format!("density must be positive, got {d}")));
    }
    let pts = a.expanded();
    let offset = pts.partition_point(|&x| x < T::zero()) as i64;
    let mut phi = Vec::with_capacity(pts.len());
    let mut corrections = Vec::new();
    for (i, &an) in pts.iter().enumerate() {
        let n = i as i64 - offset;
        let q = T::from_i64_lossy(n) / d;
        let v = exact_remainder(an, q);
        let s = q + v;
        if s != an {
            // s and a_n agree to a few ulps of q, so a_n − s is exact.
            corrections.push((n, an - s));
        }
        phi.push((n, v));
    }
    Ok(PhiRepresentation {
        d,
        index_offset: offset,
        phi,
        corrections,
    })
}

/// A `v` with `q + v == a` in floating point, when one exists near `a − q`.
fn exact_remainder<T: Real>(a: T, q: T) -> T {
    let v = a - q;
    if q + v == a {
        return v;
    }
    let step = v.ulp().max(T::min_positive_value());
    for k in 1..=8 {
        let kf = T::from_usize_lossy(k);
        for cand in [v + kf * step, v - kf * step] {
            if q + cand == a {
                return cand;
            }
        }
    }
    v
}

/// Bohr means `(2N+1)⁻¹ Σ_{|n|≤N} φ(n) e^{−2πiθn}` with error estimate
/// `2 sup|φ| / (2N+1)`.
pub fn phi_fourier<T: Real>(
    phi: &PhiRepresentation<T>,
    freqs: &[T],
    n: usize,
) -> Result<Vec<FourierEstimate<T>>> {
    if n < 100 {
        return Err(Error::WindowTooShort(format!("N = {n} < 100")));
    }
    let (n_min, n_max) = phi.index_range().ok_or(Error::EmptySet)?;
    let nn = n as i64;
    if -nn < n_min || nn > n_max {
        return Err(Error::WindowTooShort(format!(
            "N = {n} exceeds the available index range [{n_min}, {n_max}]"
        )));
    }
    let norm = T::from_usize_lossy(2 * n + 1);
    let error = T::lit(2.0) * phi.sup_abs() / norm;
    let out = freqs
        .iter()
        .map(|&theta| {
            let mut acc = CompensatedComplex::new();
            for k in -nn..=nn {
                let v = phi.get(k).expect("range checked");
                let ph = unit_phase(-theta * T::from_i64_lossy(k));
                acc.add(ph * v);
            }
            FourierEstimate {
                theta,
                value: acc.value() / norm,
                error,
            }
        })
        .collect();
    Ok(out)
}

/// Partial sums `Σ_{|a|<N} mult/a` for each `N`.
pub fn lindelof_sum<T: Real>(a: &ZeroSet<T>, n_list: &[T]) -> Result<LindelofReport<T>> {
    if a.contains_origin() {
        return Err(Error::Domain(
            "0 belongs to the set; translate it first (ZeroSet::off_origin)".into(),
        ));
    }
    let (lo, hi) = a.window();
    let mut sums = Vec::with_capacity(n_list.len());
    for &big_n in n_list {
        if big_n > hi.min(-lo) {
            return Err(Error::WindowTooShort(format!(
                "N = {big_n} exceeds the window [{lo}, {hi}]"
            )));
        }
        let mut acc = Compensated::new();
        for p in a.points() {
            if p.a.abs() < big_n {
                acc.add(T::from_usize_lossy(p.mult as usize) / p.a);
            }
        }
        sums.push((big_n, acc.value()));
    }
    let mut sorted = sums.clone();
    sorted.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite N"));
    let top = &sorted[sorted.len() / 2..];
    let mut cauchy = T::zero();
    for x in top {
        for y in top {
            cauchy = cauchy.max((x.1 - y.1).abs());
        }
    }
    Ok(LindelofReport { sums, cauchy })
}

/// `max_τ |Σ_{0<|n|≤N} n⁻¹ [φ(n+τ) − φ(n)]|` over the integer shifts.
pub fn krein_levin_diagnostic<T: Real>(
    phi: &PhiRepresentation<T>,
    tau_list: &[i64],
    n: usize,
) -> Result<T> {
    let (n_min, n_max) = phi.index_range().ok_or(Error::EmptySet)?;
    let nn = n as i64;
    let t_max = tau_list.iter().copied().max().unwrap_or(0).max(0);
    let t_min = tau_list.iter().copied().min().unwrap_or(0).min(0);
    if -nn + t_min < n_min || nn + t_max > n_max {
        return Err(Error::Domain(format!(
            "indices [{}, {}] needed, only [{n_min}, {n_max}] available",
            -nn + t_min,
            nn + t_max
        )));
    }
    let mut best = T::zero();
    for &tau in tau_list {
        let mut acc = Compensated::new();
        for k in 1..=nn {
            for m in [k, -k] {
                let diff = phi.get(m + tau).expect("checked") - phi.get(m).expect("checked");
                acc.add(diff / T::from_i64_lossy(m));
            }
        }
        best = best.max(acc.value().abs());
    }
    Ok(best)
}

/// [`krein_levin_diagnostic`] for each truncation in `n_list`.
pub fn krein_levin_trend<T: Real>(
    phi: &PhiRepresentation<T>,
    tau_list: &[i64],
    n_list: &[usize],
) -> Result<Vec<(usize, T)>> {
    n_list
        .iter()
        .map(|&n| Ok((n, krein_levin_diagnostic(phi, tau_list, n)?)))
        .collect()
}

/// Largest gap between consecutive points.
pub fn max_gap<T: Real>(a: &ZeroSet<T>) -> Option<T> {
    a.points()
        .windows(2)
        .map(|w| w[1].a - w[0].a)
        .fold(None, |m: Option<T>, g| Some(m.map_or(g, |m| m.max(g))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_lattice(r: f64) -> ZeroSet<f64> {
        ZeroSet::lattice(0.5, 1.0, (-r, r), 1).unwrap()
    }

    fn union_lattice(r: f64) -> ZeroSet<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = half_lattice(r);
        let b = ZeroSet::lattice(0.5 * s, s, (-r, r), 1).unwrap();
        a.union(&b).unwrap()
    }

    #[test]
    fn density_of_lattices() {
        let e = density(&half_lattice(500.0)).unwrap();
        assert!((e.d - 1.0).abs() < 0.01);
        assert!(e.error_bound > 0.0);
        let e = density(&union_lattice(500.0)).unwrap();
        assert!((e.d - (1.0 + 2f64.sqrt())).abs() < 0.02);
    }

    #[test]
    fn density_needs_points() {
        let one = ZeroSet::from_values((-1.0, 1.0), vec![0.3]).unwrap();
        assert!(matches!(density(&one), Err(Error::WindowTooShort(_))));
        let none = ZeroSet::<f64>::new((-1.0, 1.0), vec![]).unwrap();
        assert!(matches!(density(&none), Err(Error::EmptySet)));
    }

    #[test]
    fn counting_constants_lattice() {
        let kc = counting_constants(&half_lattice(50.0), 64, 1).unwrap();
        assert_eq!((kc.k1, kc.k2), (1, 1));
        let doubled = half_lattice(50.0).union(&half_lattice(50.0)).unwrap();
        assert_eq!(counting_constants(&doubled, 8, 1).unwrap().k1, 2);
        assert!(counting_constants(&union_lattice(50.0), 64, 1).unwrap().k1 <= 3);
    }

    #[test]
    fn exact_periods_of_lattice() {
        let r = almost_periods(&half_lattice(100.0), 0.01, (0.5, 5.5), None).unwrap();
        let taus: Vec<f64> = r.periods.iter().map(|p| p.tau).collect();
        assert_eq!(taus, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(r.periods.iter().all(|p| p.sup_dev == 0.0));
    }

    #[test]
    fn phi_of_shifted_lattice() {
        let a = half_lattice(20.0);
        let p = phi_representation(&a, 1.0).unwrap();
        assert!(p.phi.iter().all(|&(_, v)| v == 0.5));
        assert_eq!(p.point(0), Some(0.5));
        for (i, &x) in a.expanded().iter().enumerate() {
            assert_eq!(p.point(i as i64 - p.index_offset), Some(x));
        }
    }

    #[test]
    fn phi_fourier_constant() {
        let p = phi_representation(&half_lattice(300.0), 1.0).unwrap();
        let est = phi_fourier(&p, &[0.0, 0.3], 200).unwrap();
        assert!((est[0].value.re - 0.5).abs() < 1e-14);
        assert!(est[1].value.norm() <= est[1].error);
        assert!(phi_fourier(&p, &[0.0], 50).is_err());
    }

    #[test]
    fn lindelof_cases() {
        let sym = half_lattice(1000.0);
        let r = lindelof_sum(&sym, &[100.0, 1000.0]).unwrap();
        assert!(r.sums.iter().all(|s| s.1.abs() < 1e-12));
        let shifted = ZeroSet::lattice(0.75, 1.0, (-1000.0, 1000.0), 1).unwrap();
        let r = lindelof_sum(&shifted, &[1000.0]).unwrap();
        assert!((r.sums[0].1 + std::f64::consts::PI).abs() < 1e-3);
        let with_zero = ZeroSet::lattice(0.0, 1.0, (-5.0, 5.0), 1).unwrap();
        assert!(matches!(lindelof_sum(&with_zero, &[2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn krein_levin_constant_phi() {
        let p = phi_representation(&half_lattice(200.0), 1.0).unwrap();
        assert_eq!(krein_levin_diagnostic(&p, &[1, 2, 3], 100).unwrap(), 0.0);
        assert!(krein_levin_diagnostic(&p, &[1], 1000).is_err());
    }
}
