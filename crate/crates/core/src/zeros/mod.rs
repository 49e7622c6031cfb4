//! Real zero multisets and their extraction from exponential sums.

mod contour;
mod scan;

pub use contour::{count_zeros_rectangle, zero_strip, ContourOptions, Rect};
pub use scan::{find_real_zeros, realness_check, RealZeros, RealnessReport, ZeroOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// A point of a multiset with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoint<T> {
    pub a: T,
    pub mult: u32,
}

/// Sorted real multiset observed over a finite window `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ZeroSet<T> {
    window: (T, T),
    points: Vec<ZeroPoint<T>>,
}

impl<T: Real> ZeroSet<T> {
    /// Validates strict ordering, positive multiplicities and window
    /// containment.
    pub fn new(window: (T, T), points: Vec<ZeroPoint<T>>) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidInput(format!("bad window [{lo}, {hi}]")));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.a.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite point at index {i}")));
            }
            if p.mult == 0 {
                return Err(Error::InvalidInput(format!("zero multiplicity at {}", p.a)));
            }
            if p.a < lo || p.a > hi {
                return Err(Error::InvalidInput(format!(
                    "point {} outside window [{lo}, {hi}]",
                    p.a
                )));
            }
            if i > 0 && points[i - 1].a >= p.a {
                return Err(Error::InvalidInput(format!(
                    "points not strictly increasing at index {i}"
                )));
            }
        }
        Ok(Self { window, points })
    }

    /// Sorts raw values and merges exact repeats into multiplicities.
    pub fn from_values(window: (T, T), mut values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite point".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mut points: Vec<ZeroPoint<T>> = Vec::with_capacity(values.len());
        for v in values {
            match points.last_mut() {
                Some(last) if last.a == v => last.mult += 1,
                _ => points.push(ZeroPoint { a: v, mult: 1 }),
            }
        }
        Self::new(window, points)
    }

    /// `{offset + k·spacing}` inside the closed window, each with `mult`.
    pub fn lattice(offset: T, spacing: T, window: (T, T), mult: u32) -> Result<Self> {
        if !(spacing > T::zero()) {
            return Err(Error::InvalidInput("lattice spacing must be positive".into()));
        }
        let k_lo = ((window.0 - offset) / spacing).ceil().to_i64().unwrap_or(0);
        let k_hi = ((window.1 - offset) / spacing).floor().to_i64().unwrap_or(-1);
        let points = (k_lo..=k_hi)
            .map(|k| ZeroPoint {
                a: offset + T::from_i64_lossy(k) * spacing,
                mult,
            })
            .filter(|p| p.a >= window.0 && p.a <= window.1)
            .collect();
        Self::new(window, points)
    }

    /// Multiset sum over the intersection of the two windows.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let lo = self.window.0.max(other.window.0);
        let hi = self.window.1.min(other.window.1);
        let mut all: Vec<ZeroPoint<T>> = self
            .points
            .iter()
            .chain(&other.points)
            .filter(|p| p.a >= lo && p.a <= hi)
            .copied()
            .collect();
        all.sort_by(|a, b| a.a.partial_cmp(&b.a).expect("finite"));
        let mut merged: Vec<ZeroPoint<T>> = Vec::with_capacity(all.len());
        for p in all {
            match merged.last_mut() {
                Some(last) if last.a == p.a => last.mult += p.mult,
                _ => merged.push(p),
            }
        }
        Self::new((lo, hi), merged)
    }

    pub fn window(&self) -> (T, T) {
        self.window
    }

    pub fn window_length(&self) -> T {
        self.window.1 - self.window.0
    }

    pub fn points(&self) -> &[ZeroPoint<T>] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of distinct points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Count with multiplicity.
    pub fn total_count(&self) -> u64 {
        self.points.iter().map(|p| u64::from(p.mult)).sum()
    }

    /// Points repeated by multiplicity: the sequence `a_n`.
    pub fn expanded(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.total_count() as usize);
        for p in &self.points {
            for _ in 0..p.mult {
                out.push(p.a);
            }
        }
        out
    }

    /// Counting helper with `O(log n)` interval queries.
    pub fn counter(&self) -> Counter<'_, T> {
        let mut cum = Vec::with_capacity(self.points.len() + 1);
        cum.push(0u64);
        let mut acc = 0u64;
        for p in &self.points {
            acc += u64::from(p.mult);
            cum.push(acc);
        }
        Counter { set: self, cum }
    }

    /// Sub-multiset inside `[lo, hi]`, with that window.
    pub fn restrict(&self, lo: T, hi: T) -> Result<Self> {
        let points = self
            .points
            .iter()
            .filter(|p| p.a >= lo && p.a <= hi)
            .copied()
            .collect();
        Self::new((lo, hi), points)
    }

    /// Moves every point (and the window) by `delta`.
    pub fn translate(&self, delta: T) -> Self {
        Self {
            window: (self.window.0 + delta, self.window.1 + delta),
            points: self
                .points
                .iter()
                .map(|p| ZeroPoint {
                    a: p.a + delta,
                    mult: p.mult,
                })
                .collect(),
        }
    }

    pub fn contains_origin(&self) -> bool {
        self.points.iter().any(|p| p.a == T::zero())
    }

    /// Translation removing the origin from the set: if `0 ∈ A`, shifts by
    /// half the smallest gap around 0 and returns that shift; otherwise
    /// returns the set unchanged with shift 0.
    pub fn off_origin(&self) -> (Self, T) {
        let Some(i) = self.points.iter().position(|p| p.a == T::zero()) else {
            return (self.clone(), T::zero());
        };
        let left = if i > 0 {
            -self.points[i - 1].a
        } else {
            T::infinity()
        };
        let right = self
            .points
            .get(i + 1)
            .map(|p| p.a)
            .unwrap_or(T::infinity());
        let gap = left.min(right);
        let delta = if gap.is_finite() {
            gap * T::lit(0.5)
        } else {
            T::lit(0.5)
        };
        (self.translate(delta), delta)
    }
}

/// Prefix sums over a [`ZeroSet`].
pub struct Counter<'a, T> {
    set: &'a ZeroSet<T>,
    cum: Vec<u64>,
}

impl<T: Real> Counter<'_, T> {
    /// Number of points (with multiplicity) strictly below `x`.
    pub fn below(&self, x: T) -> u64 {
        let idx = self.set.points.partition_point(|p| p.a < x);
        self.cum[idx]
    }

    /// Number of points at or below `x`.
    pub fn at_or_below(&self, x: T) -> u64 {
        let idx = self.set.points.partition_point(|p| p.a <= x);
        self.cum[idx]
    }

    /// `#A ∩ [lo, hi)`.
    pub fn half_open(&self, lo: T, hi: T) -> u64 {
        if hi <= lo {
            return 0;
        }
        self.below(hi) - self.below(lo)
    }

    /// `#A ∩ (lo, hi]`.
    pub fn left_open(&self, lo: T, hi: T) -> u64 {
        if hi <= lo {
            return 0;
        }
        self.at_or_below(hi) - self.at_or_below(lo)
    }

    /// `#A ∩ [lo, hi]`.
    pub fn closed(&self, lo: T, hi: T) -> u64 {
        if hi < lo {
            return 0;
        }
        self.at_or_below(hi) - self.below(lo)
    }
}
