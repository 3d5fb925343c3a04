//! Intervals, hyperbolic length and numeric certification of the
//! expansion and Koebe distortion properties of negative-Schwarzian maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{UnimodalMap, DOMAIN_SLACK};

/// Smallest `|Df^n|` still treated as nonzero when testing monotonicity.
pub const MONOTONE_FLOOR: f64 = 1e-300;

/// Default number of sample points for distortion measurements.
pub const DEFAULT_DISTORTION_GRID: usize = 64;

/// A closed interval `[lo, hi]` inside `[-1, 1]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        if lo < -1.0 - DOMAIN_SLACK || hi > 1.0 + DOMAIN_SLACK {
            return Err(Error::Domain(format!("interval [{lo}, {hi}] leaves [-1, 1]")));
        }
        Ok(Self { lo: lo.max(-1.0), hi: hi.min(1.0) })
    }

    /// `(-u, u)`.
    pub fn symmetric(u: f64) -> Result<Self> {
        Self::new(-u, u)
    }

    /// Smallest interval containing both points.
    pub fn hull(a: f64, b: f64) -> Result<Self> {
        Self::new(a.min(b), a.max(b))
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Open-interval membership `lo < x < hi`.
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// `other` lies inside `self` with room on both sides.
    pub fn strictly_contains(&self, other: &Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    /// `n + 1` equally spaced points including both endpoints.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let h = self.len() / n as f64;
        (0..=n).map(move |i| if i == n { self.hi } else { self.lo + i as f64 * h })
    }
}

/// Hyperbolic length of `inner` within `outer`:
/// `ln((|L| + |I|)(|R| + |I|) / (|L| |R|))`, with `L`, `R` the components of
/// `outer \ inner`.
pub fn hyp_length(inner: &Interval, outer: &Interval) -> Result<f64> {
    let left = inner.lo - outer.lo;
    let right = outer.hi - inner.hi;
    if !(left > 0.0 && right > 0.0) {
        return Err(Error::DegenerateConfiguration(format!(
            "[{}, {}] is not strictly inside [{}, {}]",
            inner.lo, inner.hi, outer.lo, outer.hi
        )));
    }
    let len = inner.len();
    Ok((len / left).ln_1p() + (len / right).ln_1p())
}

/// Koebe distortion bound `K(tau) = ((1 + tau) / tau)^2`, where `tau` is the
/// space on either side of the image measured in units of the image length.
pub fn koebe_bound(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("Koebe space tau = {tau} must be positive")));
    }
    let k = (1.0 + tau) / tau;
    Ok(k * k)
}

/// Relative space `min(|f^n L|, |f^n R|) / |f^n I|` left by an image pair.
pub fn image_space(inner_image: &Interval, outer_image: &Interval) -> f64 {
    let left = inner_image.lo - outer_image.lo;
    let right = outer_image.hi - inner_image.hi;
    left.min(right) / inner_image.len()
}

/// `max |Df^n(x)| / |Df^n(y)|` over a uniform grid of `grid` points of `interval`.
pub fn measured_distortion(map: &UnimodalMap, n: usize, interval: &Interval, grid: usize) -> Result<f64> {
    if grid < 8 {
        return Err(Error::Domain(format!("distortion grid {grid} < 8")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let (min, max) = log_deriv_range(map, n, interval, grid)?;
    Ok((max - min).exp())
}

/// Range of `ln|Df^n|` over the grid, failing if the sign of `Df^n` changes.
fn log_deriv_range(map: &UnimodalMap, n: usize, interval: &Interval, grid: usize) -> Result<(f64, f64)> {
    let floor = MONOTONE_FLOOR.ln();
    let mut sign = None;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for x in interval.grid(grid - 1) {
        let d = map.log_deriv(x, n)?;
        if d.log_abs <= floor {
            return Err(Error::NotMonotone(format!("|Df^{n}({x})| below {MONOTONE_FLOOR:e}")));
        }
        match sign {
            None => sign = Some(d.negative),
            Some(s) if s != d.negative => {
                return Err(Error::NotMonotone(format!(
                    "Df^{n} changes sign on [{}, {}]",
                    interval.lo, interval.hi
                )))
            }
            _ => {}
        }
        min = min.min(d.log_abs);
        max = max.max(d.log_abs);
    }
    Ok((min, max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub hyp_before: f64,
    pub hyp_after: f64,
    pub ok: bool,
}

/// Compares `hyp(f^n I, f^n T)` with `hyp(I, T)` for a monotone branch.
pub fn expansion_check(
    map: &UnimodalMap,
    n: usize,
    inner: &Interval,
    outer: &Interval,
) -> Result<ExpansionReport> {
    let hyp_before = hyp_length(inner, outer)?;
    if n > 0 {
        log_deriv_range(map, n, outer, DEFAULT_DISTORTION_GRID)?;
    }
    let image = |iv: &Interval| {
        Interval::hull(map.iterate(iv.lo, n), map.iterate(iv.hi, n))
            .map_err(|e| Error::DegenerateConfiguration(format!("image collapsed: {e}")))
    };
    let hyp_after = hyp_length(&image(inner)?, &image(outer)?)?;
    Ok(ExpansionReport { hyp_before, hyp_after, ok: hyp_after >= hyp_before - 1e-10 })
}
