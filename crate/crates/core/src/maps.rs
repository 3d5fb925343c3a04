//! Map model: the quadratic family `q_t(x) = -2t|x|^alpha + 2t - 1` and
//! user-supplied S-unimodal maps on `[-1, 1]`, together with orbit and
//! derivative-accumulation primitives.
//!
//! Derivative products along orbits are always carried as sums of
//! `ln|Df|` plus a separate sign, since `4^k` overflows binary64 long before
//! the orbit lengths used elsewhere in the crate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Interval;

/// Overshoot of `[-1, 1]` that is silently clamped.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Orbit points closer than this to the critical point count as hits.
pub const CRITICAL_EPS: f64 = 1e-14;

/// A smooth map given by its value and first three derivatives.
///
/// Implementors must be pure; they are shared across threads.
pub trait SmoothMap: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d3(&self, x: f64) -> f64;
}

#[derive(Clone)]
enum Kind {
    Quadratic {
        t: f64,
    },
    /// `f(x) = sum_i c_i |x|^i`
    Polynomial {
        coefficients: Vec<f64>,
    },
    Custom(Arc<dyn SmoothMap>),
}

/// An S-unimodal map of `[-1, 1]` with critical point 0.
#[derive(Clone)]
pub struct UnimodalMap {
    kind: Kind,
    alpha: f64,
}

impl fmt::Debug for UnimodalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Quadratic { t } => {
                f.debug_struct("Quadratic").field("t", t).field("alpha", &self.alpha).finish()
            }
            Kind::Polynomial { coefficients } => f
                .debug_struct("Polynomial")
                .field("alpha", &self.alpha)
                .field("coefficients", coefficients)
                .finish(),
            Kind::Custom(_) => f.debug_struct("Custom").field("alpha", &self.alpha).finish_non_exhaustive(),
        }
    }
}

/// JSON descriptor for polynomial maps in `|x|`.
///
/// ```json
/// {"kind": "polynomial", "alpha": 2, "coefficients": [1.0, 0.0, -2.0]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDescriptor {
    pub kind: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub coefficients: Vec<f64>,
}

fn default_alpha() -> f64 {
    2.0
}

/// `ln|Df^n(x)|` together with the sign of `Df^n(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDeriv {
    pub log_abs: f64,
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRecord {
    /// `points[j] = f^j(x0)`, length `k + 1`.
    pub points: Vec<f64>,
    /// `log_deriv_prefix[k] = sum_{j<k} ln|Df(points[j])|`.
    pub log_deriv_prefix: Vec<f64>,
    /// `negative_prefix[k]` is true when `Df^k(x0) < 0`.
    pub negative_prefix: Vec<bool>,
    /// First `j` with `Df(points[j]) = 0`; prefixes beyond it are `-inf`.
    pub critical_hit: Option<usize>,
    /// Smallest `j >= 1` with `points[j]` in the queried interval.
    pub first_entry: Option<usize>,
}

impl OrbitRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `ln|Df^k(x0)|`, or `None` if the derivative product vanished first.
    pub fn log_abs_deriv(&self, k: usize) -> Option<f64> {
        match self.critical_hit {
            Some(j) if j < k => None,
            _ => self.log_deriv_prefix.get(k).copied(),
        }
    }
}

impl UnimodalMap {
    pub fn quadratic(t: f64) -> Result<Self> {
        Self::quadratic_with_alpha(t, 2.0)
    }

    /// Even extension `-2t|x|^alpha + 2t - 1` of the quadratic family.
    pub fn quadratic_with_alpha(t: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("parameter t = {t} outside [0, 1]")));
        }
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("critical exponent {alpha} must exceed 1")));
        }
        Ok(Self { kind: Kind::Quadratic { t }, alpha })
    }

    /// Polynomial map in `|x|`, validated against the S-unimodal axioms.
    pub fn polynomial(alpha: f64, coefficients: Vec<f64>) -> Result<Self> {
        let lowest = coefficients.iter().enumerate().skip(1).find(|(_, c)| **c != 0.0).map(|(i, _)| i);
        match lowest {
            None => return Err(Error::InvalidMap("constant polynomial".into())),
            Some(i) if (i as f64 - alpha).abs() > 1e-12 => {
                return Err(Error::InvalidMap(format!(
                    "lowest non-constant power {i} does not match alpha = {alpha}"
                )))
            }
            _ => {}
        }
        let map = Self { kind: Kind::Polynomial { coefficients }, alpha };
        map.check_axioms(2001)?;
        Ok(map)
    }

    pub fn from_descriptor(desc: &MapDescriptor) -> Result<Self> {
        match desc.kind.as_str() {
            "polynomial" => Self::polynomial(desc.alpha, desc.coefficients.clone()),
            other => Err(Error::InvalidMap(format!("unknown map kind {other:?}"))),
        }
    }

    /// User-supplied map, validated on a sampled grid.
    pub fn custom(alpha: f64, map: Arc<dyn SmoothMap>) -> Result<Self> {
        let map = Self::custom_unchecked(alpha, map);
        map.check_axioms(2001)?;
        Ok(map)
    }

    /// User-supplied map without axiom checks. Intended for degenerate test
    /// maps and for maps whose validity is established elsewhere.
    pub fn custom_unchecked(alpha: f64, map: Arc<dyn SmoothMap>) -> Self {
        Self { kind: Kind::Custom(map), alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Family parameter for quadratic-kind maps.
    pub fn t(&self) -> Option<f64> {
        match self.kind {
            Kind::Quadratic { t } => Some(t),
            _ => None,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, Kind::Quadratic { .. })
    }

    /// Grid check of the S-unimodal axioms.
    pub fn check_axioms(&self, grid: usize) -> Result<()> {
        if !(self.alpha > 1.0) {
            return Err(Error::InvalidMap(format!("alpha = {} <= 1", self.alpha)));
        }
        for x in [-1.0, 1.0] {
            let y = self.raw_eval(x);
            if (y + 1.0).abs() > DOMAIN_SLACK {
                return Err(Error::InvalidMap(format!("f({x}) = {y}, expected -1")));
            }
        }
        if self.raw_d1(0.0).abs() > DOMAIN_SLACK {
            return Err(Error::InvalidMap("Df(0) != 0".into()));
        }
        let grid = grid.max(3);
        for i in 0..grid {
            let x = -1.0 + 2.0 * i as f64 / (grid - 1) as f64;
            if x == 0.0 {
                continue;
            }
            let y = self.raw_eval(x);
            if y.abs() > 1.0 + DOMAIN_SLACK {
                return Err(Error::InvalidMap(format!("f({x}) = {y} leaves [-1, 1]")));
            }
            let d = self.raw_d1(x);
            if (x < 0.0 && !(d > 0.0)) || (x > 0.0 && !(d < 0.0)) {
                return Err(Error::InvalidMap(format!("Df({x}) = {d} has the wrong sign")));
            }
            let s = self.schwarzian_unchecked(x);
            if !(s < 0.0) {
                return Err(Error::InvalidMap(format!("Sf({x}) = {s} is not negative")));
            }
        }
        Ok(())
    }

    fn raw_eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { t } => {
                let p = if self.alpha == 2.0 { x * x } else { x.abs().powf(self.alpha) };
                (2.0 * t - 1.0) - 2.0 * t * p
            }
            Kind::Polynomial { coefficients } => {
                let a = x.abs();
                coefficients.iter().rev().fold(0.0, |acc, c| acc * a + c)
            }
            Kind::Custom(m) => m.eval(x),
        }
    }

    fn raw_d1(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { t } => {
                if self.alpha == 2.0 {
                    -4.0 * t * x
                } else if x == 0.0 {
                    0.0
                } else {
                    -2.0 * t * self.alpha * x.abs().powf(self.alpha - 1.0) * x.signum()
                }
            }
            Kind::Polynomial { coefficients } => {
                if x == 0.0 {
                    return 0.0;
                }
                x.signum() * poly_derivative(coefficients, x.abs(), 1)
            }
            Kind::Custom(m) => m.d1(x),
        }
    }

    fn raw_d2(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { t } => {
                let a = self.alpha;
                if a == 2.0 {
                    -4.0 * t
                } else {
                    -2.0 * t * a * (a - 1.0) * x.abs().powf(a - 2.0)
                }
            }
            Kind::Polynomial { coefficients } => poly_derivative(coefficients, x.abs(), 2),
            Kind::Custom(m) => m.d2(x),
        }
    }

    fn raw_d3(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { t } => {
                let a = self.alpha;
                if a == 2.0 {
                    0.0
                } else {
                    -2.0 * t * a * (a - 1.0) * (a - 2.0) * x.abs().powf(a - 3.0) * x.signum()
                }
            }
            Kind::Polynomial { coefficients } => x.signum() * poly_derivative(coefficients, x.abs(), 3),
            Kind::Custom(m) => m.d3(x),
        }
    }

    fn check_domain(x: f64) -> Result<()> {
        if x.is_nan() || x.abs() > 1.0 + DOMAIN_SLACK {
            return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Self::check_domain(x)?;
        let y = self.raw_eval(x.clamp(-1.0, 1.0));
        if !(y.abs() <= 1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain(format!("f({x}) = {y} leaves [-1, 1]")));
        }
        Ok(y.clamp(-1.0, 1.0))
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        Self::check_domain(x)?;
        Ok(self.raw_d1(x.clamp(-1.0, 1.0)))
    }

    /// `Sf = D^3 f / Df - (3/2) (D^2 f / Df)^2`.
    pub fn schwarzian(&self, x: f64) -> Result<f64> {
        Self::check_domain(x)?;
        if x == 0.0 {
            return Err(Error::Domain("Schwarzian undefined at the critical point".into()));
        }
        Ok(self.schwarzian_unchecked(x.clamp(-1.0, 1.0)))
    }

    fn schwarzian_unchecked(&self, x: f64) -> f64 {
        let d1 = self.raw_d1(x);
        let r2 = self.raw_d2(x) / d1;
        self.raw_d3(x) / d1 - 1.5 * r2 * r2
    }

    /// Unchecked evaluation for hot loops; the result is clamped to `[-1, 1]`.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.raw_eval(x).clamp(-1.0, 1.0)
    }

    /// Unchecked first derivative for hot loops.
    #[inline]
    pub fn apply_deriv(&self, x: f64) -> f64 {
        self.raw_d1(x)
    }

    /// `f^n(x)`.
    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |y, _| self.apply(y))
    }

    /// `ln|Df^n(x)|` and its sign. Fails with `CriticalHit` when one of
    /// `x, f(x), ..., f^{n-1}(x)` is within `CRITICAL_EPS` of 0.
    pub fn log_deriv(&self, x: f64, n: usize) -> Result<LogDeriv> {
        let mut y = x;
        let mut log_abs = 0.0;
        let mut negative = false;
        for j in 0..n {
            if y.abs() < CRITICAL_EPS {
                return Err(Error::CriticalHit { index: j });
            }
            let d = self.raw_d1(y);
            log_abs += d.abs().ln();
            negative ^= d < 0.0;
            y = self.apply(y);
        }
        Ok(LogDeriv { log_abs, negative })
    }

    pub fn orbit(&self, x0: f64, k: usize) -> Result<OrbitRecord> {
        self.orbit_with_entry(x0, k, None)
    }

    /// Orbit of length `k + 1`, optionally recording the first entry into
    /// `watch`.
    pub fn orbit_with_entry(&self, x0: f64, k: usize, watch: Option<&Interval>) -> Result<OrbitRecord> {
        Self::check_domain(x0)?;
        let mut points = Vec::with_capacity(k + 1);
        let mut log_deriv_prefix = Vec::with_capacity(k + 1);
        let mut negative_prefix = Vec::with_capacity(k + 1);
        let mut critical_hit = None;
        let mut first_entry = None;
        let mut x = x0.clamp(-1.0, 1.0);
        let mut acc = 0.0;
        let mut neg = false;
        points.push(x);
        log_deriv_prefix.push(acc);
        negative_prefix.push(neg);
        for j in 0..k {
            let d = self.raw_d1(x);
            if d == 0.0 && critical_hit.is_none() {
                critical_hit = Some(j);
            }
            acc += d.abs().ln();
            neg ^= d < 0.0;
            x = self.apply(x);
            points.push(x);
            log_deriv_prefix.push(acc);
            negative_prefix.push(neg);
            if first_entry.is_none() && watch.is_some_and(|w| w.contains(x)) {
                first_entry = Some(j + 1);
            }
        }
        Ok(OrbitRecord { points, log_deriv_prefix, negative_prefix, critical_hit, first_entry })
    }

    /// The fixed point of the map in `(0, 1)`.
    pub fn fixed_point_positive(&self) -> Result<f64> {
        if let Kind::Quadratic { t } = self.kind {
            if self.alpha == 2.0 {
                if t <= 0.5 {
                    return Err(Error::NoFixedPoint);
                }
                return Ok(1.0 - 1.0 / (2.0 * t));
            }
        }
        let g = |x: f64| self.raw_eval(x) - x;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if !(g(lo) > 0.0 && g(hi) < 0.0) {
            return Err(Error::NoFixedPoint);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
        if x <= 0.0 || g(x).abs() > 1e-12 {
            return Err(Error::NoFixedPoint);
        }
        Ok(x)
    }
}

impl UnimodalMap {
    /// `f(c + delta) - f(c)`, evaluated without cancellation for small `delta`.
    pub fn increment(&self, c: f64, delta: f64) -> f64 {
        let x = c + delta;
        // b - a = |c + delta| - |c|, exact when c and c + delta share a sign
        let same_side = c != 0.0 && (c > 0.0) == (x > 0.0) && x != 0.0;
        match &self.kind {
            Kind::Quadratic { t } => {
                if self.alpha == 2.0 {
                    -2.0 * t * delta * (2.0 * c + delta)
                } else if same_side && delta.abs() < 0.5 * c.abs() {
                    let a = c.abs();
                    let ratio = delta * c.signum() / a;
                    -2.0 * t * a.powf(self.alpha) * (self.alpha * ratio.ln_1p()).exp_m1()
                } else {
                    -2.0 * t * (x.abs().powf(self.alpha) - c.abs().powf(self.alpha))
                }
            }
            Kind::Polynomial { coefficients } => {
                let (a, b) = (c.abs(), x.abs());
                if same_side {
                    let diff = delta * c.signum();
                    coefficients
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, ci)| {
                            let s: f64 = (0..i).map(|k| b.powi(k as i32) * a.powi((i - 1 - k) as i32)).sum();
                            ci * diff * s
                        })
                        .sum()
                } else {
                    coefficients
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, ci)| ci * (b.powi(i as i32) - a.powi(i as i32)))
                        .sum()
                }
            }
            Kind::Custom(m) => {
                if delta.abs() <= 1e-6 && c != 0.0 {
                    delta * (m.d1(c) + delta * (m.d2(c) / 2.0 + delta * m.d3(c) / 6.0))
                } else {
                    m.eval(x) - m.eval(c)
                }
            }
        }
    }
}

/// Offsets above this are handed back to plain iteration.
const REFERENCE_SWITCH: f64 = 1e-3;

/// The computed critical orbit, used as a reference for orbits of points
/// close to the critical point.
///
/// For `y` near 0, `f(y)` and `f(0)` agree to within rounding once
/// `|y| < 1e-8`, so plain iteration cannot resolve nearby points. The
/// offsets `f^j(y) - f^j(0)` are carried separately instead, until they are
/// large enough for plain iteration to take over.
#[derive(Debug, Clone)]
pub struct ReferenceOrbit<'a> {
    map: &'a UnimodalMap,
    points: Vec<f64>,
}

impl<'a> ReferenceOrbit<'a> {
    /// `f^j(0)` for `j = 0..=len`.
    pub fn new(map: &'a UnimodalMap, len: usize) -> Self {
        let mut points = Vec::with_capacity(len + 1);
        let mut x = 0.0;
        points.push(x);
        for _ in 0..len {
            x = map.apply(x);
            points.push(x);
        }
        Self { map, points }
    }

    /// Wraps an already computed critical orbit `f^1(0), f^2(0), ...`.
    pub fn from_iterates(map: &'a UnimodalMap, iterates: &[f64]) -> Self {
        let mut points = Vec::with_capacity(iterates.len() + 1);
        points.push(0.0);
        points.extend_from_slice(iterates);
        Self { map, points }
    }

    pub fn map(&self) -> &'a UnimodalMap {
        self.map
    }

    /// Number of reference iterates.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `f^j(0)`.
    pub fn point(&self, j: usize) -> f64 {
        self.points[j]
    }

    /// Visits `(j, f^j(y))` for `j = 1..=n`, stopping when `visit` returns
    /// false. Returns the last point produced.
    pub fn trace(&self, y: f64, n: usize, mut visit: impl FnMut(usize, f64) -> bool) -> f64 {
        let mut delta = y;
        let mut x = y;
        let mut near = y.abs() < REFERENCE_SWITCH;
        for j in 1..=n {
            if near && j < self.points.len() {
                delta = self.map.increment(self.points[j - 1], delta);
                x = (self.points[j] + delta).clamp(-1.0, 1.0);
                near = delta.abs() < REFERENCE_SWITCH;
            } else {
                x = self.map.apply(x);
            }
            if !visit(j, x) {
                break;
            }
        }
        x
    }

    /// `f^n(y)`.
    pub fn iterate(&self, y: f64, n: usize) -> f64 {
        self.trace(y, n, |_, _| true)
    }

    /// `ln|Df^n(y)|` and its sign, evaluated along the traced orbit.
    pub fn log_deriv(&self, y: f64, n: usize) -> Result<LogDeriv> {
        let mut log_abs = 0.0;
        let mut negative = false;
        let mut prev = y;
        let mut hit = None;
        self.trace(y, n, |j, x| {
            if prev.abs() < CRITICAL_EPS {
                hit = Some(j - 1);
                return false;
            }
            let d = self.map.raw_d1(prev);
            log_abs += d.abs().ln();
            negative ^= d < 0.0;
            prev = x;
            true
        });
        match hit {
            Some(index) => Err(Error::CriticalHit { index }),
            None => Ok(LogDeriv { log_abs, negative }),
        }
    }
}

/// `sum_i c_i * i!/(i-order)! * a^(i-order)`, skipping vanishing terms.
fn poly_derivative(coefficients: &[f64], a: f64, order: usize) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .skip(order)
        .map(|(i, c)| {
            let falling: f64 = (0..order).map(|k| (i - k) as f64).product();
            c * falling * a.powi((i - order) as i32)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(t: f64) -> UnimodalMap {
        UnimodalMap::quadratic(t).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(q(1.0).eval(0.0).unwrap(), 1.0);
        assert_eq!(q(1.0).eval(1.0).unwrap(), -1.0);
        assert!((q(0.75).eval(1.0 / 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_outside_domain() {
        assert!(matches!(q(1.0).eval(1.1), Err(Error::Domain(_))));
        assert!(q(1.0).eval(1.0 + 1e-13).is_ok());
        assert!(matches!(q(1.0).deriv(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn deriv_examples() {
        assert_eq!(q(1.0).deriv(0.0).unwrap(), 0.0);
        assert_eq!(q(1.0).deriv(1.0).unwrap(), -4.0);
        assert_eq!(q(1.0).deriv(-1.0).unwrap(), 4.0);
    }

    #[test]
    fn schwarzian_examples() {
        assert!((q(1.0).schwarzian(0.5).unwrap() + 6.0).abs() < 1e-12);
        assert!((q(0.7).schwarzian(0.5).unwrap() + 6.0).abs() < 1e-12);
        assert!((q(1.0).schwarzian(1.0).unwrap() + 1.5).abs() < 1e-12);
        assert!(matches!(q(1.0).schwarzian(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn orbit_examples() {
        let rec = q(1.0).orbit(0.0, 3).unwrap();
        assert_eq!(rec.points, vec![0.0, 1.0, -1.0, -1.0]);
        assert_eq!(rec.critical_hit, Some(0));
        assert_eq!(rec.log_abs_deriv(0), Some(0.0));
        assert_eq!(rec.log_abs_deriv(1), None);

        let rec = q(0.8).orbit(0.3, 0).unwrap();
        assert_eq!(rec.points, vec![0.3]);

        let rec = q(1.0).orbit(1.0, 2).unwrap();
        let ln4 = 4.0_f64.ln();
        assert_eq!(rec.log_deriv_prefix[0], 0.0);
        assert!((rec.log_deriv_prefix[1] - ln4).abs() < 1e-15);
        assert!((rec.log_deriv_prefix[2] - 2.0 * ln4).abs() < 1e-15);
        // Df(1) = -4, Df(-1) = 4
        assert_eq!(rec.negative_prefix, vec![false, true, true]);
        assert_eq!(rec.critical_hit, None);
    }

    #[test]
    fn orbit_first_entry() {
        let u = Interval::new(-0.5, 0.5).unwrap();
        let rec = q(1.0).orbit_with_entry(0.0, 5, Some(&u)).unwrap();
        assert_eq!(rec.first_entry, None);
        let rec = q(0.6).orbit_with_entry(0.0, 5, Some(&Interval::new(-0.19, 0.19).unwrap())).unwrap();
        // 0 -> 0.2 -> 0.152 -> ...
        assert_eq!(rec.first_entry, Some(2));
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(q(1.0).fixed_point_positive().unwrap(), 0.5);
        assert!((q(0.75).fixed_point_positive().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(q(0.4).fixed_point_positive(), Err(Error::NoFixedPoint));
    }

    #[test]
    fn fixed_point_by_bisection_for_general_alpha() {
        let m = UnimodalMap::quadratic_with_alpha(0.9, 3.0).unwrap();
        let x = m.fixed_point_positive().unwrap();
        assert!((m.eval(x).unwrap() - x).abs() < 1e-12);
        assert!(x > 0.0 && x < 1.0);
    }

    #[test]
    fn polynomial_matches_quadratic() {
        // q_1(x) = 1 - 2|x|^2
        let p = UnimodalMap::polynomial(2.0, vec![1.0, 0.0, -2.0]).unwrap();
        for &x in &[-0.9, -0.3, 0.1, 0.77] {
            assert!((p.eval(x).unwrap() - q(1.0).eval(x).unwrap()).abs() < 1e-15);
            assert!((p.deriv(x).unwrap() - q(1.0).deriv(x).unwrap()).abs() < 1e-14);
            assert!((p.schwarzian(x).unwrap() * x * x + 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_rejects_bad_maps() {
        // f(1) != -1
        assert!(UnimodalMap::polynomial(2.0, vec![1.0, 0.0, -1.0]).is_err());
        // alpha mismatch
        assert!(UnimodalMap::polynomial(3.0, vec![1.0, 0.0, -2.0]).is_err());
        // kink at 0
        assert!(UnimodalMap::polynomial(1.0, vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"kind":"polynomial","alpha":4,"coefficients":[1,0,0,0,-2]}"#;
        let desc: MapDescriptor = serde_json::from_str(json).unwrap();
        let m = UnimodalMap::from_descriptor(&desc).unwrap();
        assert_eq!(m.alpha(), 4.0);
        assert_eq!(m.eval(1.0).unwrap(), -1.0);
        let bad = MapDescriptor { kind: "spline".into(), ..desc };
        assert!(matches!(UnimodalMap::from_descriptor(&bad), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn quadratic_family_satisfies_axioms() {
        for t in [0.55, 0.8, 0.95, 1.0] {
            q(t).check_axioms(4001).unwrap();
            UnimodalMap::quadratic_with_alpha(t, 2.5).unwrap().check_axioms(4001).unwrap();
        }
    }

    #[test]
    fn log_deriv_detects_critical_hit() {
        assert_eq!(q(1.0).log_deriv(0.0, 2), Err(Error::CriticalHit { index: 0 }));
        let d = q(1.0).log_deriv(1.0, 3).unwrap();
        assert!((d.log_abs - 3.0 * 4.0_f64.ln()).abs() < 1e-14);
        assert!(d.negative);
    }

    proptest! {
        #[test]
        fn finite_difference_matches_deriv(t in 0.0f64..=1.0, x in -0.99f64..0.99) {
            let m = q(t);
            let h = 1e-5;
            let fd = (m.eval(x + h).unwrap() - m.eval(x - h).unwrap()) / (2.0 * h);
            // Third derivative vanishes for alpha = 2, so the bound is rounding only.
            prop_assert!((fd - m.deriv(x).unwrap()).abs() <= 1e-9);
        }

        #[test]
        fn eval_is_even(t in 0.0f64..=1.0, x in -1.0f64..=1.0, alpha in 1.1f64..6.0) {
            let m = UnimodalMap::quadratic_with_alpha(t, alpha).unwrap();
            prop_assert_eq!(m.eval(x).unwrap(), m.eval(-x).unwrap());
        }

        #[test]
        fn fixed_point_is_fixed(t in 0.5001f64..=1.0) {
            let m = q(t);
            let x = m.fixed_point_positive().unwrap();
            prop_assert!((m.eval(x).unwrap() - x).abs() <= 1e-12);
        }

        #[test]
        fn schwarzian_scales_like_inverse_square(t in 0.01f64..=1.0, x in -1.0f64..1.0) {
            prop_assume!(x.abs() > 1e-6);
            let s = q(t).schwarzian(x).unwrap();
            prop_assert!((s * x * x + 1.5).abs() < 1e-9);
        }
    }
}
