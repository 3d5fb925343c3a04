use serde::{Deserialize, Serialize};

use crate::cascade::CentralCascade;
use crate::error::{Error, Result};
use crate::maps::UnimodalMap;

/// Tail ratios below this look convergent.
pub const CONVERGENT_TAIL: f64 = 0.01;

/// Geometric term ratios of the scaling series below this look summable.
pub const SCALING_CONVERGENT_RATIO: f64 = 0.9;
/// Ratios at or above this look non-summable.
pub const SCALING_DIVERGENT_RATIO: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    ConvergentLooking,
    DivergentLooking,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub alpha: f64,
    pub kmax: usize,
    /// `partial_sums[K - 1] = sum_{k <= K} |Df^k(f(0))|^(-1/alpha)`.
    pub partial_sums: Vec<f64>,
    pub tail_ratio: f64,
    pub verdict: Verdict,
    /// `a = (1 / (1 - theta^beta)) sum_{n >= n0} (C rho_n)^(-beta)`, when
    /// estimates of `C` and `theta` were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

impl SummabilityReport {
    pub fn last(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

/// Partial sums of `|Df^k(f(0))|^(-1/alpha)` for `k = 1..=kmax`.
pub fn summability(map: &UnimodalMap, kmax: usize) -> Result<SummabilityReport> {
    if kmax < 10 {
        return Err(Error::Domain(format!("kmax = {kmax} < 10")));
    }
    let beta = 1.0 / map.alpha();
    let orbit = map.orbit(map.apply(0.0), kmax)?;
    if let Some(j) = orbit.critical_hit {
        if j < kmax {
            return Err(Error::CriticalHit { index: j + 1 });
        }
    }
    let terms: Vec<f64> = (1..=kmax).map(|k| (-beta * orbit.log_deriv_prefix[k]).exp()).collect();
    let mut partial_sums = Vec::with_capacity(kmax);
    let mut acc = 0.0;
    for &term in &terms {
        acc += term;
        partial_sums.push(acc);
    }
    let half = partial_sums[kmax / 2 - 1];
    let tail_ratio = (acc / half - 1.0).max(0.0);
    let verdict = if tail_ratio < CONVERGENT_TAIL {
        Verdict::ConvergentLooking
    } else if terms[kmax / 2..].windows(2).all(|w| w[1] >= w[0]) {
        Verdict::DivergentLooking
    } else {
        Verdict::Inconclusive
    };
    Ok(SummabilityReport { alpha: map.alpha(), kmax, partial_sums, tail_ratio, verdict, a: None })
}

/// `rho_n = min(1 / sigma_{n-1}, 1 / sigma_n)` for 1-based `n >= 2`.
pub fn rho(cascade: &CentralCascade, n: usize) -> Option<f64> {
    let a = cascade.sigma_level(n.checked_sub(1)?)?;
    let b = cascade.sigma_level(n)?;
    Some((1.0 / a).min(1.0 / b))
}

/// The constant `a` over the recorded levels `n >= n0`.
pub fn a_constant(cascade: &CentralCascade, n0: usize, c: f64, theta: f64, alpha: f64) -> Option<f64> {
    if !(c > 0.0 && theta > 0.0 && theta < 1.0) {
        return None;
    }
    let beta = 1.0 / alpha;
    let sum: f64 =
        (n0.max(2)..=cascade.depth()).filter_map(|n| rho(cascade, n)).map(|r| (c * r).powf(-beta)).sum();
    Some(sum / (1.0 - theta.powf(beta)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSummability {
    pub alpha: f64,
    /// `sigma_n^(1/alpha)` per recorded level.
    pub per_level_terms: Vec<f64>,
    /// Sum over the recorded levels.
    pub sum: f64,
    /// Geometric mean of the last (up to three) ratios of consecutive terms.
    pub trend_ratio: Option<f64>,
    /// Geometric continuation of the last term with `trend_ratio`; absent
    /// when the ratio is not below 1.
    pub tail: Option<f64>,
    /// The tail is an extrapolation, not a bound.
    pub tail_is_heuristic: bool,
    pub verdict: Verdict,
}

impl ScalingSummability {
    pub fn total(&self) -> f64 {
        self.sum + self.tail.unwrap_or(0.0)
    }
}

/// `sum_n sigma_n^(1/alpha)` with a geometric tail estimate.
pub fn scaling_summability(cascade: &CentralCascade, alpha: f64) -> ScalingSummability {
    let beta = 1.0 / alpha;
    let per_level_terms: Vec<f64> = cascade.sigma.iter().map(|s| s.powf(beta)).collect();
    let sum = per_level_terms.iter().sum();
    let ratios: Vec<f64> = per_level_terms.windows(2).map(|w| w[1] / w[0]).collect();
    let recent = &ratios[ratios.len().saturating_sub(3)..];
    let trend_ratio = (!recent.is_empty())
        .then(|| (recent.iter().map(|r| r.ln()).sum::<f64>() / recent.len() as f64).exp());
    let tail = match (trend_ratio, per_level_terms.last()) {
        (Some(r), Some(&last)) if r < 1.0 => Some(last * r / (1.0 - r)),
        _ => None,
    };
    let verdict = match trend_ratio {
        Some(r) if r < SCALING_CONVERGENT_RATIO => Verdict::ConvergentLooking,
        Some(r) if r >= SCALING_DIVERGENT_RATIO => Verdict::DivergentLooking,
        _ => Verdict::Inconclusive,
    };
    ScalingSummability { alpha, per_level_terms, sum, trend_ratio, tail, tail_is_heuristic: true, verdict }
}
