use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::summability::rho;
use crate::cascade::CentralCascade;
use crate::error::{Error, Result};
use crate::maps::{ReferenceOrbit, UnimodalMap};

/// Minimum number of samples with at least two recorded returns.
const MIN_MULTI_RETURN: usize = 10;
/// Minimum accepted orbits per bucket in `mane_estimate`.
const MIN_BUCKET: usize = 10;
/// Records needed at a return count before it enters the slope fit.
const MIN_FIT_COUNT: usize = 30;
/// Quantile of `ln|Df^T|` per return count used for the slope fit.
const FIT_QUANTILE: f64 = 0.1;
/// Iterates allowed per sample before the audit gives up on it.
const SAMPLE_TIME_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnRecord {
    pub sample: usize,
    /// The sampled point `x`.
    pub start: f64,
    /// Number of returns to `U_n` so far, all outside `U_{n+1}`.
    pub s: usize,
    /// `R_n^s(x) = f^T(x)`.
    pub time: usize,
    /// `ln|Df^T(f(x))|`.
    pub log_deriv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub s: usize,
    pub count: usize,
    pub min_log_deriv: f64,
    /// Lower-decile `ln|Df^T|`, the value the slope is fitted to.
    pub low_log_deriv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop31Audit {
    pub level: usize,
    pub samples: usize,
    pub s_max: usize,
    pub seed: u64,
    pub rho: f64,
    /// One record per sample and return count.
    pub records: Vec<ReturnRecord>,
    pub envelope: Vec<EnvelopePoint>,
    /// `min ln|Df^T|` is nondecreasing in `s` for `s >= 2`.
    pub monotone_from_two: bool,
    pub ln_c: f64,
    pub ln_inv_theta: f64,
    /// Records strictly below the fitted envelope.
    pub violations: usize,
}

/// Samples `x` in `U_{n+1}` and records the derivative along successive
/// returns to `U_n` that stay outside `U_{n+1}`.
pub fn prop31_audit(
    map: &UnimodalMap,
    cascade: &CentralCascade,
    n: usize,
    samples: usize,
    s_max: usize,
    seed: u64,
) -> Result<Prop31Audit> {
    if samples < 100 {
        return Err(Error::Domain(format!("samples = {samples} < 100")));
    }
    if s_max == 0 {
        return Err(Error::Domain("s_max must be positive".into()));
    }
    let (Some(u_n), Some(u_next), Some(rho_n)) =
        (cascade.u_level(n), cascade.u_level(n + 1), rho(cascade, n))
    else {
        return Err(Error::CascadeTooShallow(format!(
            "level {n} needs levels {} to {} in a cascade of depth {}",
            n.saturating_sub(1),
            n + 1,
            cascade.depth()
        )));
    };

    let q = cascade.q.iter().copied().max().unwrap_or(1);
    let orbit = ReferenceOrbit::new(map, q + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for sample in 0..samples {
        let x = rng.gen_range(-u_next..u_next);
        let mut s = 0;
        let mut log_deriv = 0.0;
        let mut pending = Vec::new();
        let mut hit = false;
        orbit.trace(x, SAMPLE_TIME_CAP, |j, y| {
            let d = map.apply_deriv(y).abs();
            if d == 0.0 {
                hit = true;
                return false;
            }
            log_deriv += d.ln();
            if y.abs() < u_n {
                if y.abs() < u_next {
                    return false;
                }
                s += 1;
                // Df at f^T(x) belongs to the derivative of f^T at f(x).
                pending.push(ReturnRecord { sample, start: x, s, time: j, log_deriv });
                if s == s_max {
                    return false;
                }
            }
            true
        });
        if !hit {
            records.extend(pending);
        }
    }

    let multi = records.iter().filter(|r| r.s == 2).count();
    if multi < MIN_MULTI_RETURN {
        return Err(Error::InsufficientReturns(format!(
            "{multi} of {samples} samples returned twice outside U_{}",
            n + 1
        )));
    }

    let s_top = records.iter().map(|r| r.s).max().unwrap_or(0);
    let envelope: Vec<EnvelopePoint> = (1..=s_top)
        .filter_map(|s| {
            let mut values: Vec<f64> = records.iter().filter(|r| r.s == s).map(|r| r.log_deriv).collect();
            values.sort_by(f64::total_cmp);
            let count = values.len();
            (count > 0).then(|| EnvelopePoint {
                s,
                count,
                min_log_deriv: values[0],
                low_log_deriv: values[(count as f64 * FIT_QUANTILE) as usize],
            })
        })
        .collect();
    let monotone_from_two = envelope
        .iter()
        .filter(|e| e.s >= 2)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1].min_log_deriv >= w[0].min_log_deriv);

    // Minima over a few orbits swing the fit; the slope uses a low quantile
    // of well-populated return counts and ln C then shifts it under every
    // record.
    let points: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|e| e.count >= MIN_FIT_COUNT)
        .map(|e| ((e.s - 1) as f64, e.low_log_deriv))
        .collect();
    let ln_inv_theta = least_squares_slope(&points);
    let ln_rho = rho_n.ln();
    let ln_c = records
        .iter()
        .map(|r| r.log_deriv - ln_rho - (r.s - 1) as f64 * ln_inv_theta)
        .fold(f64::INFINITY, f64::min);
    let violations =
        records.iter().filter(|r| r.log_deriv < ln_c + ln_rho + (r.s - 1) as f64 * ln_inv_theta).count();
    Ok(Prop31Audit {
        level: n,
        samples,
        s_max,
        seed,
        rho: rho_n,
        records,
        envelope,
        monotone_from_two,
        ln_c,
        ln_inv_theta,
        violations,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManeEstimate {
    pub u: f64,
    pub r_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Accepted orbits per `r = 1..=r_max`.
    pub bucket_counts: Vec<usize>,
    /// `min ln|Df^r(x)|` per bucket.
    pub envelope: Vec<f64>,
    pub c_hat: f64,
    pub lambda_hat: f64,
}

/// Lower envelope `ln|Df^r(x)| >= ln C + r ln lambda` over orbits that stay
/// outside `(-u, u)`.
///
/// Each attempt draws an endpoint `y` uniformly in `[-1, 1]`, rejects it if
/// it lies in `(-u, u)`, and pulls it back through preimages outside
/// `(-u, u)`; the `r`-th preimage `x` has `f^i(x)` outside `(-u, u)` for
/// `0 <= i <= r` and feeds bucket `r`. When both preimages qualify, the one
/// that can itself be pulled back is preferred, otherwise one is chosen at
/// random.
pub fn mane_estimate(
    map: &UnimodalMap,
    u: f64,
    r_max: usize,
    samples: usize,
    seed: u64,
) -> Result<ManeEstimate> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
    }
    if r_max < 10 {
        return Err(Error::Domain(format!("r_max = {r_max} < 10")));
    }
    let top = map.apply(0.0);
    let preimage = |y: f64| -> Option<f64> {
        if y > top {
            return None;
        }
        let x = positive_preimage(map, y);
        (x >= u).then_some(x)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bucket_counts = vec![0; r_max];
    let mut envelope = vec![f64::INFINITY; r_max];
    for _ in 0..samples {
        let y: f64 = rng.gen_range(-1.0..=1.0);
        if y.abs() < u {
            continue;
        }
        let mut current = y;
        let mut log_deriv = 0.0;
        for r in 1..=r_max {
            let Some(x) = preimage(current) else { break };
            let survives_plus = preimage(x).is_some();
            let survives_minus = preimage(-x).is_some();
            let plus = match (survives_plus, survives_minus) {
                (true, false) => true,
                (false, true) => false,
                _ => rng.gen_bool(0.5),
            };
            let x = if plus { x } else { -x };
            log_deriv += map.apply_deriv(x).abs().ln();
            bucket_counts[r - 1] += 1;
            envelope[r - 1] = envelope[r - 1].min(log_deriv);
            current = x;
        }
    }
    if let Some(r) = bucket_counts.iter().position(|&c| c < MIN_BUCKET) {
        return Err(Error::InsufficientSamples(format!(
            "bucket r = {} holds {} orbits, need {MIN_BUCKET}",
            r + 1,
            bucket_counts[r]
        )));
    }
    let points: Vec<(f64, f64)> = envelope.iter().enumerate().map(|(i, &m)| ((i + 1) as f64, m)).collect();
    let slope = least_squares_slope(&points);
    let ln_c = points.iter().map(|(r, m)| m - r * slope).fold(f64::INFINITY, f64::min);
    Ok(ManeEstimate {
        u,
        r_max,
        samples,
        seed,
        bucket_counts,
        envelope,
        c_hat: ln_c.exp(),
        lambda_hat: slope.exp(),
    })
}

/// The preimage of `y <= f(0)` in `[0, 1]`.
fn positive_preimage(map: &UnimodalMap, y: f64) -> f64 {
    if let Some(t) = map.t() {
        let alpha = map.alpha();
        let base = ((2.0 * t - 1.0 - y) / (2.0 * t)).clamp(0.0, 1.0);
        return if alpha == 2.0 { base.sqrt() } else { base.powf(1.0 / alpha) };
    }
    // f decreases from f(0) to -1 on [0, 1].
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if map.apply(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
