use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ergodic::lyapunov;
use super::summability::{scaling_summability, summability, Verdict};
use crate::cascade::{build_cascade, Caps, CentralCascade, Termination};
use crate::maps::UnimodalMap;

/// Largest period searched for an attracting cycle.
pub const MAX_ATTRACTOR_PERIOD: usize = 64;
const RECURRENCE_TOL: f64 = 1e-9;
const NEWTON_TOL: f64 = 1e-12;
const RENORM_SCAN: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicAttractor {
    pub period: usize,
    pub multiplier: f64,
    /// A point of the polished cycle.
    pub point: f64,
}

/// Attracting cycle of period at most 64 that the critical orbit settles on.
pub fn detect_periodic_attractor(map: &UnimodalMap, budget: usize) -> Option<PeriodicAttractor> {
    let budget = budget.max(MAX_ATTRACTOR_PERIOD + 1);
    let mut tail = Vec::with_capacity(MAX_ATTRACTOR_PERIOD + 1);
    let mut x = 0.0;
    for j in 0..budget {
        x = map.apply(x);
        if j + MAX_ATTRACTOR_PERIOD + 1 >= budget {
            tail.push(x);
        }
    }
    let last = *tail.last()?;
    let period =
        (1..=MAX_ATTRACTOR_PERIOD).find(|&p| (tail[tail.len() - 1 - p] - last).abs() <= RECURRENCE_TOL)?;
    let point = polish_cycle(map, last, period)?;
    let mut multiplier = 1.0;
    let mut y = point;
    for _ in 0..period {
        multiplier *= map.apply_deriv(y);
        y = map.apply(y);
    }
    // Normalizes -0.0 for superattracting cycles.
    let multiplier = multiplier + 0.0;
    (multiplier.abs() < 1.0).then_some(PeriodicAttractor { period, multiplier, point })
}

/// Newton iteration on `f^p(x) = x`.
fn polish_cycle(map: &UnimodalMap, mut x: f64, p: usize) -> Option<f64> {
    for _ in 0..100 {
        let mut y = x;
        let mut d = 1.0;
        for _ in 0..p {
            d *= map.apply_deriv(y);
            y = map.apply(y);
        }
        let g = y - x;
        if g.abs() <= NEWTON_TOL {
            return Some(x);
        }
        let slope = d - 1.0;
        if slope == 0.0 || !slope.is_finite() {
            return None;
        }
        let next = (x - g / slope).clamp(-1.0, 1.0);
        if next == x {
            return (g.abs() <= 1e3 * NEWTON_TOL).then_some(x);
        }
        x = next;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Renormalization {
    /// Periods of the successive renormalizations.
    pub periods: Vec<usize>,
    /// Half-widths of the restrictive intervals `(-x, x)`.
    pub widths: Vec<f64>,
}

impl Renormalization {
    pub fn count(&self) -> usize {
        self.periods.len()
    }
}

/// Nested restrictive intervals around the critical point.
///
/// At each level with return map `g = f^P` on `(-w, w)`, the smallest `p` in
/// `2..=p_max` is sought for which some `x` in `(0, w]` with `|g^p(x)| = x`
/// bounds an interval `J = (-x, x)` such that `g^i(J)`, `0 <= i < p`, are
/// pairwise disjoint and `g^p(J)` lies in `J`, and whose boundary cycle is
/// repelling.
pub fn detect_renormalization(map: &UnimodalMap, p_max: usize, nest_max: usize) -> Renormalization {
    let mut out = Renormalization { periods: Vec::new(), widths: Vec::new() };
    let Ok(mut width) = map.fixed_point_positive() else {
        return out;
    };
    let mut period = 1;
    while out.count() < nest_max {
        let g = |x: f64| map.iterate(x, period);
        let found = (2..=p_max.max(2)).find_map(|p| {
            restrictive_candidates(&g, p, width)
                .into_iter()
                .find(|&x| is_restrictive(&g, p, x) && repelling(map, x, period * p))
                .map(|x| (p, x))
        });
        let Some((p, x)) = found else { break };
        period *= p;
        width = x;
        out.periods.push(p);
        out.widths.push(x);
    }
    out
}

fn repelling(map: &UnimodalMap, x: f64, n: usize) -> bool {
    map.log_deriv(x, n).is_ok_and(|d| d.log_abs > 0.0)
}

/// Solutions of `|g^p(x)| = x` in `(0, w]`, largest first.
fn restrictive_candidates(g: &impl Fn(f64) -> f64, p: usize, w: f64) -> Vec<f64> {
    let gp = |x: f64| (0..p).fold(x, |y, _| g(y));
    let h = |x: f64| gp(x).abs() - x;
    let mut roots = Vec::new();
    if h(w).abs() <= 1e-12 {
        roots.push(w);
    }
    let step = w / RENORM_SCAN as f64;
    let mut b = w;
    let mut hb = h(b);
    for i in (0..RENORM_SCAN).rev() {
        let a = i as f64 * step;
        let ha = h(a);
        if ha == 0.0 && a > 0.0 {
            roots.push(a);
        } else if (ha < 0.0) != (hb < 0.0) && hb != 0.0 {
            let (mut lo, mut hi, mut hlo) = (a, b, ha);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let hm = h(mid);
                if (hm < 0.0) == (hlo < 0.0) {
                    lo = mid;
                    hlo = hm;
                } else {
                    hi = mid;
                }
            }
            let x = 0.5 * (lo + hi);
            if x > 0.0 {
                roots.push(x);
            }
        }
        b = a;
        hb = ha;
    }
    roots
}

fn is_restrictive(g: &impl Fn(f64) -> f64, p: usize, x: f64) -> bool {
    let slack = 1e-10 * x;
    let mut images = vec![(-x, x)];
    let (mut a, mut b) = (0.0, x);
    for i in 1..=p {
        a = g(a);
        b = g(b);
        if i == p {
            return a.abs() <= x + slack && (b.abs() - x).abs() <= slack;
        }
        // The image of [0, x] must avoid the critical point and J.
        if (a > 0.0) != (b > 0.0) || a.abs() < x - slack || b.abs() < x - slack {
            return false;
        }
        let image = (a.min(b), a.max(b));
        if images.iter().any(|&(lo, hi)| image.0 < hi - slack && lo + slack < image.1) {
            return false;
        }
        images.push(image);
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum ClassLabel {
    P {
        period: usize,
        multiplier: f64,
    },
    R {
        renorm_count: usize,
    },
    #[serde(rename = "I_unknown")]
    IUnknown,
    #[serde(rename = "M_candidate")]
    MCandidate,
    NonRecurrent,
    Budget,
}

impl ClassLabel {
    pub fn name(&self) -> &'static str {
        match self {
            ClassLabel::P { .. } => "P",
            ClassLabel::R { .. } => "R",
            ClassLabel::IUnknown => "I_unknown",
            ClassLabel::MCandidate => "M_candidate",
            ClassLabel::NonRecurrent => "NonRecurrent",
            ClassLabel::Budget => "Budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyBudget {
    /// Critical-orbit iterates for the attractor search.
    pub iterates: usize,
    pub caps: Caps,
    pub p_max: usize,
    pub nest_max: usize,
    pub nest_threshold: usize,
    pub kmax: usize,
    pub lyapunov_iters: usize,
    pub lyapunov_burn_in: usize,
    pub seed: u64,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        Self {
            iterates: 100_000,
            caps: Caps { return_time: 100_000, ..Caps::default() },
            p_max: 8,
            nest_max: 6,
            nest_threshold: 3,
            kmax: 2000,
            lyapunov_iters: 100_000,
            lyapunov_burn_in: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub t: Option<f64>,
    pub label: ClassLabel,
    pub renorm_count: usize,
    pub cascade: Option<CentralCascade>,
    pub n_central_returns: usize,
    pub depth_reached: usize,
    pub sigma_last: Option<f64>,
    pub scaling_sum: Option<f64>,
    pub scaling_verdict: Option<Verdict>,
    pub summability_partial: Option<f64>,
    pub summability_verdict: Option<Verdict>,
    pub lyapunov: Option<f64>,
    pub nest_threshold: usize,
    pub seed: u64,
}

/// Assigns one of the labels P, R, M_candidate, NonRecurrent, I_unknown or
/// Budget, testing in that order of precedence.
pub fn classify(map: &UnimodalMap, budget: &ClassifyBudget) -> Classification {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let x0: f64 = rng.gen_range(-1.0..1.0);
    let mut out = Classification {
        t: map.t(),
        label: ClassLabel::Budget,
        renorm_count: 0,
        cascade: None,
        n_central_returns: 0,
        depth_reached: 0,
        sigma_last: None,
        scaling_sum: None,
        scaling_verdict: None,
        summability_partial: None,
        summability_verdict: None,
        lyapunov: lyapunov(map, x0, budget.lyapunov_iters.max(10_000), budget.lyapunov_burn_in).ok(),
        nest_threshold: budget.nest_threshold,
        seed: budget.seed,
    };

    if let Some(a) = detect_periodic_attractor(map, budget.iterates) {
        out.label = ClassLabel::P { period: a.period, multiplier: a.multiplier };
        return out;
    }
    let renorm = detect_renormalization(map, budget.p_max, budget.nest_max);
    out.renorm_count = renorm.count();
    if renorm.count() >= budget.nest_threshold {
        out.label = ClassLabel::R { renorm_count: renorm.count() };
        return out;
    }

    let summable = match summability(map, budget.kmax.max(10)) {
        Ok(report) => {
            out.summability_partial = Some(report.last());
            out.summability_verdict = Some(report.verdict);
            report.verdict == Verdict::ConvergentLooking
        }
        Err(_) => false,
    };
    let cascade = match build_cascade(map, None, &budget.caps) {
        Ok(c) => c,
        Err(_) => return out,
    };
    out.n_central_returns = cascade.n_central_returns();
    out.depth_reached = cascade.depth();
    out.sigma_last = cascade.sigma.last().copied();
    let scaling = (cascade.depth() >= 2).then(|| scaling_summability(&cascade, map.alpha()));
    out.scaling_sum = scaling.as_ref().map(|s| s.sum);
    out.scaling_verdict = scaling.as_ref().map(|s| s.verdict);
    let termination = cascade.termination;
    out.cascade = Some(cascade);

    out.label = match termination {
        Termination::ReturnTimeCap => ClassLabel::Budget,
        Termination::NonRecurrent if summable => ClassLabel::MCandidate,
        Termination::NonRecurrent => ClassLabel::NonRecurrent,
        Termination::DepthReached | Termination::UnderflowCap => {
            let scaling_ok = scaling.is_some_and(|s| s.verdict == Verdict::ConvergentLooking);
            if scaling_ok || summable {
                ClassLabel::MCandidate
            } else {
                ClassLabel::IUnknown
            }
        }
    };
    out
}
