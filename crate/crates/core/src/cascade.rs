//! Nice points, first return maps and the cascade of central intervals.
//!
//! Starting from a nice point `u_1`, each level replaces `U_n = (-u_n, u_n)`
//! by the central branch `(-u_{n+1}, u_{n+1})` of the first return map to
//! `U_n`. The return time of that branch is `q_n`, the scaling factor is
//! `sigma_n = u_{n+1} / u_n`, and level `n` has a central return when
//! `|f^{q_n}(0)| < u_{n+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hyp_length, image_space, measured_distortion, Interval};
use crate::maps::{ReferenceOrbit, UnimodalMap};

/// Tolerance for `|f^q(u_{n+1})| = u_n` and for snapping orbits onto known
/// nice points.
pub const FOLD_TOL: f64 = 1e-10;

/// Tolerance for the endpoint images of monotone branches.
pub const BRANCH_TOL: f64 = 1e-9;

/// `|f^q(0)|` within this distance of `u_{n+1}` is a boundary central return.
pub const TIE_TOL: f64 = 1e-12;

pub(crate) const PSI_START: f64 = 1e-12;
const PSI_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum number of central levels `u_1, ..., u_depth`.
    pub depth: usize,
    pub return_time: usize,
    /// Iterates inspected when verifying a nice point.
    pub nice_check: usize,
    /// Grid size for branch enumeration.
    pub grid: usize,
    /// Levels with `u_n` below this are not recorded.
    pub u_floor: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self { depth: 12, return_time: 1_000_000, nice_check: 10_000, grid: 4096, u_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstReturn {
    Returns(usize),
    NoReturn(usize),
}

impl FirstReturn {
    pub fn time(self) -> Option<usize> {
        match self {
            FirstReturn::Returns(j) => Some(j),
            FirstReturn::NoReturn(_) => None,
        }
    }
}

/// Smallest `j` in `[1, cap]` with `|f^j(x)| < u`.
fn return_time(map: &UnimodalMap, x: f64, u: f64, cap: usize) -> Option<usize> {
    let mut y = x;
    for j in 1..=cap {
        y = map.apply(y);
        if y.abs() < u {
            return Some(j);
        }
    }
    None
}

/// First return time of `x` to the symmetric interval `window`.
pub fn first_return_time(map: &UnimodalMap, x: f64, window: &Interval, cap: usize) -> Result<FirstReturn> {
    if (window.lo + window.hi).abs() > 1e-15 {
        return Err(Error::Domain("return window must be symmetric about 0".into()));
    }
    if !(window.lo <= x && x <= window.hi) {
        return Err(Error::Domain(format!("x = {x} outside the return window")));
    }
    if cap == 0 {
        return Err(Error::Domain("return-time cap must be at least 1".into()));
    }
    Ok(match return_time(map, x, window.hi, cap) {
        Some(j) => FirstReturn::Returns(j),
        None => FirstReturn::NoReturn(cap),
    })
}

/// Outcome of one central step `u_n -> u_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiStep {
    pub u_next: f64,
    /// Return time of the central branch.
    pub q: usize,
    /// `f^q(0)`.
    pub critical_return: f64,
    pub central: bool,
    /// `|f^q(0)|` agrees with `u_next` to within `TIE_TOL`.
    pub tie: bool,
    /// The central branch is all of `(-u, u)`, so `f^q` restricted to it is a
    /// unimodal map; `u_next` is then its orientation-reversing fixed point.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub renormalization: bool,
}

/// Central branch of the first return map to `(-u, u)`.
pub fn psi_step(map: &UnimodalMap, u: f64, caps: &Caps) -> Result<PsiStep> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
    }
    let mut crit = Vec::new();
    let mut x = 0.0;
    let mut q = None;
    for j in 1..=caps.return_time {
        x = map.apply(x);
        crit.push(x);
        if x.abs() < u {
            q = Some(j);
            break;
        }
    }
    let q = q.ok_or(Error::NonRecurrent { u, cap: caps.return_time })?;
    let critical_return = crit[q - 1];

    // On (0, u_next) the iterates f^i(y), 0 < i < q, keep the signs of
    // f^i(0); Df(y) < 0 for y > 0.
    let reference = crit[..q - 1].iter().fold(true, |neg, &z| if z > 0.0 { !neg } else { neg });

    let reference_orbit = ReferenceOrbit::from_iterates(map, &crit);
    if let Some(step) = renormalization_step(&reference_orbit, &crit, u, q, caps)? {
        return Ok(step);
    }
    let inside = |y: f64| -> bool {
        let mut neg = true;
        let mut ok = true;
        let last = reference_orbit.trace(y, q, |j, x| {
            if j < q {
                if x.abs() < u || x == 0.0 {
                    ok = false;
                    return false;
                }
                if x > 0.0 {
                    neg = !neg;
                }
            }
            true
        });
        ok && last.abs() < u && neg == reference
    };

    let mut lo = 0.0;
    let mut hi = PSI_START;
    while hi < u && inside(hi) {
        lo = hi;
        hi *= 2.0;
    }
    if hi >= u {
        hi = u;
        if inside(hi) {
            return Err(Error::BisectionFailure(format!("central branch of (-{u}, {u}) is not bracketed")));
        }
    }
    for _ in 0..400 {
        if hi - lo <= PSI_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fold_error = |y: f64| (reference_orbit.iterate(y, q).abs() - u).abs();
    if lo == 0.0 && fold_error(hi) > FOLD_TOL {
        // No point of (0, PSI_START) was found inside the branch.
        return Err(Error::Underflow { u, below: PSI_START.min(u) });
    }
    let u_next = if lo > 0.0 && fold_error(lo) <= fold_error(hi) { lo } else { hi };

    // The orbit f(u_next), ..., f^{q-1}(u_next) avoids U_n and f^q(u_next) = +-u.
    let mut entered = None;
    let folded = reference_orbit
        .trace(u_next, q, |j, x| {
            if j < q && x.abs() < u - FOLD_TOL {
                entered = Some(j);
                return false;
            }
            true
        })
        .abs();
    if let Some(i) = entered {
        return Err(Error::BisectionFailure(format!(
            "iterate {i} of the central boundary {u_next} enters (-{u}, {u})"
        )));
    }
    if (folded - u).abs() > FOLD_TOL {
        return Err(Error::BisectionFailure(format!("|f^{q}({u_next})| = {folded} differs from u = {u}")));
    }

    let tie = (critical_return.abs() - u_next).abs() <= TIE_TOL;
    Ok(PsiStep {
        u_next,
        q,
        critical_return,
        central: critical_return.abs() < u_next || tie,
        tie,
        renormalization: false,
    })
}

/// Handles the case where `f^i([0, u])` avoids `(-u, u)` for `0 < i < q`.
///
/// Then `g = f^q` maps `(-u, u)` into itself with `g(+-u) = s u`. If `g(0)`
/// lies on the other side of 0 the next level is the root of `g(y) = -s y`
/// in `(0, u)`, a periodic and therefore nice point; otherwise the critical
/// orbit stays on one side and converges, and the step reports no return.
fn renormalization_step(
    orbit: &ReferenceOrbit<'_>,
    crit: &[f64],
    u: f64,
    q: usize,
    caps: &Caps,
) -> Result<Option<PsiStep>> {
    let mut whole = true;
    let end = orbit.trace(u, q, |j, x| {
        if j < q {
            let c = crit[j - 1];
            if c.abs() < u || x.abs() < u - FOLD_TOL || (c > 0.0) != (x > 0.0) {
                whole = false;
                return false;
            }
        }
        true
    });
    if !whole || (end.abs() - u).abs() > FOLD_TOL {
        return Ok(None);
    }
    let s = end.signum();
    let critical_return = crit[q - 1];
    if s * critical_return >= 0.0 {
        return Err(Error::NonRecurrent { u, cap: caps.return_time });
    }
    let h = |y: f64| s * orbit.iterate(y, q) + y;
    let (mut lo, mut hi) = (0.0, u);
    for _ in 0..400 {
        if hi - lo <= PSI_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u_next = if h(lo).abs() <= h(hi).abs() && lo > 0.0 { lo } else { hi };
    let folded = orbit.iterate(u_next, q).abs();
    if (folded - u_next).abs() > FOLD_TOL {
        return Err(Error::BisectionFailure(format!(
            "|f^{q}({u_next})| = {folded} is not a fixed point of the renormalization"
        )));
    }
    let tie = (critical_return.abs() - u_next).abs() <= TIE_TOL;
    Ok(Some(PsiStep {
        u_next,
        q,
        critical_return,
        central: critical_return.abs() < u_next || tie,
        tie,
        renormalization: true,
    }))
}

/// Checks that the forward orbit of `u` avoids `(-u, u)`.
///
/// The orbit is followed for at most `steps` iterates; it is accepted early
/// when it lands (within `FOLD_TOL`) on `+-v` for some `v >= u` in `known`,
/// each of which must itself be nice, on `u` itself, or on the fixed point
/// `-1`.
pub fn verify_nice_point(map: &UnimodalMap, u: f64, known: &[f64], steps: usize) -> Result<()> {
    verify_nice_point_along(&ReferenceOrbit::new(map, 0), u, known, steps)
}

fn verify_nice_point_along(orbit: &ReferenceOrbit<'_>, u: f64, known: &[f64], steps: usize) -> Result<()> {
    let slack = FOLD_TOL.min(1e-6 * u);
    let mut verdict = Ok(());
    orbit.trace(u, steps, |i, x| {
        let a = x.abs();
        let snapped = a == 1.0
            || (a - u).abs() <= FOLD_TOL
            || known.iter().any(|&v| v >= u && (a - v).abs() <= FOLD_TOL);
        if snapped {
            return false;
        }
        if a < u - slack {
            verdict = Err(Error::NotNicePoint { u, index: i });
            return false;
        }
        true
    });
    verdict
}

/// Nice-point verification of every level of a cascade, following orbits of
/// the small `u_n` along the critical orbit.
pub fn verify_cascade_nice_points(map: &UnimodalMap, cascade: &CentralCascade, steps: usize) -> Result<()> {
    let longest = cascade.q.iter().copied().max().unwrap_or(0);
    let orbit = ReferenceOrbit::new(map, longest.min(steps));
    let mut known: Vec<f64> = map.fixed_point_positive().ok().into_iter().collect();
    for &u in &cascade.u {
        verify_nice_point_along(&orbit, u, &known, steps)?;
        known.push(u);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    DepthReached,
    NonRecurrent,
    UnderflowCap,
    ReturnTimeCap,
}

/// Nested central intervals of one map.
///
/// `u[i]` is `u_{i+1}`; `q`, `sigma` and `central_return` are indexed by
/// level as well and have one entry fewer than `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralCascade {
    pub t: Option<f64>,
    pub alpha: f64,
    pub u: Vec<f64>,
    pub q: Vec<usize>,
    pub sigma: Vec<f64>,
    pub central_return: Vec<bool>,
    pub termination: Termination,
    /// Levels whose central return was decided within `TIE_TOL`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<usize>,
    /// Levels `n` whose step was a renormalization, see `PsiStep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub renormalized: Vec<usize>,
    /// The next central boundary when it fell below the underflow floor.
    /// `None` with `UnderflowCap` means the boundary lies below
    /// `1e-12` but could not be resolved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub underflow: Option<f64>,
}

impl CentralCascade {
    /// Number of recorded levels `u_1, ..., u_depth`.
    pub fn depth(&self) -> usize {
        self.u.len()
    }

    /// `u_n` for 1-based `n`.
    pub fn u_level(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.u.get(i)).copied()
    }

    /// `sigma_n` for 1-based `n`.
    pub fn sigma_level(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.sigma.get(i)).copied()
    }

    pub fn n_central_returns(&self) -> usize {
        self.central_return.iter().filter(|c| **c).count()
    }

    /// Deepest level `n` with `|x| < u_n`, 0 when outside `U_1`.
    pub fn level_of(&self, x: f64) -> usize {
        let a = x.abs();
        self.u.partition_point(|&u| a < u)
    }
}

/// Builds `u_1, u_2 = psi(u_1), ...` until a cap or non-recurrence stops it.
///
/// `u_1` defaults to the positive fixed point.
pub fn build_cascade(map: &UnimodalMap, u1: Option<f64>, caps: &Caps) -> Result<CentralCascade> {
    let fixed = map.fixed_point_positive().ok();
    let u1 = match u1 {
        Some(u) => u,
        None => fixed.ok_or(Error::NoFixedPoint)?,
    };
    if !(u1 > 0.0 && u1 < 1.0) {
        return Err(Error::Domain(format!("u_1 = {u1} outside (0, 1)")));
    }
    let mut known: Vec<f64> = fixed.into_iter().collect();
    verify_nice_point(map, u1, &known, caps.nice_check)?;
    known.push(u1);

    let mut cascade = CentralCascade {
        t: map.t(),
        alpha: map.alpha(),
        u: vec![u1],
        q: Vec::new(),
        sigma: Vec::new(),
        central_return: Vec::new(),
        termination: Termination::DepthReached,
        ties: Vec::new(),
        renormalized: Vec::new(),
        underflow: None,
    };
    loop {
        if cascade.u.len() >= caps.depth {
            cascade.termination = Termination::DepthReached;
            break;
        }
        let u = *cascade.u.last().unwrap();
        let step = match psi_step(map, u, caps) {
            Ok(step) => step,
            Err(Error::NonRecurrent { .. }) => {
                cascade.termination = if critical_orbit_settles(map, caps.return_time) {
                    Termination::NonRecurrent
                } else {
                    Termination::ReturnTimeCap
                };
                break;
            }
            Err(Error::Underflow { .. }) => {
                cascade.termination = Termination::UnderflowCap;
                break;
            }
            Err(e) => return Err(e),
        };
        if step.u_next < caps.u_floor {
            cascade.termination = Termination::UnderflowCap;
            cascade.underflow = Some(step.u_next);
            break;
        }
        known.push(step.u_next);
        if step.tie {
            cascade.ties.push(cascade.u.len());
        }
        if step.renormalization {
            cascade.renormalized.push(cascade.u.len());
        }
        cascade.q.push(step.q);
        cascade.sigma.push(step.u_next / u);
        cascade.central_return.push(step.central);
        cascade.u.push(step.u_next);
    }
    Ok(cascade)
}

/// Whether the critical orbit ends on a cycle of period at most 64.
fn critical_orbit_settles(map: &UnimodalMap, steps: usize) -> bool {
    const WINDOW: usize = 64;
    let mut ring = [f64::NAN; WINDOW + 1];
    let mut x = 0.0;
    for j in 0..steps.max(WINDOW + 1) {
        x = map.apply(x);
        ring[j % (WINDOW + 1)] = x;
    }
    let last = steps.max(WINDOW + 1) - 1;
    (1..=WINDOW).any(|p| (ring[(last - p) % (WINDOW + 1)] - x).abs() <= 1e-12)
}

/// Re-checks the structure of a cascade: nestedness, `sigma_n` in `(0, 1)`,
/// nondecreasing return times, the return and central-return conditions on
/// `f^{q_n}(0)`, folding of the central branch onto `+-u_n`, and niceness of
/// every `u_n`.
pub fn verify_cascade(map: &UnimodalMap, cascade: &CentralCascade, caps: &Caps) -> Result<()> {
    let fail = |msg: String| Err(Error::DegenerateConfiguration(msg));
    let levels = cascade.q.len();
    if cascade.sigma.len() != levels
        || cascade.central_return.len() != levels
        || cascade.u.len() != levels + 1
    {
        return fail("cascade sequences have inconsistent lengths".into());
    }
    for w in cascade.q.windows(2) {
        if w[1] < w[0] {
            return fail(format!("return times {} then {} decrease", w[0], w[1]));
        }
    }
    let longest = cascade.q.iter().copied().max().unwrap_or(0);
    let mut crit = Vec::with_capacity(longest);
    let mut x = 0.0;
    for _ in 0..longest {
        x = map.apply(x);
        crit.push(x);
    }
    let orbit = ReferenceOrbit::from_iterates(map, &crit);
    for n in 0..levels {
        let (u, v, q) = (cascade.u[n], cascade.u[n + 1], cascade.q[n]);
        if !(0.0 < v && v < u) {
            return fail(format!("u_{} = {v} not inside (0, u_{} = {u})", n + 2, n + 1));
        }
        let sigma = cascade.sigma[n];
        if !(sigma > 0.0 && sigma < 1.0) || (sigma - v / u).abs() > 1e-15 {
            return fail(format!("sigma_{} = {sigma} inconsistent", n + 1));
        }
        let ret = crit[q - 1];
        if ret.abs() >= u || crit[..q - 1].iter().any(|c| c.abs() < u) {
            return fail(format!("q_{} = {q} is not the first return of 0", n + 1));
        }
        let tie = cascade.ties.contains(&(n + 1));
        if cascade.central_return[n] != (ret.abs() < v || tie) {
            return fail(format!("central-return flag of level {} is wrong", n + 1));
        }
        let boundary = if cascade.renormalized.contains(&(n + 1)) { u } else { v };
        let folded = orbit.iterate(boundary, q).abs();
        if (folded - u).abs() > FOLD_TOL {
            return fail(format!("|f^{q}({boundary})| = {folded} differs from u_{} = {u}", n + 1));
        }
    }
    verify_cascade_nice_points(map, cascade, caps.nice_check)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchKind {
    Monotone,
    Central,
}

/// One component of the domain of the first return map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnBranch {
    pub interval: Interval,
    pub return_time: usize,
    pub kind: BranchKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSet {
    pub u: f64,
    /// Sorted by left endpoint.
    pub branches: Vec<ReturnBranch>,
    /// Some grid points did not return within the cap.
    pub cap_exceeded: bool,
    pub unresolved_points: usize,
    /// Candidate runs discarded because their endpoints failed validation.
    pub rejected: usize,
}

impl BranchSet {
    pub fn central(&self) -> Option<&ReturnBranch> {
        self.branches.iter().find(|b| b.kind == BranchKind::Central)
    }

    /// `max hyp(I, U)` over the branches.
    pub fn max_hyp(&self) -> Option<f64> {
        let window = Interval::symmetric(self.u).ok()?;
        self.branches
            .iter()
            .filter_map(|b| hyp_length(&b.interval, &window).ok())
            .fold(None, |acc: Option<f64>, h| Some(acc.map_or(h, |a| a.max(h))))
    }
}

/// First return time of `y` to `(-u, u)` within `cap` iterates.
fn sample(orbit: &ReferenceOrbit<'_>, y: f64, u: f64, cap: usize) -> Option<usize> {
    let mut time = None;
    orbit.trace(y, cap, |j, x| {
        if x.abs() < u {
            time = Some(j);
            return false;
        }
        true
    });
    time
}

/// Enumerates branches of the first return map to `(-u, u)` with return
/// time at most `caps.return_time`, from a scan of `caps.grid` points.
///
/// Branches narrower than the grid spacing may be missed.
pub fn return_branches(map: &UnimodalMap, u: f64, caps: &Caps) -> Result<BranchSet> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
    }
    let cap = caps.return_time;
    let grid = caps.grid.max(8);
    let h = 2.0 * u / grid as f64;
    let ys: Vec<f64> = (0..grid).map(|i| -u + (i as f64 + 0.5) * h).collect();
    let reference_orbit = ReferenceOrbit::new(map, cap.min(1 << 20));
    let samples: Vec<Option<usize>> = ys.iter().map(|&y| sample(&reference_orbit, y, u, cap)).collect();
    let unresolved_points = samples.iter().filter(|s| s.is_none()).count();

    let mut branches = Vec::new();
    let mut rejected = 0;

    let central = match psi_step(map, u, caps) {
        Ok(step) => Some(step),
        Err(Error::NonRecurrent { .. }) => None,
        Err(e) => return Err(e),
    };
    // Under renormalization the central branch is the whole window.
    let v = central.map_or(0.0, |c| if c.renormalization { u } else { c.u_next });
    if let Some(c) = central {
        branches.push(ReturnBranch {
            interval: Interval::symmetric(v)?,
            return_time: c.q,
            kind: BranchKind::Central,
        });
    }

    // Maximal runs of grid points lying in a common branch.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..grid {
        let s = samples[i];
        let usable = s.is_some() && ys[i].abs() >= v;
        let continues = |a: usize| {
            let p = samples[i - 1];
            usable
                && i > a
                && p == s
                && (ys[i - 1] < 0.0) == (ys[i] < 0.0)
                && same_branch(&reference_orbit, &path(&reference_orbit, ys[i - 1], p.unwrap()), ys[i], u)
        };
        match start {
            Some(a) if continues(a) => {}
            Some(a) => {
                runs.push((a, i - 1));
                start = usable.then_some(i);
            }
            None => start = usable.then_some(i),
        }
    }
    if let Some(a) = start {
        runs.push((a, grid - 1));
    }

    for (a, b) in runs {
        let tau = samples[a].unwrap();
        let anchor = path(&reference_orbit, ys[a], tau);
        let member = |y: f64| same_branch(&reference_orbit, &anchor, y, u);
        let positive_side = ys[a] > 0.0;
        let left_out = if a > 0 { ys[a - 1] } else { -u };
        let left_out = if positive_side { left_out.max(v) } else { left_out };
        let right_out = if b + 1 < grid { ys[b + 1] } else { u };
        let right_out = if positive_side { right_out } else { right_out.min(-v) };
        let lo = refine(left_out, ys[a], member);
        let hi = refine(right_out, ys[b], member);
        let Ok(interval) = Interval::new(lo, hi) else {
            rejected += 1;
            continue;
        };
        let f_lo = reference_orbit.iterate(lo, tau);
        let f_hi = reference_orbit.iterate(hi, tau);
        let onto = (f_lo.abs() - u).abs() <= BRANCH_TOL
            && (f_hi.abs() - u).abs() <= BRANCH_TOL
            && f_lo.signum() != f_hi.signum();
        if onto {
            branches.push(ReturnBranch { interval, return_time: tau, kind: BranchKind::Monotone });
        } else {
            rejected += 1;
        }
    }
    branches.sort_by(|x, y| x.interval.lo.total_cmp(&y.interval.lo));

    Ok(BranchSet { u, branches, cap_exceeded: unresolved_points > 0, unresolved_points, rejected })
}

/// `f^1(y), ..., f^tau(y)`.
fn path(orbit: &ReferenceOrbit<'_>, y: f64, tau: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(tau);
    orbit.trace(y, tau, |_, x| {
        out.push(x);
        true
    });
    out
}

/// Whether `y` lies in the branch of time `anchor.len()` whose orbit is
/// `anchor`: for `j` below the return time, `f^j(y)` is on the side of
/// `f^j` of the anchor and outside `(-u, u)`, and `f^tau(y)` is in `(-u, u)`.
/// Since the images of the segment between the two points then avoid the
/// critical point, they are intervals spanned by the two orbits.
fn same_branch(orbit: &ReferenceOrbit<'_>, anchor: &[f64], y: f64, u: f64) -> bool {
    let tau = anchor.len();
    let mut ok = true;
    let last = orbit.trace(y, tau, |j, x| {
        if j < tau {
            let c = anchor[j - 1];
            if x.abs() < u || (x > 0.0) != (c > 0.0) {
                ok = false;
                return false;
            }
        }
        true
    });
    ok && last.abs() < u
}

/// Bisection between `outside` (predicate false) and `inside` (true);
/// returns the last point known to satisfy the predicate.
fn refine(mut outside: f64, mut inside: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Monotone extension of `f^{tau-1}` around `f(I)` for a branch `I` of time
/// `tau`, pulled back from `(-outer, outer)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchExtension {
    /// `f(I)`.
    pub domain: Interval,
    /// Component of the pull-back of `(-outer, outer)` containing `f(I)`.
    pub extension: Interval,
    pub iterate: usize,
    pub domain_image: Interval,
    pub extension_image: Interval,
    /// `min(|g L|, |g R|) / |g(f(I))|` for the image components `L`, `R`.
    pub space: f64,
}

impl BranchExtension {
    /// Grid distortion of `f^{tau-1}` on `f(I)`.
    pub fn distortion(&self, map: &UnimodalMap, grid: usize) -> Result<f64> {
        measured_distortion(map, self.iterate, &self.domain, grid)
    }
}

/// Extends `f^{tau-1}` monotonically beyond `f(I)` until its image covers
/// `(-outer, outer)`. Fails with `NotMonotone` if a turning point comes first.
pub fn branch_extension(map: &UnimodalMap, branch: &ReturnBranch, outer: f64) -> Result<BranchExtension> {
    let n = branch.return_time - 1;
    let iv = branch.interval;
    let domain = match branch.kind {
        BranchKind::Central => Interval::hull(map.apply(iv.hi), map.apply(0.0))?,
        BranchKind::Monotone => Interval::hull(map.apply(iv.lo), map.apply(iv.hi))?,
    };
    let g = |y: f64| map.iterate(y, n);
    let orientation = map.log_deriv(domain.midpoint(), n)?.negative;
    let dir = if orientation { -1.0 } else { 1.0 };

    let check = |y: f64| -> Result<()> {
        let d = map.log_deriv(y, n).map_err(|_| Error::NotMonotone(format!("turning point near {y}")))?;
        if d.negative != orientation {
            return Err(Error::NotMonotone(format!("turning point before {y}")));
        }
        Ok(())
    };

    let mut ends = [0.0; 2];
    for (k, side) in [-1.0, 1.0].into_iter().enumerate() {
        let mut y0 = if side < 0.0 { domain.lo } else { domain.hi };
        let mut v0 = g(y0);
        let mut step = domain.len() / 16.0;
        let mut found = None;
        for _ in 0..10_000 {
            let y1 = (y0 + side * step).clamp(-1.0, 1.0);
            check(y1)?;
            let v1 = g(y1);
            if side * dir * (v1 - v0) <= 0.0 {
                return Err(Error::NotMonotone(format!("image folds back near {y1}")));
            }
            if v1.abs() >= outer {
                found = Some(refine(y1, y0, |y| g(y).abs() < outer));
                break;
            }
            if y1.abs() >= 1.0 {
                return Err(Error::DegenerateConfiguration(
                    "extension reaches the boundary of [-1, 1]".into(),
                ));
            }
            y0 = y1;
            v0 = v1;
            step *= 1.25;
        }
        ends[k] = found.ok_or_else(|| Error::DegenerateConfiguration("extension did not close".into()))?;
    }
    let extension = Interval::new(ends[0], ends[1])?;
    let domain_image = Interval::hull(g(domain.lo), g(domain.hi))?;
    let extension_image = Interval::hull(g(extension.lo), g(extension.hi))?;
    Ok(BranchExtension {
        domain,
        extension,
        iterate: n,
        domain_image,
        extension_image,
        space: image_space(&domain_image, &extension_image),
    })
}
