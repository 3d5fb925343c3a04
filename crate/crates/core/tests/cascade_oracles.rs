use unimodal::cascade::{
    branch_extension, build_cascade, first_return_time, psi_step, return_branches, verify_cascade,
    BranchKind, Caps, FirstReturn, Termination,
};
use unimodal::geometry::{koebe_bound, measured_distortion, Interval};
use unimodal::maps::UnimodalMap;

mod common;
use common::{feigenbaum_parameter, T_F};

fn q(t: f64) -> UnimodalMap {
    UnimodalMap::quadratic(t).unwrap()
}

fn naive_return(t: f64, x: f64, u: f64, cap: usize) -> Option<usize> {
    let mut y = x;
    for j in 1..=cap {
        y = (2.0 * t - 1.0) - 2.0 * t * y * y;
        if y.abs() < u {
            return Some(j);
        }
    }
    None
}

// Frozen from `naive_return` and `grid_scan_psi` below.
const Q1_AT_095: usize = 3;
const U2_AT_095: f64 = 0.161_751_628_847_453_1;

/// Scans `y` on a uniform grid for the first sign change of
/// `|f^q(y)| - u` with no earlier entry into `(-u, u)`, then bisects.
fn grid_scan_psi(t: f64, u: f64, q: usize, h: f64) -> f64 {
    let f = |y: f64| (2.0 * t - 1.0) - 2.0 * t * y * y;
    let score = |y: f64| {
        let mut z = y;
        for i in 1..=q {
            z = f(z);
            if i < q && z.abs() < u {
                return None;
            }
        }
        Some(z.abs() - u)
    };
    let mut prev = 0.0;
    let mut y = h;
    while y < u {
        match score(y) {
            Some(s) if s < 0.0 => {}
            _ => break,
        }
        prev = y;
        y += h;
    }
    let (mut lo, mut hi) = (prev, y);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match score(mid) {
            Some(s) if s < 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    lo
}

#[test]
fn first_return_of_critical_point_matches_naive_loop() {
    let map = q(0.95);
    let u1 = 1.0 - 1.0 / 1.9;
    let oracle = naive_return(0.95, 0.0, u1, 1000).unwrap();
    assert_eq!(oracle, Q1_AT_095);
    let w = Interval::symmetric(map.fixed_point_positive().unwrap()).unwrap();
    assert_eq!(first_return_time(&map, 0.0, &w, 1000).unwrap(), FirstReturn::Returns(Q1_AT_095));
}

#[test]
fn psi_step_matches_grid_scan() {
    let u1 = 1.0 - 1.0 / 1.9;
    let oracle = grid_scan_psi(0.95, u1, Q1_AT_095, 1e-6);
    assert!((oracle - U2_AT_095).abs() < 1e-12, "{oracle}");
    let step = psi_step(&q(0.95), u1, &Caps::default()).unwrap();
    assert_eq!(step.q, Q1_AT_095);
    assert!((step.u_next - U2_AT_095).abs() < 1e-12 * U2_AT_095);
    assert!(!step.renormalization);
}

#[test]
fn psi_step_matches_grid_scan_at_deeper_levels() {
    for t in [0.93, 0.95, 0.97, 0.99] {
        let map = q(t);
        let c = build_cascade(&map, None, &Caps { depth: 4, ..Caps::default() }).unwrap();
        for n in 0..c.q.len() {
            if c.renormalized.contains(&(n + 1)) {
                continue;
            }
            let h = c.u[n + 1] * 1e-3;
            let oracle = grid_scan_psi(t, c.u[n], c.q[n], h);
            assert!(
                (oracle - c.u[n + 1]).abs() <= 1e-9 * c.u[n + 1],
                "t = {t}, level {}: {oracle} vs {}",
                n + 1,
                c.u[n + 1]
            );
        }
    }
}

/// Return times of the first return to `(-u, u)` on a dense grid.
fn dense_times(t: f64, u: f64, points: usize, cap: usize) -> Vec<(f64, Option<usize>)> {
    let h = 2.0 * u / points as f64;
    (0..points)
        .map(|i| {
            let y = -u + (i as f64 + 0.5) * h;
            (y, naive_return(t, y, u, cap))
        })
        .collect()
}

#[test]
fn branches_match_dense_grid() {
    let t = 0.95;
    let map = q(t);
    let u1 = map.fixed_point_positive().unwrap();
    let caps = Caps { return_time: 200, grid: 4096, ..Caps::default() };
    let u2 = psi_step(&map, u1, &caps).unwrap().u_next;
    for u in [u1, u2] {
        let set = return_branches(&map, u, &caps).unwrap();
        let dense = dense_times(t, u, 40_960, 200);
        // Every dense point lies in a branch with its return time, except
        // near branch boundaries, and every branch wide enough to hold a
        // dense point is seen by it.
        let mut unmatched = 0;
        for &(y, time) in &dense {
            let hit = set.branches.iter().find(|b| b.interval.lo <= y && y <= b.interval.hi);
            match (hit, time) {
                (Some(b), Some(time)) => assert_eq!(b.return_time, time, "y = {y}"),
                (None, _) => unmatched += 1,
                (Some(_), None) => panic!("branch at {y} without return"),
            }
        }
        let spacing = 2.0 * u / 40_960.0;
        for b in &set.branches {
            if b.interval.len() > 2.0 * spacing {
                assert!(dense.iter().any(|&(y, _)| b.interval.contains(y)));
            }
        }
        let coverage = 1.0 - unmatched as f64 / dense.len() as f64;
        assert!(coverage > 0.9, "coverage {coverage} at u = {u}");
        assert!(!set.branches.is_empty());
        assert_eq!(set.branches.iter().filter(|b| b.kind == BranchKind::Central).count(), 1);
    }
}

#[test]
fn feigenbaum_oracle_agrees_with_literature() {
    let t = feigenbaum_parameter();
    assert!((t - T_F).abs() < 1e-10, "{t}");
    // mu = 2t(2t - 1) for the logistic form 1 - mu x^2.
    let mu = 2.0 * t * (2.0 * t - 1.0);
    assert!((mu - 1.401_155_189_092).abs() < 1e-8, "{mu}");
}

#[test]
fn cascade_at_feigenbaum_parameter() {
    let map = q(T_F);
    let c = build_cascade(&map, None, &Caps { depth: 10, ..Caps::default() }).unwrap();
    assert_eq!(c.depth(), 10);
    assert_eq!(c.termination, Termination::DepthReached);
    // Every level is a period-doubling renormalization.
    assert_eq!(c.renormalized, (1..10).collect::<Vec<_>>());
    for (n, w) in c.q.windows(2).enumerate() {
        assert_eq!(w[1], 2 * w[0], "level {n}");
    }
    // sigma_n tends to the reciprocal of the universal scaling 2.5029...
    let limit = 1.0 / 2.502_907_875_095_892_8;
    for s in &c.sigma[3..] {
        assert!((s - limit).abs() < 1e-4, "{:?}", c.sigma);
    }
    // Returns land in the companion interval, never in U_{n+1}.
    assert!(c.central_return.iter().all(|&flag| !flag));
    verify_cascade(&map, &c, &Caps::default()).unwrap();
}

#[test]
fn structural_checks_across_parameters() {
    for t in [0.9, 0.93, 0.95, 0.97, 0.99, 1.0, T_F] {
        let map = q(t);
        let c = build_cascade(&map, None, &Caps::default()).unwrap();
        verify_cascade(&map, &c, &Caps::default()).unwrap();
        for w in c.u.windows(2) {
            assert!(w[1] < w[0]);
        }
    }
}

#[test]
fn koebe_bound_holds_on_extended_branches() {
    let map = q(0.95);
    let caps = Caps { return_time: 200, ..Caps::default() };
    let c = build_cascade(&map, None, &caps).unwrap();
    let mut checked = 0;
    for n in 1..c.depth() {
        let (outer, u) = (c.u[n - 1], c.u[n]);
        let set = return_branches(&map, u, &caps).unwrap();
        for b in &set.branches {
            let Ok(ext) = branch_extension(&map, b, outer) else { continue };
            if ext.iterate == 0 || ext.space.is_nan() || ext.space <= 0.0 {
                continue;
            }
            let d = measured_distortion(&map, ext.iterate, &ext.domain, 64).unwrap();
            assert!(d <= koebe_bound(ext.space).unwrap(), "{b:?}: {d} vs tau {}", ext.space);
            checked += 1;
        }
    }
    assert!(checked > 20, "{checked}");
}

#[test]
fn unresolvable_central_branch_ends_in_underflow() {
    // At t = 0.9025 the fifth return time exceeds 10^4 and the derivative
    // along it leaves no representable point of the central branch.
    let map = q(0.9025);
    let c = build_cascade(&map, None, &Caps::default()).unwrap();
    assert_eq!(c.termination, Termination::UnderflowCap);
    assert_eq!(c.underflow, None);
    let last = *c.u.last().unwrap();
    assert!(matches!(psi_step(&map, last, &Caps::default()), Err(unimodal::Error::Underflow { .. })));
    verify_cascade(&map, &c, &Caps::default()).unwrap();
}
