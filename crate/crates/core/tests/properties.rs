use proptest::prelude::*;

use unimodal::analysis::{classify, detect_periodic_attractor, summability, ClassifyBudget};
use unimodal::cascade::{build_cascade, verify_cascade, Caps};
use unimodal::geometry::{
    expansion_check, hyp_length, image_space, koebe_bound, measured_distortion, Interval,
};
use unimodal::maps::UnimodalMap;
use unimodal::telemann::{chain_rule_residual, decompose};
use unimodal::Error;

mod common;
use common::T_F;

/// Shrinks `[x - w, x + w]` until `f^n` is monotone on it.
fn monotone_around(map: &UnimodalMap, n: usize, x: f64, mut w: f64) -> Option<Interval> {
    for _ in 0..60 {
        let outer = Interval::new((x - w).max(-1.0), (x + w).min(1.0)).ok()?;
        match measured_distortion(map, n, &outer, 64) {
            Ok(_) => return Some(outer),
            Err(Error::NotMonotone(_)) | Err(Error::CriticalHit { .. }) => w *= 0.5,
            Err(_) => return None,
        }
    }
    None
}

/// A monotone branch `T` of `f^n` and an interval `I` strictly inside it.
fn configuration(
    map: &UnimodalMap,
    n: usize,
    x: f64,
    w: f64,
    a: f64,
    b: f64,
) -> Option<(Interval, Interval)> {
    let outer = monotone_around(map, n, x, w)?;
    let (a, b) = (a.min(b), a.max(b));
    let lo = outer.lo + outer.len() * (0.01 + 0.98 * a);
    let hi = outer.lo + outer.len() * (0.01 + 0.98 * b);
    let inner = Interval::new(lo, hi).ok()?;
    (inner.lo > outer.lo && inner.hi < outer.hi).then_some((inner, outer))
}

fn expansion_suite(t: f64) {
    let map = UnimodalMap::quadratic(t).unwrap();
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(1000)
    });
    let strategy = (1usize..=8, -1.0f64..1.0, 1e-4f64..0.5, 0.0f64..1.0, 0.0f64..1.0);
    let checked = std::cell::Cell::new(0);
    runner
        .run(&strategy, |(n, x, w, a, b)| {
            let Some((inner, outer)) = configuration(&map, n, x, w, a, b) else {
                return Ok(());
            };
            // Images too thin to resolve in double precision are skipped.
            let Ok(r) = expansion_check(&map, n, &inner, &outer) else {
                return Ok(());
            };
            prop_assert!(r.ok, "t = {t}, n = {n}, {inner:?} in {outer:?}: {r:?}");
            checked.set(checked.get() + 1);
            Ok(())
        })
        .unwrap();
    assert!(checked.get() >= 950, "only {} configurations checked", checked.get());
}

#[test]
fn expansion_at_095() {
    expansion_suite(0.95);
}

#[test]
fn expansion_at_chebyshev() {
    expansion_suite(1.0);
}

#[test]
fn expansion_at_feigenbaum() {
    expansion_suite(T_F);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hyp_length_is_positive_and_monotone_in_inner(lo in -0.9f64..0.0, len in 1e-6f64..0.5, grow in 0.0f64..0.4) {
        let outer = Interval::new(-1.0, 1.0).unwrap();
        let inner = Interval::new(lo, lo + len).unwrap();
        let bigger = Interval::new(lo - grow * (lo + 1.0) * 0.5, lo + len).unwrap();
        let h = hyp_length(&inner, &outer).unwrap();
        prop_assert!(h > 0.0);
        prop_assert!(hyp_length(&bigger, &outer).unwrap() >= h);
    }

    #[test]
    fn koebe_bound_holds_for_random_branches(
        t in 0.9f64..1.0,
        n in 1usize..=6,
        x in -1.0f64..1.0,
        w in 1e-3f64..0.5,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let map = UnimodalMap::quadratic(t).unwrap();
        let Some((inner, outer)) = configuration(&map, n, x, w, a, b) else { return Ok(()) };
        let image = |iv: &Interval| Interval::hull(map.iterate(iv.lo, n), map.iterate(iv.hi, n));
        let (Ok(fi), Ok(fo)) = (image(&inner), image(&outer)) else { return Ok(()) };
        let tau = image_space(&fi, &fo);
        prop_assume!(tau > 1e-6);
        let d = measured_distortion(&map, n, &inner, 64).unwrap();
        prop_assert!(d <= koebe_bound(tau).unwrap() * (1.0 + 1e-9), "{d} vs tau {tau}");
    }

    #[test]
    fn partial_sums_are_nondecreasing(t in 0.55f64..=1.0, alpha in prop::sample::select(vec![2.0, 4.0])) {
        let map = UnimodalMap::quadratic_with_alpha(t, alpha).unwrap();
        if let Ok(r) = summability(&map, 200) {
            prop_assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(r.partial_sums.iter().all(|s| *s >= 0.0));
        }
    }

    #[test]
    fn attractor_multipliers_are_attracting(t in 0.5f64..=1.0) {
        let map = UnimodalMap::quadratic(t).unwrap();
        if let Some(a) = detect_periodic_attractor(&map, 20_000) {
            prop_assert!(a.multiplier.abs() < 1.0, "{a:?}");
            prop_assert!(a.period >= 1);
        }
    }

    #[test]
    fn cascades_are_nested_and_verified(t in 0.9f64..=1.0) {
        let map = UnimodalMap::quadratic(t).unwrap();
        let caps = Caps { return_time: 5000, ..Caps::default() };
        if let Ok(c) = build_cascade(&map, None, &caps) {
            prop_assert!(c.u.windows(2).all(|w| w[1] < w[0]));
            prop_assert!(c.sigma.iter().all(|s| *s > 0.0 && *s < 1.0));
            prop_assert_eq!(verify_cascade(&map, &c, &caps), Ok(()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classify_is_deterministic(t in 0.5f64..=1.0, seed in 0u64..1000) {
        let map = UnimodalMap::quadratic(t).unwrap();
        let budget = ClassifyBudget { seed, ..ClassifyBudget::default() };
        prop_assert_eq!(classify(&map, &budget), classify(&map, &budget));
    }

    #[test]
    fn chain_rule_identity_at_random_indices(t in 0.93f64..0.97, k in 1usize..400) {
        let map = UnimodalMap::quadratic(t).unwrap();
        let Ok(c) = build_cascade(&map, None, &Caps::default()) else { return Ok(()) };
        prop_assume!(c.depth() >= 3);
        if let Ok(d) = decompose(&map, &c, k, 2) {
            prop_assert!(chain_rule_residual(&map, &d).unwrap() < 1e-8);
        }
    }
}
