use unimodal::cascade::{build_cascade, Caps, CentralCascade};
use unimodal::maps::UnimodalMap;
use unimodal::telemann::{chain_rule_residual, decompose, signature_injectivity, VisitTable};

/// `(m, k_list, r, s_list)`.
type Naive = (usize, Vec<usize>, usize, Vec<Option<usize>>);

/// Decomposition straight from the definitions, scanning the orbit for
/// every index, or `None` when `U_{n0}` is never entered.
fn naive(orbit: &[f64], u: &[f64], k: usize, n0: usize) -> Option<Naive> {
    let inside = |j: usize, level: usize| orbit[j].abs() < u[level - 1];
    let deepest = (n0..=u.len()).rev().find(|&level| (1..=k).any(|j| inside(j, level)))?;
    let m = deepest - n0;
    let mut ks = vec![0; m + 1];
    let mut ss = vec![None; m + 1];
    ks[m] = (1..=k).rev().find(|&j| inside(j, n0 + m)).unwrap();
    ss[m] = Some((1..=ks[m]).filter(|&j| inside(j, n0 + m)).count());
    for i in (1..=m).rev() {
        let level = n0 + i - 1;
        match (ks[i] + 1..=k).rev().find(|&j| inside(j, level)) {
            Some(j) => {
                ks[i - 1] = j;
                ss[i - 1] = Some((ks[i] + 1..=j).filter(|&x| inside(x, level)).count());
            }
            None => ks[i - 1] = ks[i],
        }
    }
    Some((m, ks.clone(), k - ks[0], ss))
}

fn setup(t: f64) -> (UnimodalMap, CentralCascade, Vec<f64>) {
    let map = UnimodalMap::quadratic(t).unwrap();
    let c = build_cascade(&map, None, &Caps::default()).unwrap();
    let mut orbit = vec![0.0];
    for _ in 0..2000 {
        orbit.push(map.apply(*orbit.last().unwrap()));
    }
    (map, c, orbit)
}

#[test]
fn decomposition_matches_definition() {
    let (map, c, orbit) = setup(0.95);
    let table = VisitTable::new(&map, &c, 500);
    for k in 1..=500 {
        let d = table.decompose(k, 2).unwrap();
        match naive(&orbit, &c.u, k, 2) {
            None => {
                assert!(d.degenerate);
                assert_eq!(d.r, k);
            }
            Some((m, ks, r, ss)) => {
                assert!(!d.degenerate);
                assert_eq!((d.m, &d.k_list, d.r, &d.s_list), (m, &ks, r, &ss), "k = {k}");
            }
        }
    }
}

#[test]
fn frozen_decomposition_at_500() {
    // Frozen from `naive` at t = 0.95, n0 = 2.
    let (map, c, orbit) = setup(0.95);
    let d = decompose(&map, &c, 500, 2).unwrap();
    let (m, ks, r, ss) = naive(&orbit, &c.u, 500, 2).unwrap();
    assert_eq!((d.m, d.k_list.clone(), d.r, d.s_list.clone()), (m, ks, r, ss));
    assert_eq!(d.m, 2);
    assert_eq!(d.k_list, vec![498, 431, 302]);
    assert_eq!(d.s_list, vec![Some(9), Some(7), Some(2)]);
    assert_eq!(d.r, 2);
}

#[test]
fn chain_rule_identity_to_500() {
    let (map, c, _) = setup(0.95);
    let table = VisitTable::new(&map, &c, 500);
    for k in 1..=500 {
        let d = table.decompose(k, 2).unwrap();
        let residual = chain_rule_residual(&map, &d).unwrap();
        assert!(residual < 1e-8, "k = {k}: {residual}");
    }
}

#[test]
fn signatures_are_injective() {
    let (map, c, _) = setup(0.95);
    let report = signature_injectivity(&map, &c, 2000, 2).unwrap();
    assert!(report.collisions.is_empty(), "{:?}", &report.collisions[..report.collisions.len().min(3)]);
    assert_eq!(report.pairs_checked, 2000 * 1999 / 2);
}
