//! Decomposition of the critical orbit along the central cascade.
//!
//! For a time `k` and a base level `n0`, the orbit `f(0), ..., f^k(0)` is cut
//! at the last visits `k_m <= ... <= k_0` to the nested intervals
//! `U_{n0+m} subset ... subset U_{n0}`, leaving a tail of length
//! `r = k - k_0` that never re-enters `U_{n0}`. The derivative
//! `Df^k(f(0))` factors accordingly, and the visit counts `s_i` together
//! with `r` determine `k` uniquely.

use std::collections::HashMap;

use serde::Serialize;

use crate::cascade::{CentralCascade, Termination, PSI_START};
use crate::error::{Error, Result};
use crate::maps::{UnimodalMap, CRITICAL_EPS};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TelemannDecomposition {
    pub k: usize,
    pub n0: usize,
    /// `n0 + m` is the deepest level visited by `f^i(0)`, `0 < i <= k`.
    pub m: usize,
    /// `k_list[i] = k_i` for `i = 0..=m`, so the list is non-increasing.
    pub k_list: Vec<usize>,
    pub r: usize,
    /// `s_list[i] = s_i(k)` for `i < m`, `None` when `k_i = k_{i+1}`;
    /// `s_list[m]` counts the visits to `U_{n0+m}` in `[1, k_m]`.
    pub s_list: Vec<Option<usize>>,
    /// The orbit never entered `U_{n0}` up to time `k`.
    pub degenerate: bool,
}

impl TelemannDecomposition {
    /// `(r, s_0, ..., s_m)`, the data that identifies `k`.
    pub fn signature(&self) -> Signature {
        Signature { r: self.r, s: self.s_list.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub r: usize,
    pub s: Vec<Option<usize>>,
}

/// Visit times of `f^j(0)`, `1 <= j <= kmax`, to every central level.
#[derive(Debug, Clone)]
pub struct VisitTable {
    kmax: usize,
    /// `levels[j]` is the deepest level containing `f^j(0)`; index 0 unused.
    levels: Vec<usize>,
    /// `visits[n]` lists the times `j` with `f^j(0) in U_n`, ascending.
    visits: Vec<Vec<usize>>,
    /// `prefix_max[j] = max(levels[1..=j])`.
    prefix_max: Vec<usize>,
    /// Deepest level that can be certified; deeper visits are ambiguous.
    certified: usize,
    depth: usize,
}

impl VisitTable {
    pub fn new(map: &UnimodalMap, cascade: &CentralCascade, kmax: usize) -> Self {
        let depth = cascade.depth();
        // Inside U_depth the next level is unknown unless the cascade ended
        // because the critical point never returns or the next boundary
        // underflowed; points below that boundary count as one level deeper.
        let mut certified = match cascade.termination {
            Termination::NonRecurrent | Termination::UnderflowCap => depth,
            _ => depth.saturating_sub(1),
        };
        let floor = cascade.underflow.unwrap_or(0.0);
        // An unresolved boundary is only known to lie below PSI_START.
        let unresolved = cascade.termination == Termination::UnderflowCap && cascade.underflow.is_none();
        let mut levels = vec![0; kmax + 1];
        let mut visits = vec![Vec::new(); depth + 1];
        let mut prefix_max = vec![0; kmax + 1];
        let mut x = 0.0;
        for j in 1..=kmax {
            x = map.apply(x);
            let mut level = cascade.level_of(x);
            if level == depth && x.abs() < floor {
                level += 1;
            }
            if unresolved && level == depth && x.abs() < PSI_START {
                certified = depth.saturating_sub(1);
            }
            levels[j] = level;
            for v in visits.iter_mut().take(level.min(depth) + 1).skip(1) {
                v.push(j);
            }
            prefix_max[j] = prefix_max[j - 1].max(level);
        }
        Self { kmax, levels, visits, prefix_max, certified, depth }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn level(&self, j: usize) -> usize {
        self.levels[j]
    }

    fn last_visit(&self, level: usize, after: usize, upto: usize) -> Option<usize> {
        let v = &self.visits[level];
        let idx = v.partition_point(|&j| j <= upto);
        (idx > 0 && v[idx - 1] > after).then(|| v[idx - 1])
    }

    fn count_visits(&self, level: usize, after: usize, upto: usize) -> usize {
        let v = &self.visits[level];
        v.partition_point(|&j| j <= upto) - v.partition_point(|&j| j <= after)
    }

    pub fn decompose(&self, k: usize, n0: usize) -> Result<TelemannDecomposition> {
        if k == 0 || k > self.kmax {
            return Err(Error::Domain(format!("k = {k} outside [1, {}]", self.kmax)));
        }
        if n0 == 0 || n0 > self.depth {
            return Err(Error::CascadeTooShallow(format!(
                "base level {n0} not in a cascade of depth {}",
                self.depth
            )));
        }
        let deepest = self.prefix_max[k];
        if deepest > self.certified {
            return Err(Error::CascadeTooShallow(format!(
                "critical orbit reaches level {deepest} by time {k}; cascade certifies {} levels",
                self.certified
            )));
        }
        if deepest < n0 {
            return Ok(TelemannDecomposition {
                k,
                n0,
                m: 0,
                k_list: Vec::new(),
                r: k,
                s_list: Vec::new(),
                degenerate: true,
            });
        }
        let m = deepest - n0;
        let mut k_list = vec![0; m + 1];
        let mut s_list = vec![None; m + 1];
        k_list[m] = self.last_visit(n0 + m, 0, k).expect("deepest level is visited");
        s_list[m] = Some(self.count_visits(n0 + m, 0, k_list[m]));
        for i in (1..=m).rev() {
            let level = n0 + i - 1;
            match self.last_visit(level, k_list[i], k) {
                Some(j) => {
                    k_list[i - 1] = j;
                    s_list[i - 1] = Some(self.count_visits(level, k_list[i], j));
                }
                None => k_list[i - 1] = k_list[i],
            }
        }
        Ok(TelemannDecomposition { k, n0, m, r: k - k_list[0], k_list, s_list, degenerate: false })
    }
}

/// Decomposition of the critical orbit up to time `k`.
pub fn decompose(
    map: &UnimodalMap,
    cascade: &CentralCascade,
    k: usize,
    n0: usize,
) -> Result<TelemannDecomposition> {
    VisitTable::new(map, cascade, k).decompose(k, n0)
}

/// `|ln|Df^k(f(0))| - (sum of the logs of the decomposition's factors)|`.
///
/// The total is accumulated along one pass of the orbit; every factor is
/// recomputed by iterating from its own starting point.
pub fn chain_rule_residual(map: &UnimodalMap, dec: &TelemannDecomposition) -> Result<f64> {
    let k = dec.k;
    let c1 = map.apply(0.0);
    let orbit = map.orbit(c1, k)?;
    if let Some(j) = orbit.points[..k].iter().position(|x| x.abs() < CRITICAL_EPS) {
        return Err(Error::CriticalHit { index: j + 1 });
    }
    let total = orbit.log_deriv_prefix[k];

    // f^j(0) = orbit.points[j - 1]; block (a, b] covers Df at f^{a+1}(0) .. f^b(0).
    let block = |a: usize, b: usize| -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        Ok(map.log_deriv(orbit.points[a], b - a)?.log_abs)
    };
    let mut factors = block(dec.k_list.first().copied().unwrap_or(0), k)?;
    if !dec.degenerate {
        factors += block(0, dec.k_list[dec.m])?;
        for i in 0..dec.m {
            factors += block(dec.k_list[i + 1], dec.k_list[i])?;
        }
    }
    Ok((total - factors).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collision {
    pub k: usize,
    pub k_prime: usize,
    pub signature: Signature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub kmax: usize,
    pub n0: usize,
    pub pairs_checked: usize,
    pub collisions: Vec<Collision>,
}

/// Checks that distinct `k <= kmax` have distinct signatures.
pub fn signature_injectivity(
    map: &UnimodalMap,
    cascade: &CentralCascade,
    kmax: usize,
    n0: usize,
) -> Result<InjectivityReport> {
    if kmax == 0 {
        return Err(Error::Domain("kmax must be positive".into()));
    }
    let table = VisitTable::new(map, cascade, kmax);
    let mut seen: HashMap<Signature, usize> = HashMap::with_capacity(kmax);
    let mut collisions = Vec::new();
    for k in 1..=kmax {
        let sig = table.decompose(k, n0)?.signature();
        match seen.get(&sig) {
            Some(&first) => collisions.push(Collision { k: first, k_prime: k, signature: sig }),
            None => {
                seen.insert(sig, k);
            }
        }
    }
    Ok(InjectivityReport { kmax, n0, pairs_checked: kmax * (kmax - 1) / 2, collisions })
}
