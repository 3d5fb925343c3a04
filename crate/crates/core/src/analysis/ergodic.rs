use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::UnimodalMap;

/// `|Df|` below this counts as landing on the critical point.
const LYAPUNOV_FLOOR: f64 = 1e-300;

/// `(1/iters) sum ln|Df(f^j(x0))|` over `iters` iterates after `burn_in`.
pub fn lyapunov(map: &UnimodalMap, x0: f64, iters: usize, burn_in: usize) -> Result<f64> {
    if iters < 10_000 {
        return Err(Error::Domain(format!("iters = {iters} < 10000")));
    }
    map.eval(x0)?;
    let mut x = x0;
    for _ in 0..burn_in {
        x = map.apply(x);
    }
    let mut acc = 0.0;
    for j in 0..iters {
        let d = map.apply_deriv(x).abs();
        if d < LYAPUNOV_FLOOR {
            return Err(Error::CriticalHit { index: burn_in + j });
        }
        acc += d.ln();
        x = map.apply(x);
    }
    Ok(acc / iters as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub bins: usize,
    /// `bins + 1` uniform edges of `[-1, 1]`.
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub iterates: usize,
    pub burn_in: usize,
    pub x0: f64,
    /// Indices of bins that received mass.
    pub support: Vec<usize>,
}

/// Histogram of `iters` orbit points after `burn_in`, over uniform bins.
pub fn invariant_density(
    map: &UnimodalMap,
    iters: usize,
    bins: usize,
    burn_in: usize,
    x0: f64,
) -> Result<DensityEstimate> {
    if bins < 10 {
        return Err(Error::Domain(format!("bins = {bins} < 10")));
    }
    if iters < 100_000 {
        return Err(Error::Domain(format!("iters = {iters} < 100000")));
    }
    let mut x = x0;
    map.eval(x0)?;
    for _ in 0..burn_in {
        x = map.apply(x);
    }
    let mut counts = vec![0u64; bins];
    let scale = bins as f64 / 2.0;
    for _ in 0..iters {
        let i = (((x + 1.0) * scale) as usize).min(bins - 1);
        counts[i] += 1;
        x = map.apply(x);
    }
    let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / iters as f64).collect();
    let edges = (0..=bins).map(|i| if i == bins { 1.0 } else { -1.0 + i as f64 / scale }).collect();
    let support = counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i).collect();
    Ok(DensityEstimate { bins, edges, masses, iterates: iters, burn_in, x0, support })
}
