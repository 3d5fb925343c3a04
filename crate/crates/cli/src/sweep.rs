use rayon::prelude::*;
use serde::Serialize;
use unimodal::analysis::{classify, Classification, ClassifyBudget};
use unimodal::maps::UnimodalMap;

use crate::error::CliError;

pub const CSV_HEADER: &str =
    "t,class,n_central_returns,depth_reached,sigma_last,scaling_sum,summability_partial,lyapunov,seed";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: Option<f64>,
    pub class: &'static str,
    pub n_central_returns: usize,
    pub depth_reached: usize,
    pub sigma_last: Option<f64>,
    pub scaling_sum: Option<f64>,
    pub summability_partial: Option<f64>,
    pub lyapunov: Option<f64>,
    pub seed: u64,
}

impl From<&Classification> for SweepRow {
    fn from(c: &Classification) -> Self {
        Self {
            t: c.t,
            class: c.label.name(),
            n_central_returns: c.n_central_returns,
            depth_reached: c.depth_reached,
            sigma_last: c.sigma_last,
            scaling_sum: c.scaling_sum,
            summability_partial: c.summability_partial,
            lyapunov: c.lyapunov,
            seed: c.seed,
        }
    }
}

/// `points` parameters spaced uniformly over `[t_min, t_max]`.
pub fn grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    if !(t_min <= t_max) {
        return Err(CliError::Usage(format!("--t-min {t_min} exceeds --t-max {t_max}")));
    }
    if points == 1 {
        return Ok(vec![t_min]);
    }
    let span = t_max - t_min;
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { t_max } else { t_min + span * i as f64 / last }).collect())
}

/// Classifies every grid parameter on at most `jobs` threads; rows come
/// back in ascending `t`.
pub fn run(ts: &[f64], alpha: f64, budget: &ClassifyBudget, jobs: usize) -> Result<Vec<SweepRow>, CliError> {
    let maps =
        ts.iter().map(|&t| UnimodalMap::quadratic_with_alpha(t, alpha)).collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let mut rows: Vec<(f64, SweepRow)> = pool.install(|| {
        ts.par_iter()
            .zip(maps.par_iter())
            .map(|(&t, map)| (t, SweepRow::from(&classify(map, budget))))
            .collect()
    });
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

pub fn to_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        w.serialize(row)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| CliError::Serialize(e.to_string()))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.5, 1.0, 3).unwrap(), vec![0.5, 0.75, 1.0]);
        assert_eq!(grid(0.7, 0.7, 1).unwrap(), vec![0.7]);
        assert!(grid(0.5, 1.0, 0).is_err());
        assert!(grid(1.0, 0.5, 4).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let row = SweepRow {
            t: Some(0.6),
            class: "P",
            n_central_returns: 0,
            depth_reached: 0,
            sigma_last: None,
            scaling_sum: None,
            summability_partial: None,
            lyapunov: Some(-0.916_290_731_874_155),
            seed: 7,
        };
        let text = to_csv(&[row]).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n0.6,P,0,0,,,,-0.916290731874155,7\n"));
    }
}
