use rayon::prelude::*;

use super::mdpbe::{exactness, mdpbe};
use crate::geometry::{ParametricTunnel, Vec3};
use crate::sensor::SensorConfig;

/// Aggregate estimator quality at one cone angle.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub alpha: f64,
    /// Largest exactness angle over the successful estimates.
    pub max_exactness: f64,
    /// Share of points with exactly two maxima.
    pub wellposed_rate: f64,
    /// Per-point exactness, `None` where the estimator failed.
    pub exactness: Vec<Option<f64>>,
    pub failures: usize,
}

/// Runs the estimator at every point for every angle. Per-point errors are
/// counted, never propagated.
pub fn alpha_sweep(
    tunnel: &ParametricTunnel,
    points: &[Vec3],
    alphas: &[f64],
    cfg: &SensorConfig,
) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|a| (0..points.len()).map(move |p| (a, p)))
        .collect();
    let results: Vec<Option<(f64, bool)>> = jobs
        .par_iter()
        .map(|&(a, p)| {
            let mut c = cfg.with_alpha(alphas[a]);
            c.strict = false;
            let est = mdpbe(tunnel, &points[p], &c).ok()?;
            let ex = exactness(tunnel, &est, None).ok()?;
            Some((ex.angle, est.well_posed))
        })
        .collect();

    alphas
        .iter()
        .enumerate()
        .map(|(a, &alpha)| {
            let row = &results[a * points.len()..(a + 1) * points.len()];
            let exact: Vec<Option<f64>> = row.iter().map(|r| r.map(|x| x.0)).collect();
            let good = row.iter().filter(|r| matches!(r, Some((_, true)))).count();
            SweepRow {
                alpha,
                max_exactness: exact.iter().flatten().cloned().fold(0.0, f64::max),
                wellposed_rate: if points.is_empty() {
                    0.0
                } else {
                    good as f64 / points.len() as f64
                },
                failures: row.iter().filter(|r| r.is_none()).count(),
                exactness: exact,
            }
        })
        .collect()
}
