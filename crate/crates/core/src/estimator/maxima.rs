//! Local maxima of periodic sampled profiles.

use std::f64::consts::TAU;

use crate::error::{Result, TunnelError};
use crate::linalg::golden_section_min;

/// Angular tolerance of the refined maxima.
pub const ANGLE_TOL: f64 = 1e-6;

/// Local maxima of a `2π`-periodic profile sampled at increasing `phis`.
///
/// Missing samples are skipped. Runs of samples equal within `flat_tol`
/// count as one plateau; a plateau that beats both neighbours yields its
/// midpoint. Isolated maxima are refined by golden-section search on `eval`
/// between the neighbouring samples. Results are in `[0, 2π)`, sorted.
pub fn periodic_maxima<F>(
    phis: &[f64],
    values: &[Option<f64>],
    mut eval: F,
    flat_tol: f64,
) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Option<f64>,
{
    let valid: Vec<(f64, f64)> = phis
        .iter()
        .zip(values)
        .filter_map(|(&p, v)| v.filter(|x| x.is_finite()).map(|x| (p, x)))
        .collect();
    if valid.is_empty() {
        return Err(TunnelError::EmptyProfile);
    }
    let m = valid.len();
    if m < 3 {
        return Ok(Vec::new());
    }

    // Group cyclically consecutive samples into flat runs.
    let same = |a: f64, b: f64| (a - b).abs() <= flat_tol;
    let mut start = 0;
    while start < m && same(valid[start].1, valid[(start + m - 1) % m].1) {
        start += 1;
    }
    if start == m {
        // Entirely flat.
        return Ok(Vec::new());
    }
    let mut runs: Vec<(usize, usize)> = Vec::new(); // (first, len) in cyclic index
    let mut k = 0;
    while k < m {
        let first = (start + k) % m;
        let mut len = 1;
        while k + len < m && same(valid[(first + len) % m].1, valid[(first + len - 1) % m].1) {
            len += 1;
        }
        runs.push((first, len));
        k += len;
    }
    let nr = runs.len();
    let level = |r: (usize, usize)| valid[r.0].1;

    let mut out = Vec::new();
    for i in 0..nr {
        let run = runs[i];
        let prev = runs[(i + nr - 1) % nr];
        let next = runs[(i + 1) % nr];
        if nr > 1 && !(level(run) > level(prev) && level(run) > level(next)) {
            continue;
        }
        let first_phi = valid[run.0].0;
        let last_idx = (run.0 + run.1 - 1) % m;
        let mut last_phi = valid[last_idx].0;
        if last_phi < first_phi {
            last_phi += TAU;
        }
        if run.1 > 1 {
            out.push((0.5 * (first_phi + last_phi)).rem_euclid(TAU));
            continue;
        }
        let mut lo = valid[(run.0 + m - 1) % m].0;
        let mut hi = valid[(run.0 + 1) % m].0;
        if lo > first_phi {
            lo -= TAU;
        }
        if hi < first_phi {
            hi += TAU;
        }
        let sample = valid[run.0].1;
        let (phi, neg) =
            golden_section_min(|p| eval(p).map_or(f64::INFINITY, |v| -v), lo, hi, ANGLE_TOL);
        let best = if -neg >= sample { phi } else { first_phi };
        out.push(polish(&mut eval, best, lo, hi).rem_euclid(TAU));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Half-width of the three-point stencil used to polish a maximum.
const POLISH_STEP: f64 = 2e-4;

/// Parabolic vertex steps from a golden-section estimate; sharper than the
/// comparison-based search on flat peaks. Steps leaving `[lo, hi]` or a
/// stencil without curvature stop the polish.
fn polish<F: FnMut(f64) -> Option<f64>>(eval: &mut F, start: f64, lo: f64, hi: f64) -> f64 {
    let h = POLISH_STEP;
    let mut phi = start;
    for _ in 0..3 {
        let (Some(fm), Some(f0), Some(fp)) = (eval(phi - h), eval(phi), eval(phi + h)) else {
            break;
        };
        let curv = fp - 2.0 * f0 + fm;
        if !(curv < 0.0) {
            break;
        }
        let step = -h * (fp - fm) / (2.0 * curv);
        let next = phi + step;
        if !(next > lo && next < hi) || step.abs() > 4.0 * h {
            break;
        }
        phi = next;
        if step.abs() < 1e-12 {
            break;
        }
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| TAU * k as f64 / n as f64).collect()
    }

    #[test]
    fn cos_two_phi() {
        let phis = grid(64);
        let vals: Vec<_> = phis.iter().map(|p| Some((2.0 * p).cos())).collect();
        let m = periodic_maxima(&phis, &vals, |p| Some((2.0 * p).cos()), 1e-14).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m[0].min(TAU - m[0]) < 2e-6);
        assert!((m[1] - PI).abs() < 2e-6);
    }

    #[test]
    fn off_grid_maximum_is_refined() {
        let f = |p: f64| Some((p - 1.234).cos());
        let phis = grid(32);
        let vals: Vec<_> = phis.iter().map(|&p| f(p)).collect();
        let m = periodic_maxima(&phis, &vals, f, 1e-14).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0] - 1.234).abs() < 2e-6);
    }

    #[test]
    fn plateau_midpoint_and_missing() {
        let phis = grid(16);
        let mut vals: Vec<_> = phis.iter().map(|_| Some(0.0)).collect();
        vals[5] = Some(1.0);
        vals[6] = Some(1.0);
        vals[7] = Some(1.0);
        vals[12] = None;
        let m = periodic_maxima(&phis, &vals, |_| None, 1e-12).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0] - phis[6]).abs() < 1e-12);
        assert!(matches!(
            periodic_maxima(&phis, &vec![None; 16], |_| None, 1e-12),
            Err(TunnelError::EmptyProfile)
        ));
    }

    #[test]
    fn wrapping_plateau() {
        let phis = grid(16);
        let mut vals: Vec<_> = phis.iter().map(|_| Some(0.0)).collect();
        vals[15] = Some(2.0);
        vals[0] = Some(2.0);
        let m = periodic_maxima(&phis, &vals, |_| None, 1e-12).unwrap();
        assert_eq!(m.len(), 1);
        let expected = 0.5 * (phis[15] + TAU);
        assert!((m[0] - expected).abs() < 1e-12);
    }
}
