//! Small numeric helpers shared across modules.

use nalgebra::Vector2;

/// Closed-form eigen-decomposition of the symmetric matrix `[[a, b], [b, c]]`.
///
/// Returns `(λ_min, λ_max, v_min, v_max)` with unit eigenvectors.
pub fn sym2_eigen(a: f64, b: f64, c: f64) -> (f64, f64, Vector2<f64>, Vector2<f64>) {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    let v_max = Vector2::new(co, s);
    let v_min = Vector2::new(-s, co);
    (mean - rad, mean + rad, v_min, v_max)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
/// Returns `(x, f(x))`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo).abs() > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs() {
        for &(a, b, c) in &[
            (1.0, 0.0, 0.0),
            (0.3, -0.7, 2.0),
            (1.0, 0.0, 1.0),
            (-2.0, 0.5, -1.0),
        ] {
            let (lmin, lmax, vmin, vmax) = sym2_eigen(a, b, c);
            assert!(lmin <= lmax);
            let m = nalgebra::Matrix2::new(a, b, b, c);
            assert!((m * vmin - vmin * lmin).norm() < 1e-14);
            assert!((m * vmax - vmax * lmax).norm() < 1e-14);
            assert!(vmin.dot(&vmax).abs() < 1e-15);
        }
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| (x - 0.3) * (x - 0.3) + 1.0, -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}
