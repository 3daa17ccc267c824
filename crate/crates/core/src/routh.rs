//! Routh-Hurwitz cross-check of drift-matrix stability.
//!
//! The characteristic polynomial comes from the Faddeev-LeVerrier recursion,
//! so no eigenvalue routine is involved; the Routh array then counts the
//! roots in the closed right half-plane.

use crate::dynamics::Matrix8;

#[derive(Debug, Clone, PartialEq)]
pub struct RouthReport {
    /// Characteristic polynomial of `A / s`, highest degree first, monic.
    pub coefficients: Vec<f64>,
    /// First column of the Routh array.
    pub first_column: Vec<f64>,
    /// Sign changes in the first column (right half-plane roots).
    pub sign_changes: usize,
    /// A first-column entry vanished (to rounding): roots on or near the
    /// imaginary axis.
    pub degenerate: bool,
    pub stable: bool,
}

/// Coefficients `[1, c1, ..., c8]` of `det(lambda I - A)`.
pub fn characteristic_polynomial(a: &Matrix8) -> Vec<f64> {
    let n = 8;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    let mut m = Matrix8::zeros();
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k) / k
        m = a * m + Matrix8::identity() * coeffs[k - 1];
        coeffs[k] = -(a * m).trace() / k as f64;
    }
    coeffs
}

/// Routh-Hurwitz test on `A`, evaluated on `A / max|A_ij|` for conditioning
/// (scaling does not move roots across the imaginary axis).
pub fn routh_hurwitz(a: &Matrix8) -> RouthReport {
    let scale = a.amax();
    let scaled = if scale > 0.0 { a / scale } else { *a };
    let coefficients = characteristic_polynomial(&scaled);
    let (first_column, degenerate) = routh_first_column(&coefficients);
    let sign_changes = first_column
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count();
    let stable = !degenerate && first_column.iter().all(|&c| c > 0.0);
    RouthReport {
        coefficients,
        first_column,
        sign_changes,
        degenerate,
        stable,
    }
}

/// First column of the Routh array for a polynomial with positive leading
/// coefficient. A zero pivot is replaced by a tiny positive epsilon (the
/// standard perturbation) and reported as degenerate.
pub fn routh_first_column(coeffs: &[f64]) -> (Vec<f64>, bool) {
    let degree = coeffs.len() - 1;
    let width = degree / 2 + 1;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    let row = |start: usize| -> Vec<f64> {
        (0..width)
            .map(|k| coeffs.get(start + 2 * k).copied().unwrap_or(0.0))
            .collect()
    };
    rows.push(row(0));
    rows.push(row(1));
    let mag = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tiny = 1e-300_f64.max(mag * 1e-300);
    let mut degenerate = false;
    for r in 2..=degree {
        let (above, prev) = (&rows[r - 2], &rows[r - 1]);
        let mut pivot = prev[0];
        if pivot == 0.0 {
            degenerate = true;
            pivot = tiny;
        }
        let next: Vec<f64> = (0..width)
            .map(|k| {
                let a = above.get(k + 1).copied().unwrap_or(0.0);
                let b = prev.get(k + 1).copied().unwrap_or(0.0);
                (pivot * a - above[0] * b) / pivot
            })
            .collect();
        rows.push(next);
    }
    let mut col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    for c in col.iter_mut() {
        if *c == 0.0 {
            degenerate = true;
            *c = tiny;
        }
    }
    (col, degenerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_drift;
    use crate::lyapunov::stability;
    use crate::params::EffectiveInput;

    #[test]
    fn polynomial_of_diagonal_matrix() {
        let a = Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from([
            -1.0, -2.0, -3.0, -4.0, -5.0, -6.0, -7.0, -8.0,
        ]));
        let c = characteristic_polynomial(&a);
        // (l+1)(l+2)...(l+8): c1 = 36, c8 = 8!
        assert_eq!(c[0], 1.0);
        assert!((c[1] - 36.0).abs() < 1e-10);
        assert!((c[8] - 40320.0).abs() < 1e-6);
        assert!(routh_hurwitz(&a).stable);
    }

    #[test]
    fn counts_right_half_plane_roots() {
        let mut a = -Matrix8::identity();
        a[(0, 0)] = 0.5;
        a[(1, 1)] = 2.0;
        let r = routh_hurwitz(&a);
        assert!(!r.stable);
        assert_eq!(r.sign_changes, 2);
    }

    #[test]
    fn agrees_with_spectrum_at_figure_base() {
        let p = EffectiveInput::figure_base().resolve().unwrap();
        let a = build_drift(&p);
        assert_eq!(routh_hurwitz(&a).stable, stability(&a).unwrap().stable);
        let mut q = p;
        q.g_lc_eff = 1.0 * p.omega_m;
        q.g_om_eff = 0.5 * p.omega_m;
        let a = build_drift(&q);
        assert!(!stability(&a).unwrap().stable);
        assert!(!routh_hurwitz(&a).stable);
    }

    #[test]
    fn undamped_oscillator_is_degenerate() {
        let mut a = Matrix8::zeros();
        for k in (0..8).step_by(2) {
            a[(k, k + 1)] = 1.0;
            a[(k + 1, k)] = -1.0;
        }
        let r = routh_hurwitz(&a);
        assert!(r.degenerate);
        assert!(!r.stable);
    }
}
