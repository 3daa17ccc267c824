//! Bipartite Gaussian entanglement from the steady-state covariance matrix.
//!
//! Convention: each quadrature of the vacuum has variance 1/2, so a
//! two-mode state is entangled exactly when the smallest symplectic
//! eigenvalue of its partial transpose, `eta_minus`, drops below 1/2, and
//! `E_N = max(0, -ln(2 eta_minus))`. This is the only place the threshold
//! appears.

use nalgebra::{Matrix2, Matrix4};

use crate::dynamics::Bipartition;
use crate::error::{Error, Result};
use crate::lyapunov::CovarianceMatrix;

/// Vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Absolute tolerance below which a negative discriminant is treated as
/// rounding and clamped to zero.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Two-mode covariance `[[A, C], [C^T, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCovariance {
    pub block_a: Matrix2<f64>,
    pub block_b: Matrix2<f64>,
    pub block_c: Matrix2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub bipartition: Bipartition,
    pub eta_minus: f64,
    pub log_negativity: f64,
    pub sigma: f64,
    pub det_vs: f64,
}

impl ReducedCovariance {
    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        ReducedCovariance {
            block_a: m.fixed_view::<2, 2>(0, 0).into_owned(),
            block_b: m.fixed_view::<2, 2>(2, 2).into_owned(),
            block_c: m.fixed_view::<2, 2>(0, 2).into_owned(),
        }
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.block_a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.block_b);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.block_c);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.block_c.transpose());
        m
    }

    /// `det A + det B - 2 det C`
    pub fn sigma(&self) -> f64 {
        self.block_a.determinant() + self.block_b.determinant() - 2.0 * self.block_c.determinant()
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }
}

/// Selects the rows and columns of the two subsystems, first subsystem first.
pub fn extract_bipartition(v: &CovarianceMatrix, b: Bipartition) -> Result<ReducedCovariance> {
    if b.first() == b.second() {
        return Err(Error::SameSubsystem(b.first().to_string()));
    }
    let m = v.matrix();
    let (i, j) = (b.first().offset(), b.second().offset());
    Ok(ReducedCovariance {
        block_a: m.fixed_view::<2, 2>(i, i).into_owned(),
        block_b: m.fixed_view::<2, 2>(j, j).into_owned(),
        block_c: m.fixed_view::<2, 2>(i, j).into_owned(),
    })
}

/// Smallest symplectic eigenvalue of the partially transposed two-mode
/// covariance, `sqrt((Sigma - sqrt(Sigma^2 - 4 det V)) / 2)`.
pub fn smallest_symplectic_eigenvalue(rc: &ReducedCovariance) -> Result<f64> {
    let sigma = rc.sigma();
    let det = rc.determinant();
    eta_minus(sigma, det)
}

fn eta_minus(sigma: f64, det: f64) -> Result<f64> {
    let mut disc = sigma * sigma - 4.0 * det;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_TOL {
            return Err(Error::Unphysical(format!(
                "negative discriminant {disc:e} (Sigma = {sigma:e}, det = {det:e})"
            )));
        }
        disc = 0.0;
    }
    let inner = 0.5 * (sigma - disc.sqrt());
    if !(inner > 0.0) {
        return Err(Error::Unphysical(format!(
            "non-positive squared symplectic eigenvalue {inner:e}"
        )));
    }
    Ok(inner.sqrt())
}

pub fn log_negativity_from_eta(eta_minus: f64) -> f64 {
    (-(2.0 * eta_minus).ln()).max(0.0)
}

/// Logarithmic negativity of the two-mode state `rc`.
pub fn log_negativity(rc: &ReducedCovariance, bipartition: Bipartition) -> Result<EntanglementReport> {
    let sigma = rc.sigma();
    let det_vs = rc.determinant();
    let eta = eta_minus(sigma, det_vs)?;
    Ok(EntanglementReport {
        bipartition,
        eta_minus: eta,
        log_negativity: log_negativity_from_eta(eta),
        sigma,
        det_vs,
    })
}

/// Extraction and negativity in one step.
pub fn bipartite_entanglement(v: &CovarianceMatrix, b: Bipartition) -> Result<EntanglementReport> {
    let rc = extract_bipartition(v, b)?;
    log_negativity(&rc, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Matrix8, Subsystem};

    fn two_mode_squeezed(r: f64) -> ReducedCovariance {
        let c = (2.0 * r).cosh() / 2.0;
        let s = (2.0 * r).sinh() / 2.0;
        ReducedCovariance {
            block_a: Matrix2::identity() * c,
            block_b: Matrix2::identity() * c,
            block_c: Matrix2::new(s, 0.0, 0.0, -s),
        }
    }

    fn mo_ae() -> Bipartition {
        Bipartition::new(Subsystem::Mo, Subsystem::Ae).unwrap()
    }

    #[test]
    fn vacuum_is_separable_at_threshold() {
        let rc = ReducedCovariance::from_matrix(&(Matrix4::identity() * 0.5));
        assert_eq!(rc.sigma(), 0.5);
        assert!((rc.determinant() - 1.0 / 16.0).abs() < 1e-17);
        let eta = smallest_symplectic_eigenvalue(&rc).unwrap();
        assert!((eta - 0.5).abs() < 1e-15);
        assert_eq!(log_negativity(&rc, mo_ae()).unwrap().log_negativity, 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        for &r in &[0.1, 0.5, 1.0] {
            let rc = two_mode_squeezed(r);
            let eta = smallest_symplectic_eigenvalue(&rc).unwrap();
            assert!((eta - (-2.0 * r).exp() / 2.0).abs() < 1e-12, "r={r}");
            let en = log_negativity(&rc, mo_ae()).unwrap().log_negativity;
            assert!((en - 2.0 * r).abs() < 1e-9, "r={r} en={en}");
        }
    }

    #[test]
    fn block_diagonal_state_has_no_cross_block() {
        let v = CovarianceMatrix::symmetrized(Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from([
            1.0, 2.0, 0.5, 0.5, 0.7, 0.8, 3.0, 3.0,
        ])));
        for b in Bipartition::all_pairs() {
            let rc = extract_bipartition(&v, b).unwrap();
            assert_eq!(rc.block_c, Matrix2::zeros());
            assert_eq!(log_negativity(&rc, b).unwrap().log_negativity, 0.0);
        }
    }

    #[test]
    fn extraction_uses_fixed_index_map() {
        let v = CovarianceMatrix::symmetrized(Matrix8::from_fn(|i, j| (10 * i.min(j) + i.max(j)) as f64));
        let rc = extract_bipartition(&v, mo_ae()).unwrap();
        // rows/cols (1,2,5,6) 1-based
        assert_eq!(rc.block_a, Matrix2::new(0.0, 1.0, 1.0, 11.0));
        assert_eq!(rc.block_b, Matrix2::new(44.0, 45.0, 45.0, 55.0));
        assert_eq!(rc.block_c, Matrix2::new(4.0, 5.0, 14.0, 15.0));
        let swapped = extract_bipartition(&v, mo_ae().swapped()).unwrap();
        assert_eq!(swapped.block_a, rc.block_b);
        assert_eq!(swapped.block_b, rc.block_a);
        assert_eq!(swapped.block_c, rc.block_c.transpose());
    }

    #[test]
    fn unphysical_state_is_rejected() {
        // too much correlation for the local variances
        let rc = ReducedCovariance {
            block_a: Matrix2::identity() * 0.5,
            block_b: Matrix2::identity() * 0.5,
            block_c: Matrix2::new(2.0, 0.0, 0.0, 2.0),
        };
        assert!(matches!(smallest_symplectic_eigenvalue(&rc), Err(Error::Unphysical(_))));
    }

    #[test]
    fn tiny_negative_discriminant_is_clamped() {
        assert!((eta_minus(0.5, 1.0 / 16.0 + 1e-14).unwrap() - 0.5).abs() < 1e-6);
        assert!(eta_minus(0.5, 1.0 / 16.0 + 1e-9).is_err());
    }
}
