//! Stability of the drift matrix and the steady-state covariance
//! `A V + V A^T = -D`.

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex64;

use crate::dynamics::Matrix8;
use crate::error::{Error, Result};

/// Relative width, in units of the reference frequency, of the band below
/// zero in which a stable spectrum is flagged as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub max_real_eigenvalue: f64,
    pub stable: bool,
    pub eigenvalues: [Complex64; 8],
}

impl StabilityReport {
    /// Stable, but with the slowest mode within `MARGINAL_BAND * omega_ref`
    /// of the imaginary axis.
    pub fn is_marginal(&self, omega_ref: f64) -> bool {
        self.stable && self.max_real_eigenvalue >= -MARGINAL_BAND * omega_ref
    }

    fn slowest(&self) -> Complex64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(Complex64::new(f64::NEG_INFINITY, 0.0), |best, z| {
                if z.re > best.re {
                    z
                } else {
                    best
                }
            })
    }
}

/// Eigenvalues of an 8x8 real matrix.
pub fn eigenvalues(a: &Matrix8) -> Result<[Complex64; 8]> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::linalg::Schur::try_new(*a, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let ev = schur.complex_eigenvalues();
    let mut out = [Complex64::new(0.0, 0.0); 8];
    for (o, e) in out.iter_mut().zip(ev.iter()) {
        *o = Complex64::new(e.re, e.im);
    }
    Ok(out)
}

/// Spectral stability test: every eigenvalue must have a strictly negative
/// real part.
pub fn stability(a: &Matrix8) -> Result<StabilityReport> {
    let eigenvalues = eigenvalues(a)?;
    let max_real_eigenvalue = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        max_real_eigenvalue,
        stable: max_real_eigenvalue < 0.0,
        eigenvalues,
    })
}

/// A symmetric 8x8 covariance matrix of the quadrature fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix8);

/// The symplectic form for `n` modes, built from 2x2 blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form<const N: usize>() -> SMatrix<f64, N, N> {
    let mut omega = SMatrix::<f64, N, N>::zeros();
    for k in (0..N).step_by(2) {
        omega[(k, k + 1)] = 1.0;
        omega[(k + 1, k)] = -1.0;
    }
    omega
}

impl CovarianceMatrix {
    /// Wraps `m` after symmetrizing it.
    pub fn symmetrized(m: Matrix8) -> Self {
        CovarianceMatrix(0.5 * (m + m.transpose()))
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    pub fn into_inner(self) -> Matrix8 {
        self.0
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.0[(i, i)]
    }

    /// Frobenius norm of the antisymmetric part relative to the whole.
    pub fn asymmetry(&self) -> f64 {
        let n = self.0.norm();
        if n == 0.0 {
            0.0
        } else {
            (self.0 - self.0.transpose()).norm() / n
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.symmetric_eigenvalues().min()
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + (i/2) Omega`;
    /// non-negative for a physical state.
    ///
    /// Evaluated through the real symmetric embedding `[[V, -K], [K, V]]`
    /// with `K = Omega / 2`, whose spectrum is that of the Hermitian matrix
    /// with every eigenvalue doubled.
    pub fn uncertainty_margin(&self) -> f64 {
        let k = 0.5 * symplectic_form::<8>();
        let mut big = SMatrix::<f64, 16, 16>::zeros();
        big.fixed_view_mut::<8, 8>(0, 0).copy_from(&self.0);
        big.fixed_view_mut::<8, 8>(8, 8).copy_from(&self.0);
        big.fixed_view_mut::<8, 8>(0, 8).copy_from(&(-k));
        big.fixed_view_mut::<8, 8>(8, 0).copy_from(&k);
        big.symmetric_eigenvalues().min()
    }

    /// Symmetric, positive semidefinite and satisfying the uncertainty
    /// relation, each to within `tol` (scaled by the matrix norm).
    pub fn is_physical(&self, tol: f64) -> bool {
        let scale = self.0.norm().max(1.0);
        self.asymmetry() <= 1e-12
            && self.min_eigenvalue() >= -tol * scale
            && self.uncertainty_margin() >= -tol * scale
    }
}

/// `||A V + V A^T + D||_F / ||D||_F` (absolute when `D = 0`).
pub fn lyapunov_residual(a: &Matrix8, d: &Matrix8, v: &Matrix8) -> f64 {
    let r = (a * v + v * a.transpose() + d).norm();
    let dn = d.norm();
    if dn == 0.0 {
        r
    } else {
        r / dn
    }
}

const N: usize = 8;
const UNKNOWNS: usize = N * (N + 1) / 2;

fn packed(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * N - i * (i + 1) / 2 + j
}

/// The 36x36 operator `V -> A V + V A^T` restricted to symmetric `V`.
fn lyapunov_operator(a: &Matrix8) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(UNKNOWNS, UNKNOWNS);
    for i in 0..N {
        for j in i..N {
            let row = packed(i, j);
            for k in 0..N {
                m[(row, packed(k, j))] += a[(i, k)];
                m[(row, packed(i, k))] += a[(j, k)];
            }
        }
    }
    m
}

fn pack(s: &Matrix8) -> DVector<f64> {
    let mut v = DVector::zeros(UNKNOWNS);
    for i in 0..N {
        for j in i..N {
            v[packed(i, j)] = s[(i, j)];
        }
    }
    v
}

fn unpack(v: &DVector<f64>) -> Matrix8 {
    Matrix8::from_fn(|i, j| v[packed(i, j)])
}

/// Solves `A V + V A^T = -D` for a Hurwitz `A`.
///
/// Direct LU solve of the symmetric vectorized system (36 unknowns) on the
/// problem rescaled by the largest entry of `A`, followed by one step of
/// iterative refinement.
pub fn solve_lyapunov(a: &Matrix8, d: &Matrix8) -> Result<CovarianceMatrix> {
    let report = stability(a)?;
    if !report.stable {
        let z = report.slowest();
        return Err(Error::Unstable { re: z.re, im: z.im });
    }
    let scale = a.amax();
    let a_s = a / scale;
    let d_sym = 0.5 * (d + d.transpose()) / scale;

    let op = lyapunov_operator(&a_s);
    let lu = op.lu();
    let rhs = -pack(&d_sym);
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Lyapunov operator".into()))?;
    // one refinement step
    let r = &rhs - &lu_apply(&a_s, &x);
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let v = unpack(&x);
    if v.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical("non-finite Lyapunov solution".into()));
    }
    Ok(CovarianceMatrix::symmetrized(v))
}

fn lu_apply(a: &Matrix8, x: &DVector<f64>) -> DVector<f64> {
    let v = unpack(x);
    pack(&(a * v + v * a.transpose()))
}

/// Base interval of the integrator, in steps.
const BASE_STEPS: usize = 1024;

/// Integrates `dV/dt = A V + V A^T + D` from `v0` to `t_final`. Serves as a
/// time-domain check on [`solve_lyapunov`].
///
/// RK4 with step `dt` integrates the propagator `Phi' = A Phi` and the
/// zero-start covariance `Q' = A Q + Q A^T + D` over a base interval `tau`
/// of at most [`BASE_STEPS`] steps; the interval is then doubled via
/// `Phi(2 tau) = Phi(tau)^2`, `Q(2 tau) = Q(tau) + Phi(tau) Q(tau) Phi(tau)^T`
/// until it reaches `t_final`, and `V = Phi V0 Phi^T + Q`.
pub fn integrate_covariance(
    a: &Matrix8,
    d: &Matrix8,
    v0: &CovarianceMatrix,
    t_final: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", "must be finite and > 0"));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final", "must be finite and >= 0"));
    }
    let mut doublings = 0u32;
    while t_final / 2f64.powi(doublings as i32) > BASE_STEPS as f64 * dt {
        doublings += 1;
    }
    let tau = t_final / 2f64.powi(doublings as i32);
    let steps = (tau / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { tau / steps as f64 };

    let bound = 1e8 * (v0.matrix().norm() + d.norm() * t_final + 1.0);
    let q_rhs = |v: &Matrix8| a * v + v * a.transpose() + d;
    let phi_rhs = |m: &Matrix8| a * m;
    let mut q = Matrix8::zeros();
    let mut phi = Matrix8::identity();
    for n in 0..steps {
        q += rk4_increment(&q_rhs, &q, h);
        phi += rk4_increment(&phi_rhs, &phi, h);
        let norm = q.norm() + phi.norm();
        if !norm.is_finite() || norm > bound {
            return Err(Error::StepInstability {
                t: (n + 1) as f64 * h,
                dt,
            });
        }
    }
    for _ in 0..doublings {
        q += phi * q * phi.transpose();
        phi = phi * phi;
    }
    let v = phi * v0.matrix() * phi.transpose() + q;
    if !v.norm().is_finite() {
        return Err(Error::StepInstability { t: t_final, dt });
    }
    Ok(CovarianceMatrix::symmetrized(v))
}

fn rk4_increment(f: &impl Fn(&Matrix8) -> Matrix8, y: &Matrix8, h: f64) -> Matrix8 {
    let k1 = f(y);
    let k2 = f(&(y + 0.5 * h * k1));
    let k3 = f(&(y + 0.5 * h * k2));
    let k4 = f(&(y + h * k3));
    (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}
