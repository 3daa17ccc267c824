#![allow(dead_code)]

use std::f64::consts::PI;

use fourmode::dynamics::Matrix8;
use fourmode::lyapunov::{stability, symplectic_form};
use fourmode::params::EffectiveParams;
use fourmode::{build_drift, EffectiveInput};
use nalgebra::{Matrix4, SMatrix, SVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const OMEGA_M: f64 = 2.0 * PI * 1e7;

pub fn figure_base() -> EffectiveParams {
    EffectiveInput::figure_base().resolve().unwrap()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// A random parameter point, not necessarily stable.
pub fn random_params(rng: &mut ChaCha8Rng) -> EffectiveParams {
    let w = OMEGA_M;
    EffectiveParams {
        omega_m: w,
        kappa: log_uniform(rng, 0.05, 3.0) * w,
        gamma_m: log_uniform(rng, 1e-6, 1e-2) * w,
        gamma_at: log_uniform(rng, 0.05, 3.0) * w,
        gamma_lc: log_uniform(rng, 1e-6, 1e-2) * w,
        delta_cav_eff: rng.random_range(-3.0..3.0) * w,
        delta_at: rng.random_range(-4.0..4.0) * w,
        omega_lc_eff: rng.random_range(0.2..2.0) * w,
        g_om_eff: rng.random_range(0.0..1.0) * w,
        g_lc_eff: rng.random_range(-1.0..1.0) * w,
        g_at_eff: rng.random_range(0.0..1.0) * w,
        nbar_m: rng.random_range(0.0..100.0),
        nbar_lc: rng.random_range(0.0..100.0),
    }
}

/// Draws until the drift matrix is Hurwitz with a margin of at least
/// `1e-7 omega_m`.
pub fn random_stable_params(rng: &mut ChaCha8Rng) -> EffectiveParams {
    loop {
        let p = random_params(rng);
        let s = stability(&build_drift(&p)).unwrap();
        if s.max_real_eigenvalue < -1e-7 * p.omega_m {
            return p;
        }
    }
}

/// Solves `A V + V A^T = -D` through the full 64 x 64 Kronecker system
/// `(I (x) A + A (x) I) vec V = -vec D`, with no symmetry reduction.
pub fn kronecker_lyapunov(a: &Matrix8, d: &Matrix8) -> Matrix8 {
    let n = 8;
    let scale = a.amax();
    let a = a / scale;
    let mut big = nalgebra::DMatrix::<f64>::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            // row (i, j) of vec V (column-major: index j * n + i)
            let row = j * n + i;
            for k in 0..n {
                big[(row, j * n + k)] += a[(i, k)];
                big[(row, k * n + i)] += a[(j, k)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(n * n, (-d / scale).iter().copied());
    let x = big.lu().solve(&rhs).expect("singular Kronecker system");
    Matrix8::from_iterator(x.iter().copied())
}

// --- two-mode Gaussian states -------------------------------------------

fn rotation(theta: f64) -> SMatrix<f64, 2, 2> {
    let (s, c) = theta.sin_cos();
    SMatrix::<f64, 2, 2>::new(c, -s, s, c)
}

fn local(s1: SMatrix<f64, 2, 2>, s2: SMatrix<f64, 2, 2>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&s1);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&s2);
    m
}

fn squeezer(r: f64) -> SMatrix<f64, 2, 2> {
    SMatrix::<f64, 2, 2>::new(r.exp(), 0.0, 0.0, (-r).exp())
}

/// Beam splitter mixing `x1, x2` and `p1, p2` with angle `theta`.
fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, s, //
        -s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

/// A random symplectic 4 x 4 matrix built from local rotations and
/// squeezers, a beam splitter and a two-mode squeezer.
pub fn random_symplectic(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let l1 = local(
        rotation(r(0.0, 2.0 * PI)) * squeezer(r(-0.6, 0.6)),
        rotation(r(0.0, 2.0 * PI)) * squeezer(r(-0.6, 0.6)),
    );
    let l2 = local(rotation(r(0.0, 2.0 * PI)), rotation(r(0.0, 2.0 * PI)));
    l2 * beam_splitter(r(0.0, PI)) * two_mode_squeezer(r(0.0, 0.8)) * l1
}

/// A random physical two-mode covariance matrix (vacuum variance 1/2).
pub fn random_physical_covariance(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let nu1 = 0.5 + rng.random_range(0.0..2.0f64).powi(2);
    let nu2 = 0.5 + rng.random_range(0.0..2.0f64).powi(2);
    let s = random_symplectic(rng);
    let w = Matrix4::from_diagonal(&SVector::<f64, 4>::from([nu1, nu1, nu2, nu2]));
    let v = s * w * s.transpose();
    (v + v.transpose()) * 0.5
}

/// Smallest symplectic eigenvalue of the partial transpose, from the
/// spectrum of `Omega V~` (eigenvalues `+- i nu`).
pub fn pt_symplectic_oracle(v: &Matrix4<f64>) -> f64 {
    let flip = Matrix4::from_diagonal(&SVector::<f64, 4>::from([1.0, 1.0, 1.0, -1.0]));
    let vt = flip * v * flip;
    let m = symplectic_form::<4>() * vt;
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
