mod common;

use common::OMEGA_M;
use fourmode::dynamics::{build_diffusion, build_drift, Bipartition};
use fourmode::entanglement::{bipartite_entanglement, smallest_symplectic_eigenvalue, ReducedCovariance};
use fourmode::lyapunov::{lyapunov_residual, solve_lyapunov, stability};
use fourmode::params::EffectiveParams;
use fourmode::routh::routh_hurwitz;
use nalgebra::{Matrix2, Matrix4};
use proptest::prelude::*;

prop_compose! {
    fn effective_params()(
        kappa in 0.05f64..3.0,
        gamma_at in 0.05f64..3.0,
        gamma_m in 1e-5f64..1e-2,
        gamma_lc in 1e-5f64..1e-2,
        delta_cav in -3.0f64..3.0,
        delta_at in -4.0f64..4.0,
        omega_lc in 0.2f64..2.0,
        g_om in 0.0f64..1.0,
        g_lc in -1.0f64..1.0,
        g_at in 0.0f64..1.0,
        nbar_m in 0.0f64..200.0,
        nbar_lc in 0.0f64..200.0,
    ) -> EffectiveParams {
        let w = OMEGA_M;
        EffectiveParams {
            omega_m: w,
            kappa: kappa * w,
            gamma_m: gamma_m * w,
            gamma_at: gamma_at * w,
            gamma_lc: gamma_lc * w,
            delta_cav_eff: delta_cav * w,
            delta_at: delta_at * w,
            omega_lc_eff: omega_lc * w,
            g_om_eff: g_om * w,
            g_lc_eff: g_lc * w,
            g_at_eff: g_at * w,
            nbar_m,
            nbar_lc,
        }
    }
}

fn local_symplectic(theta: f64, r: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c) * Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn steady_covariance_is_a_physical_state(p in effective_params()) {
        let a = build_drift(&p);
        let s = stability(&a).unwrap();
        prop_assume!(s.max_real_eigenvalue < -1e-7 * p.omega_m);
        let d = build_diffusion(&p);
        let v = solve_lyapunov(&a, &d).unwrap();
        prop_assert!(lyapunov_residual(&a, &d, v.matrix()) <= 1e-9);
        prop_assert_eq!(v.asymmetry(), 0.0);
        prop_assert!(v.uncertainty_margin() >= -1e-8 * v.matrix().amax(), "margin {}", v.uncertainty_margin());
        for b in Bipartition::all_pairs() {
            let e = bipartite_entanglement(&v, b).unwrap();
            prop_assert!(e.log_negativity >= 0.0);
            prop_assert!(e.eta_minus > 0.0);
            let swapped = bipartite_entanglement(&v, b.swapped()).unwrap();
            prop_assert!((swapped.eta_minus - e.eta_minus).abs() <= 1e-12 * e.eta_minus.max(1.0));
        }
    }

    #[test]
    fn routh_agrees_with_spectrum_off_the_boundary(p in effective_params()) {
        let a = build_drift(&p);
        let s = stability(&a).unwrap();
        prop_assume!(s.max_real_eigenvalue.abs() > 1e-6 * p.omega_m);
        prop_assert_eq!(routh_hurwitz(&a).stable, s.stable);
    }

    #[test]
    fn eta_minus_is_invariant_under_local_operations(
        nu1 in 0.5f64..3.0, nu2 in 0.5f64..3.0, r in 0.0f64..0.9,
        t1 in 0.0f64..6.3, t2 in 0.0f64..6.3, s1 in -0.7f64..0.7, s2 in -0.7f64..0.7,
    ) {
        // thermal two-mode squeezed state
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let a = 0.5 * (nu1 + nu2) * c + 0.5 * (nu1 - nu2);
        let b = 0.5 * (nu1 + nu2) * c - 0.5 * (nu1 - nu2);
        let k = 0.5 * (nu1 + nu2) * s;
        let rc = ReducedCovariance {
            block_a: Matrix2::identity() * a,
            block_b: Matrix2::identity() * b,
            block_c: Matrix2::new(k, 0.0, 0.0, -k),
        };
        let before = smallest_symplectic_eigenvalue(&rc).unwrap();
        let (l1, l2) = (local_symplectic(t1, s1), local_symplectic(t2, s2));
        let mut l = Matrix4::zeros();
        l.fixed_view_mut::<2, 2>(0, 0).copy_from(&l1);
        l.fixed_view_mut::<2, 2>(2, 2).copy_from(&l2);
        let moved = ReducedCovariance::from_matrix(&(l * rc.to_matrix() * l.transpose()));
        let after = smallest_symplectic_eigenvalue(&moved).unwrap();
        prop_assert!((before - after).abs() < 1e-9, "{before} vs {after}");
    }
}
