//! Mean-field steady state of the driven hybrid system.
//!
//! Every mean value is a closed-form function of the static mirror
//! displacement `x_s`: the displacement shifts the cavity detuning and the
//! circuit frequency, which fix the intracavity amplitude and the capacitor
//! charge, which in turn push the mirror. The self-consistency is therefore a
//! single real equation `x = F(x)`, solved here by damped fixed-point
//! iteration under continuation in the drive amplitude.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{drive_amplitude, PhysicalParams};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

const INITIAL_STAGES: usize = 16;
const MIN_DAMPING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a_s: Complex64,
    pub c_s: Complex64,
    pub q_s: f64,
    pub x_s: f64,
    pub p_s: f64,
    pub phi_s: f64,
}

impl SteadyState {
    pub fn zero() -> Self {
        SteadyState {
            a_s: Complex64::new(0.0, 0.0),
            c_s: Complex64::new(0.0, 0.0),
            q_s: 0.0,
            x_s: 0.0,
            p_s: 0.0,
            phi_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Iteration used inside each continuation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// `x <- x + lambda (F(x) - x)` with adaptive damping `lambda` in (0, 1].
    DampedFixedPoint,
    /// Damped Newton on `F(x) - x` with a central-difference slope.
    Newton,
}

/// The scalar map `x -> F(x)` at a given drive amplitude.
#[derive(Debug, Clone, Copy)]
struct ScalarMap {
    drive: f64,
    kappa: f64,
    delta_cav: f64,
    /// `(G_at')^2 / (gamma_at + i Delta_at)`
    atom_shift: Complex64,
    atom_response: Complex64,
    g_om: f64,
    g_lc: f64,
    omega_m: f64,
    omega_lc: f64,
    bias: f64,
}

impl ScalarMap {
    fn new(params: &PhysicalParams, drive: f64) -> Self {
        let atom_den = Complex64::new(params.gamma_at, params.delta_at);
        ScalarMap {
            drive,
            kappa: params.kappa,
            delta_cav: params.delta_cav,
            atom_shift: params.g_at_eff * params.g_at_eff / atom_den,
            atom_response: Complex64::new(0.0, -params.g_at_eff) / atom_den,
            g_om: params.g_om(),
            g_lc: params.g_lc_bare,
            omega_m: params.omega_m,
            omega_lc: params.omega_lc,
            bias: params.bias_drive(),
        }
    }

    fn omega_lc_eff(&self, x: f64) -> Result<f64> {
        let w = self.omega_lc + 2.0 * self.g_lc * x;
        if w > 0.0 && w.is_finite() {
            Ok(w)
        } else {
            Err(Error::FrequencyCollapse { omega_lc_eff: w, x })
        }
    }

    fn cavity_amplitude(&self, x: f64) -> Complex64 {
        let den = Complex64::new(self.kappa, self.delta_cav - self.g_om * x) + self.atom_shift;
        self.drive / den
    }

    fn charge(&self, x: f64) -> Result<f64> {
        Ok(self.bias / self.omega_lc_eff(x)?)
    }

    fn displacement(&self, a: Complex64, q: f64) -> f64 {
        (self.g_om * a.norm_sqr() - self.g_lc * q * q) / self.omega_m
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let a = self.cavity_amplitude(x);
        let q = self.charge(x)?;
        Ok(self.displacement(a, q))
    }

    fn state(&self, x: f64) -> Result<SteadyState> {
        let a = self.cavity_amplitude(x);
        Ok(SteadyState {
            a_s: a,
            c_s: self.atom_response * a,
            q_s: self.charge(x)?,
            x_s: x,
            p_s: 0.0,
            phi_s: 0.0,
        })
    }

    /// Relative mismatch of `x = F(x)`.
    fn mismatch(&self, x: f64) -> Result<f64> {
        let f = self.eval(x)?;
        Ok(relative_gap(x, f))
    }
}

fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn relative_gap_c(lhs: Complex64, rhs: Complex64) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// Solves the mean-field equations by damped fixed-point iteration.
pub fn solve_steady_state(
    params: &PhysicalParams,
    tol: f64,
    max_iter: usize,
) -> Result<(SteadyState, FixedPointReport)> {
    solve_steady_state_with(params, tol, max_iter, Method::DampedFixedPoint)
}

/// Solves the mean-field equations, continuing in the drive amplitude from
/// the undriven fixed point `x_s = 0` so that the returned root is the branch
/// reached by ramping the laser up.
pub fn solve_steady_state_with(
    params: &PhysicalParams,
    tol: f64,
    max_iter: usize,
    method: Method,
) -> Result<(SteadyState, FixedPointReport)> {
    params.validate()?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    if max_iter == 0 {
        return Err(Error::param("max_iter", "must be >= 1"));
    }
    let drive = drive_amplitude(params);

    // Nothing pushes the mirror: x_s = 0 is exact.
    if params.g_om() * drive == 0.0 && params.g_lc_bare * params.bias_drive() == 0.0 {
        let map = ScalarMap::new(params, drive);
        let ss = map.state(0.0)?;
        let residual = verify_fixed_point(params, &ss);
        return Ok((
            ss,
            FixedPointReport {
                iterations: 0,
                residual,
                converged: residual <= tol,
            },
        ));
    }

    let mut budget = max_iter;
    let mut used = 0usize;
    let mut x = 0.0;
    let mut fraction = 0.0f64;
    let mut step = 1.0 / INITIAL_STAGES as f64;
    while fraction < 1.0 {
        let target = (fraction + step).min(1.0);
        let map = ScalarMap::new(params, drive * target);
        match solve_stage(&map, x, tol, budget, method) {
            Ok((root, iters)) => {
                used += iters;
                budget = budget.saturating_sub(iters);
                x = root;
                fraction = target;
                step = (step * 2.0).min(1.0 - fraction).max(1e-12);
            }
            Err(StageFailure::Collapse(e)) => return Err(e),
            Err(StageFailure::Stalled { iters, last, blocked }) => {
                used += iters;
                budget = budget.saturating_sub(iters);
                if budget == 0 || step < 1e-6 {
                    if let Some(e) = blocked {
                        return Err(e);
                    }
                    let map = ScalarMap::new(params, drive * target);
                    let residual = map.mismatch(last).unwrap_or(f64::INFINITY);
                    return Err(Error::NotConverged {
                        iterations: used,
                        residual,
                        last_x: last,
                    });
                }
                step *= 0.5;
            }
        }
    }

    let map = ScalarMap::new(params, drive);
    let ss = map.state(x)?;
    let residual = verify_fixed_point(params, &ss);
    if residual > tol {
        return Err(Error::NotConverged {
            iterations: used,
            residual,
            last_x: x,
        });
    }
    Ok((
        ss,
        FixedPointReport {
            iterations: used,
            residual,
            converged: true,
        },
    ))
}

enum StageFailure {
    Collapse(Error),
    /// `blocked` holds the collapse that stopped the last step, if any.
    Stalled { iters: usize, last: f64, blocked: Option<Error> },
}

impl From<Error> for StageFailure {
    fn from(e: Error) -> Self {
        StageFailure::Collapse(e)
    }
}

fn solve_stage(
    map: &ScalarMap,
    start: f64,
    tol: f64,
    budget: usize,
    method: Method,
) -> std::result::Result<(f64, usize), StageFailure> {
    let attempt = match method {
        Method::DampedFixedPoint => damped_fixed_point(map, start, tol, budget)?,
        Method::Newton => damped_newton(map, start, tol, budget)?,
    };
    match attempt {
        Ok(done) => Ok(done),
        Err((iters, blocked)) => {
            // fall back to bisection if a bracket sits close to the start
            let left = budget.saturating_sub(iters);
            match bracket_and_bisect(map, start, tol, left)? {
                Ok((root, extra)) => Ok((root, iters + extra)),
                Err(wall) => Err(StageFailure::Stalled {
                    iters: budget.min(iters.max(1)),
                    last: start,
                    blocked: wall.or(blocked),
                }),
            }
        }
    }
}

type Attempt = std::result::Result<(f64, usize), (usize, Option<Error>)>;

/// Returns `Ok(Ok((root, iters)))`, or `Ok(Err((iters, blocked)))` when the
/// iteration stalls.
fn damped_fixed_point(
    map: &ScalarMap,
    start: f64,
    tol: f64,
    budget: usize,
) -> Result<Attempt> {
    let mut x = start;
    let mut fx = map.eval(x)?;
    let mut gap = (fx - x).abs();
    let mut damping = 1.0f64;
    let mut blocked = None;
    for it in 1..=budget {
        if relative_gap(x, fx) <= tol {
            return Ok(Ok((x, it - 1)));
        }
        let trial = x + damping * (fx - x);
        let f_trial = match map.eval(trial) {
            Ok(v) => v,
            Err(e) => {
                blocked = Some(e);
                damping *= 0.5;
                if damping < MIN_DAMPING {
                    return Ok(Err((it, blocked)));
                }
                continue;
            }
        };
        let trial_gap = (f_trial - trial).abs();
        if trial_gap < gap {
            x = trial;
            fx = f_trial;
            gap = trial_gap;
            damping = (damping * 1.5).min(1.0);
            blocked = None;
        } else {
            damping *= 0.5;
            if damping < MIN_DAMPING {
                return Ok(Err((it, blocked)));
            }
        }
    }
    if relative_gap(x, fx) <= tol {
        Ok(Ok((x, budget)))
    } else {
        Ok(Err((budget, blocked)))
    }
}

fn damped_newton(
    map: &ScalarMap,
    start: f64,
    tol: f64,
    budget: usize,
) -> Result<Attempt> {
    let residual = |x: f64| -> Result<f64> { Ok(map.eval(x)? - x) };
    let mut x = start;
    let mut g = residual(x)?;
    for it in 1..=budget {
        let fx = g + x;
        if relative_gap(x, fx) <= tol {
            return Ok(Ok((x, it - 1)));
        }
        let h = 1e-7 * x.abs().max(1.0);
        let slope = match (residual(x + h), residual(x - h)) {
            (Ok(up), Ok(down)) => (up - down) / (2.0 * h),
            _ => -1.0,
        };
        let full = if slope != 0.0 && slope.is_finite() { -g / slope } else { g };
        let mut t = 1.0;
        let mut blocked = None;
        loop {
            let trial = x + t * full;
            match residual(trial) {
                Ok(gt) if gt.abs() < g.abs() => {
                    x = trial;
                    g = gt;
                    break;
                }
                Ok(_) => {}
                Err(e) => blocked = Some(e),
            }
            t *= 0.5;
            if t < MIN_DAMPING {
                return Ok(Err((it, blocked)));
            }
        }
    }
    Ok(Err((budget, None)))
}

fn bracket_and_bisect(
    map: &ScalarMap,
    start: f64,
    tol: f64,
    budget: usize,
) -> Result<std::result::Result<(f64, usize), Option<Error>>> {
    let g = |x: f64| -> Result<f64> { Ok(map.eval(x)? - x) };
    let g0 = g(start)?;
    if g0 == 0.0 {
        return Ok(Ok((start, 0)));
    }
    // Expand toward the side F points to until the sign flips.
    let dir = g0.signum();
    let mut h = 1e-3 * start.abs().max(1.0);
    let mut lo = start;
    let mut glo = g0;
    let mut hi = None;
    let mut used = 0;
    while used < budget && h.is_finite() {
        used += 1;
        let probe = start + dir * h;
        let gp = match g(probe) {
            Ok(v) => v,
            Err(e) => return Ok(Err(Some(e))),
        };
        if gp.signum() != g0.signum() {
            hi = Some(probe);
            break;
        }
        lo = probe;
        glo = gp;
        h *= 2.0;
    }
    let Some(mut hi) = hi else { return Ok(Err(None)) };
    while used < budget {
        used += 1;
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if relative_gap(mid, gm + mid) <= tol || (hi - lo).abs() <= f64::EPSILON * mid.abs() {
            return Ok(Ok((mid, used)));
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(Err(None))
}

/// Largest relative violation of the five mean-field relations at `ss`
/// (0 for an exact fixed point).
pub fn verify_fixed_point(params: &PhysicalParams, ss: &SteadyState) -> f64 {
    let map = ScalarMap::new(params, drive_amplitude(params));
    let a_rhs = map.cavity_amplitude(ss.x_s);
    let c_rhs = map.atom_response * ss.a_s;
    let q_rhs = match map.charge(ss.x_s) {
        Ok(q) => q,
        Err(_) => return f64::INFINITY,
    };
    let x_rhs = map.displacement(ss.a_s, ss.q_s);
    let checks = [
        relative_gap_c(ss.a_s, a_rhs),
        relative_gap_c(ss.c_s, c_rhs),
        relative_gap(ss.q_s, q_rhs),
        relative_gap(ss.x_s, x_rhs),
        ss.p_s.abs() + ss.phi_s.abs(),
    ];
    checks.into_iter().fold(0.0, f64::max)
}

/// Diagnostic: every root of `x = F(x)` on `[lo, hi]`, located by sign
/// changes on an `n`-point grid and refined by bisection.
pub fn scan_roots(params: &PhysicalParams, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) {
        return Err(Error::param("scan_roots", "need hi > lo and at least 2 points"));
    }
    let map = ScalarMap::new(params, drive_amplitude(params));
    let g = |x: f64| map.eval(x).map(|f| f - x);
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in &xs {
        let Ok(gx) = g(x) else {
            prev = None;
            continue;
        };
        if gx == 0.0 {
            roots.push(x);
        } else if let Some((xp, gp)) = prev {
            if gp != 0.0 && gp.signum() != gx.signum() {
                let (mut a, mut b, mut ga) = (xp, x, gp);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let gm = g(m)?;
                    if gm.signum() == ga.signum() {
                        a = m;
                        ga = gm;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        prev = Some((x, gx));
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undriven() -> PhysicalParams {
        let mut p = PhysicalParams::table1();
        p.laser_power = 0.0;
        p.dc_bias_voltage = 0.0;
        p
    }

    #[test]
    fn undriven_fixed_point_is_zero() {
        let (ss, report) = solve_steady_state(&undriven(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(ss, SteadyState::zero());
        assert_eq!(report.residual, 0.0);
        assert!(report.converged);
        assert_eq!(verify_fixed_point(&undriven(), &SteadyState::zero()), 0.0);
    }

    #[test]
    fn decoupled_cavity_atom_closed_form() {
        let p = PhysicalParams::table1();
        let mut map = ScalarMap::new(&p, drive_amplitude(&p));
        map.g_om = 0.0;
        map.g_lc = 0.0;
        // F vanishes identically, so x_s = 0 without iterating
        assert_eq!(map.eval(0.0).unwrap(), 0.0);
        assert_eq!(map.eval(1e4).unwrap(), 0.0);
        let ss = map.state(0.0).unwrap();
        let e = drive_amplitude(&p);
        let atoms = Complex64::new(p.gamma_at, p.delta_at);
        let expected = e / (Complex64::new(p.kappa, p.delta_cav) + p.g_at_eff * p.g_at_eff / atoms);
        assert!((ss.a_s - expected).norm() <= 1e-14 * expected.norm());
    }

    #[test]
    fn table1_converges_by_back_substitution() {
        let p = PhysicalParams::table1();
        let (ss, report) = solve_steady_state(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(report.converged);
        assert!(report.residual <= 1e-10, "{report:?}");
        // independent back-substitution of each relation
        let e = drive_amplitude(&p);
        let g_om = p.g_om();
        let atoms = Complex64::new(p.gamma_at, p.delta_at);
        let a = e / (Complex64::new(p.kappa, p.delta_cav - g_om * ss.x_s)
            + p.g_at_eff * p.g_at_eff / atoms);
        assert!((a - ss.a_s).norm() / a.norm() < 1e-12);
        let x = g_om * ss.a_s.norm_sqr() / p.omega_m;
        assert!((x - ss.x_s).abs() / x.abs() < 1e-10);
        assert!(ss.x_s > 0.0);
        assert_eq!(ss.p_s, 0.0);
        assert_eq!(ss.phi_s, 0.0);
    }

    #[test]
    fn atomic_amplitude_is_closed_form() {
        let p = PhysicalParams::table1();
        let (ss, _) = solve_steady_state(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let c = Complex64::new(0.0, -p.g_at_eff) * ss.a_s / Complex64::new(p.gamma_at, p.delta_at);
        assert!((ss.c_s - c).norm() <= 1e-14 * c.norm());
    }

    #[test]
    fn residual_grows_linearly_with_perturbation() {
        let p = PhysicalParams::table1();
        let (ss, _) = solve_steady_state(&p, 1e-13, DEFAULT_MAX_ITER).unwrap();
        let r = |eps: f64| {
            let mut s = ss;
            s.x_s += eps * ss.x_s;
            verify_fixed_point(&p, &s)
        };
        let r1 = r(1e-6);
        let r2 = r(2e-6);
        assert!(r1 > 1e-8);
        assert!((r2 / r1 - 2.0).abs() < 0.01, "{r1} {r2}");
    }

    #[test]
    fn fixed_point_and_newton_agree() {
        let mut p = PhysicalParams::table1();
        for &power in &[1e-3, 10e-3, 35e-3] {
            p.laser_power = power;
            let (a, _) = solve_steady_state_with(&p, 1e-12, DEFAULT_MAX_ITER, Method::DampedFixedPoint).unwrap();
            let (b, _) = solve_steady_state_with(&p, 1e-12, DEFAULT_MAX_ITER, Method::Newton).unwrap();
            assert!(relative_gap(a.x_s, b.x_s) <= 1e-8, "{} vs {}", a.x_s, b.x_s);
        }
    }

    #[test]
    fn amplitude_monotone_in_drive() {
        let mut p = PhysicalParams::table1();
        let mut last = 0.0;
        for k in 1..=8 {
            p.laser_power = 5e-3 * k as f64;
            let (ss, _) = solve_steady_state(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            assert!(ss.a_s.norm() > last);
            last = ss.a_s.norm();
        }
    }

    #[test]
    fn bias_sets_charge() {
        let mut p = PhysicalParams::table1();
        p.inductance = Some(1e-6);
        p.dc_bias_voltage = 1e-6;
        p.g_lc_bare = 1e-3;
        let (ss, _) = solve_steady_state(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let w = p.omega_lc + 2.0 * p.g_lc_bare * ss.x_s;
        assert!((ss.q_s - p.bias_drive() / w).abs() <= 1e-12 * ss.q_s.abs());
        assert!(ss.q_s > 0.0);
    }

    #[test]
    fn frequency_collapse_is_reported() {
        let mut p = PhysicalParams::table1();
        p.inductance = Some(1e-6);
        p.dc_bias_voltage = 1e-6;
        // strong negative coupling drives omega_LC' through zero once the
        // radiation pressure displaces the mirror
        p.g_lc_bare = -1e5;
        let err = solve_steady_state(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap_err();
        assert!(matches!(err, Error::FrequencyCollapse { .. }), "{err}");
        assert!(err.to_string().contains("frequency collapse"));
    }

    #[test]
    fn starved_budget_reports_last_iterate() {
        let p = PhysicalParams::table1();
        match solve_steady_state(&p, 1e-14, 3) {
            Err(Error::NotConverged { iterations, residual, .. }) => {
                assert!(iterations <= 3);
                assert!(residual > 1e-14);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn bistable_scan_finds_three_roots() {
        let mut p = PhysicalParams::table1();
        // large blue-side cavity detuning with strong drive folds the response
        p.delta_cav = 3.0 * p.omega_m;
        p.laser_power = 0.3;
        let roots = scan_roots(&p, 0.0, 2e6, 20_001).unwrap();
        assert_eq!(roots.len(), 3, "{roots:?}");
        let (ss, _) = solve_steady_state(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        // continuation from the undriven state stays on the lower branch
        assert!(relative_gap(ss.x_s, roots[0]) < 1e-8, "{} {:?}", ss.x_s, roots);
    }
}
