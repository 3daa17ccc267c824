//! Single-point evaluation: parameters -> drift/diffusion -> stability ->
//! covariance -> entanglement.

use crate::dynamics::{build_diffusion_scaled, build_drift, Bipartition, Matrix8};
use crate::entanglement::{bipartite_entanglement, EntanglementReport};
use crate::error::Result;
use crate::lyapunov::{solve_lyapunov, stability, CovarianceMatrix, StabilityReport};
use crate::meanfield::{solve_steady_state, FixedPointReport, SteadyState, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::params::{effective_from_physical, EffectiveParams, ParamConfig};

/// The linearized model at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub effective: EffectiveParams,
    pub lc_noise_factor: f64,
    /// Present in PHYSICAL mode.
    pub mean_field: Option<(SteadyState, FixedPointReport)>,
}

impl OperatingPoint {
    pub fn effective(effective: EffectiveParams) -> Self {
        OperatingPoint {
            effective,
            lc_noise_factor: 1.0,
            mean_field: None,
        }
    }
}

/// Resolves a parameter config, running the mean-field solve in PHYSICAL mode.
pub fn resolve(config: &ParamConfig) -> Result<OperatingPoint> {
    match config {
        ParamConfig::Effective(input) => Ok(OperatingPoint {
            effective: input.resolve()?,
            lc_noise_factor: input.lc_noise_factor,
            mean_field: None,
        }),
        ParamConfig::Physical(params) => {
            let (ss, report) = solve_steady_state(params, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let effective = effective_from_physical(params, &ss)?;
            effective.validate()?;
            Ok(OperatingPoint {
                effective,
                lc_noise_factor: params.lc_noise_factor,
                mean_field: Some((ss, report)),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointEvaluation {
    pub drift: Matrix8,
    pub diffusion: Matrix8,
    pub stability: StabilityReport,
    /// `None` when the drift matrix is not Hurwitz.
    pub covariance: Option<CovarianceMatrix>,
    pub entanglement: Vec<EntanglementReport>,
}

impl PointEvaluation {
    pub fn log_negativity(&self, b: Bipartition) -> Option<f64> {
        self.entanglement
            .iter()
            .find(|r| r.bipartition == b)
            .map(|r| r.log_negativity)
    }
}

/// Evaluates the linearized model. An unstable drift matrix is not an
/// error here: the result simply carries no covariance or entanglement.
pub fn evaluate(point: &OperatingPoint, bipartitions: &[Bipartition]) -> Result<PointEvaluation> {
    let drift = build_drift(&point.effective);
    let diffusion = build_diffusion_scaled(&point.effective, point.lc_noise_factor);
    let stability = stability(&drift)?;
    if !stability.stable {
        return Ok(PointEvaluation {
            drift,
            diffusion,
            stability,
            covariance: None,
            entanglement: Vec::new(),
        });
    }
    let v = solve_lyapunov(&drift, &diffusion)?;
    let entanglement = bipartitions
        .iter()
        .map(|&b| bipartite_entanglement(&v, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointEvaluation {
        drift,
        diffusion,
        stability,
        covariance: Some(v),
        entanglement,
    })
}
