//! One- and two-dimensional parameter sweeps.
//!
//! Axis values for angular-frequency parameters are given in units of the
//! base point's `omega_m`; every other parameter is given in SI units. The
//! recorded stability margin is the largest real part of the drift-matrix
//! spectrum, also in units of `omega_m`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Bipartition;
use crate::error::{Error, Result};
use crate::params::{AxisUnit, ParamConfig};
use crate::pipeline::{evaluate, resolve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `name:start:stop:count`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidSweep(format!(
                "axis `{s}` must look like name:start:stop:count"
            )));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSweep(format!("`{t}` in axis `{s}` is not a number")))
        };
        Ok(Axis {
            param: parts[0].trim().to_string(),
            start: num(parts[1])?,
            stop: num(parts[2])?,
            count: parts[3]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSweep(format!("bad count in axis `{s}`")))?,
        })
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ParamConfig,
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    pub bipartitions: Vec<Bipartition>,
    #[serde(default = "default_true")]
    pub record_stability: bool,
}

impl SweepSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let mut axes = vec![&self.axis1];
        axes.extend(self.axis2.as_ref());
        for axis in &axes {
            if axis.count < 2 {
                return Err(Error::InvalidSweep(format!(
                    "axis `{}` needs at least 2 points, got {}",
                    axis.param, axis.count
                )));
            }
            if !axis.start.is_finite() || !axis.stop.is_finite() {
                return Err(Error::InvalidSweep(format!("axis `{}` has a non-finite bound", axis.param)));
            }
            if self.base.field_unit(&axis.param).is_none() {
                return Err(Error::InvalidSweep(format!(
                    "`{}` is not a parameter of this mode",
                    axis.param
                )));
            }
        }
        if let Some(a2) = &self.axis2 {
            if a2.param == self.axis1.param {
                return Err(Error::InvalidSweep("both axes sweep the same parameter".into()));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        if self.axis2.is_some() {
            2
        } else {
            1
        }
    }

    fn axis_scale(&self, axis: &Axis) -> f64 {
        match self.base.field_unit(&axis.param) {
            Some(AxisUnit::OmegaM) => self.base.omega_m(),
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    Unstable,
    SolverFailed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Unstable => "unstable",
            PointStatus::SolverFailed => "solver-failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub status: PointStatus,
    /// Largest real part of the drift spectrum in units of `omega_m`.
    pub margin: Option<f64>,
    pub marginal: bool,
    /// One entry per requested bipartition; `None` unless the point is `Ok`.
    pub log_negativity: Vec<Option<f64>>,
    pub eta_minus: Vec<Option<f64>>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub axis1_unit: AxisUnit,
    pub axis2_unit: Option<AxisUnit>,
    pub bipartitions: Vec<Bipartition>,
    pub record_stability: bool,
    /// Row-major: axis1 outer, axis2 inner.
    pub points: Vec<PointRecord>,
}

impl SweepResult {
    pub fn dims(&self) -> usize {
        if self.axis2.is_some() {
            2
        } else {
            1
        }
    }

    /// Log-negativity column for bipartition index `k`.
    pub fn column(&self, k: usize) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.log_negativity[k]).collect()
    }

    pub fn index_of(&self, b: Bipartition) -> Option<usize> {
        self.bipartitions
            .iter()
            .position(|&x| x == b || x == b.swapped())
    }

    /// Largest recorded E_N for bipartition `b` and the point where it occurs.
    pub fn max_log_negativity(&self, b: Bipartition) -> Option<(f64, &PointRecord)> {
        let k = self.index_of(b)?;
        self.points
            .iter()
            .filter_map(|p| p.log_negativity[k].map(|v| (v, p)))
            .fold(None, |best: Option<(f64, &PointRecord)>, (v, p)| match best {
                Some((bv, _)) if bv >= v => best,
                _ => Some((v, p)),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Runs the sweep on the rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::Parallel)
}

/// Every grid point is evaluated independently; failures are recorded per
/// point and never abort the sweep. Output order is row-major regardless of
/// evaluation order.
pub fn run_sweep_with(spec: &SweepSpec, execution: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let v1 = spec.axis1.values();
    let v2: Vec<Option<f64>> = match &spec.axis2 {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let grid: Vec<(f64, Option<f64>)> = v1
        .iter()
        .flat_map(|&x| v2.iter().map(move |&y| (x, y)))
        .collect();
    let s1 = spec.axis_scale(&spec.axis1);
    let s2 = spec.axis2.as_ref().map(|a| spec.axis_scale(a)).unwrap_or(1.0);

    let eval = |&(x, y): &(f64, Option<f64>)| evaluate_point(spec, x, y, s1, s2);
    let points = match execution {
        Execution::Serial => grid.iter().map(eval).collect(),
        Execution::Parallel => grid.par_iter().map(eval).collect(),
    };
    Ok(SweepResult {
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        axis1_unit: spec.base.field_unit(&spec.axis1.param).unwrap_or(AxisUnit::Si),
        axis2_unit: spec.axis2.as_ref().and_then(|a| spec.base.field_unit(&a.param)),
        bipartitions: spec.bipartitions.clone(),
        record_stability: spec.record_stability,
        points,
    })
}

fn evaluate_point(spec: &SweepSpec, x: f64, y: Option<f64>, s1: f64, s2: f64) -> PointRecord {
    let nb = spec.bipartitions.len();
    let failed = |msg: String| PointRecord {
        axis1: x,
        axis2: y,
        status: PointStatus::SolverFailed,
        margin: None,
        marginal: false,
        log_negativity: vec![None; nb],
        eta_minus: vec![None; nb],
        message: Some(msg),
    };
    let mut config = spec.base.clone();
    if let Err(e) = config.set_field(&spec.axis1.param, x * s1) {
        return failed(e.to_string());
    }
    if let (Some(a2), Some(y)) = (&spec.axis2, y) {
        if let Err(e) = config.set_field(&a2.param, y * s2) {
            return failed(e.to_string());
        }
    }
    let point = match resolve(&config) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let omega_m = point.effective.omega_m;
    match evaluate(&point, &spec.bipartitions) {
        Ok(ev) => {
            let margin = spec
                .record_stability
                .then_some(ev.stability.max_real_eigenvalue / omega_m);
            let marginal = ev.stability.is_marginal(omega_m);
            if ev.stability.stable {
                PointRecord {
                    axis1: x,
                    axis2: y,
                    status: PointStatus::Ok,
                    margin,
                    marginal,
                    log_negativity: ev.entanglement.iter().map(|r| Some(r.log_negativity)).collect(),
                    eta_minus: ev.entanglement.iter().map(|r| Some(r.eta_minus)).collect(),
                    message: None,
                }
            } else {
                PointRecord {
                    axis1: x,
                    axis2: y,
                    status: PointStatus::Unstable,
                    margin,
                    marginal,
                    log_negativity: vec![None; nb],
                    eta_minus: vec![None; nb],
                    message: None,
                }
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// CSV text: `axis1,axis2,stable,margin,EN_<pair>...,eta_<pair>...,status`.
pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from("axis1,axis2,stable,margin");
    for b in &result.bipartitions {
        let _ = write!(out, ",EN_{}", b.key());
    }
    for b in &result.bipartitions {
        let _ = write!(out, ",eta_{}", b.key());
    }
    out.push_str(",status\n");
    for p in &result.points {
        let stable = match p.status {
            PointStatus::Ok => "1",
            PointStatus::Unstable => "0",
            PointStatus::SolverFailed => "",
        };
        let _ = write!(
            out,
            "{},{},{},{}",
            fmt_num(p.axis1),
            fmt_opt(p.axis2),
            stable,
            fmt_opt(p.margin)
        );
        for v in &p.log_negativity {
            let _ = write!(out, ",{}", fmt_opt(*v));
        }
        for v in &p.eta_minus {
            let _ = write!(out, ",{}", fmt_opt(*v));
        }
        let _ = writeln!(out, ",{}", p.status.as_str());
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, csv_string(result)).map_err(|e| Error::io(path, e))
}
