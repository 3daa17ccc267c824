//! Steady-state Gaussian entanglement in a four-mode hybrid system: an
//! optical cavity coupled to a mechanical mirror, an atomic ensemble and an
//! LC circuit.
//!
//! The pipeline runs mean field -> linearized drift and diffusion ->
//! stability -> Lyapunov covariance -> bipartite logarithmic negativity.
//! [`sweep`] drives it over parameter grids and [`cli`] wraps it all in the
//! `fourmode` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod figures;
pub mod lyapunov;
pub mod meanfield;
pub mod params;
pub mod pipeline;
pub mod plot;
pub mod routh;
pub mod sweep;

pub use dynamics::{build_diffusion, build_drift, Bipartition, Matrix8, Subsystem};
pub use entanglement::{bipartite_entanglement, EntanglementReport};
pub use error::{Error, Result};
pub use lyapunov::{solve_lyapunov, stability, CovarianceMatrix, StabilityReport};
pub use meanfield::{solve_steady_state, SteadyState};
pub use params::{EffectiveInput, EffectiveParams, ParamConfig, PhysicalParams};
pub use pipeline::{evaluate, resolve, PointEvaluation};
pub use sweep::{run_sweep, SweepResult, SweepSpec};
