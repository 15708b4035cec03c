//! Riemannian gradient descent ascent solvers.
//!
//! - `rgda`: exact gradients, constant `eta`.
//! - `rsgda`: mini-batch gradients, constant `eta`.
//! - `mvr_rsgda`: STORM-style recursive estimators with
//!   `eta_t = b / (m + t)^{1/3}` and momentum weights `c1 eta_t^2`, `c2 eta_t^2`.
//!
//! Every iteration performs `x+ = R_x(-gamma eta v)` and
//! `y+ = y + eta (P_Y(y + lambda w) - y)`.

mod config;
mod run;
mod step;
mod validate;

pub use config::{Algorithm, EtaRule, Sampling, SolverConfig};
pub use run::{run, run_mvr_rsgda, run_rgda, run_rsgda, select_output, RunOptions, RunResult};
pub use step::{gda_step, mvr_estimate, schedule_eta, storm_update, SolverState};
pub use validate::{check_config, theorem1_steps, validate_config, ConfigWarning};

/// Abort threshold on the norm of the x-gradient estimate.
pub const BLOWUP_NORM: f64 = 1e12;
