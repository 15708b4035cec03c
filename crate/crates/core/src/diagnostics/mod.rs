//! Verification instruments: stationarity estimates, finite-difference and
//! manifold-law checks, assumption probes, the Lyapunov monitor and
//! convergence-rate fits. Every check is deterministic under its seed.

mod estimator;
mod fit;
mod gradcheck;
mod laws;
mod lyapunov;
mod probes;
mod report;
pub mod stationarity;
pub mod suite;
pub mod trace;

pub use estimator::estimator_error_trace;
pub use fit::{log_log_slope, rate_fit, RateFit, RatePoint};
pub use gradcheck::{fd_check_rgrad, fd_error_grad_y, fd_errors, gradient_suite, FD_SLOPE_RANGE, FD_STEPS, FD_Y_TOL};
pub use laws::{
    invariant_check, linearity_check, projection_check, reference_manifolds, retract_zero_check, rigidity_check,
    transport_isometry_report, INVARIANT_TOL, ISOMETRY_TOL, LINEARITY_TOL, RIGIDITY_RANGE,
};
pub use lyapunov::{lyapunov_trace, lyapunov_value, lyapunov_weight, LYAPUNOV_SLACK};
pub use probes::{batch_noise, concavity_probe, estimate_constants, lipschitz_probe, LIPSCHITZ_SLACK, RATIO_FLOOR};
pub use report::CheckReport;
pub use stationarity::{estimate_grad_phi, inner_step, StationarityEstimate};
pub use suite::{check_groups, run_checks, CheckGroup};
pub use trace::{averaged_stationarity, write_trace_csv, TraceOptions, TraceRow, TRACE_HEADER};
