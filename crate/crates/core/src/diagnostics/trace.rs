use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the CSV trace.
pub const TRACE_HEADER: &str = "t,eta,f,v_norm,w_norm,grad_phi,y_gap,lyapunov,samples";

/// Which optional trace columns to compute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceOptions {
    /// Record `|grad Phi(x_t)|` every k iterations (0 disables).
    pub stationarity_every: usize,
    /// Record the Lyapunov value (needs an oracle problem and constants).
    pub lyapunov: bool,
    /// Record `|v_t - grad_x f(x_t, y_t)|` and `|w_t - grad_y f(x_t, y_t)|`.
    pub estimator_error: bool,
    /// Inner-solve tolerance for stationarity on problems without an oracle.
    pub inner_tol: f64,
    pub max_inner: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            stationarity_every: 1,
            lyapunov: false,
            estimator_error: false,
            inner_tol: 1e-8,
            max_inner: 10_000,
        }
    }
}

/// One iteration of a solver run, recorded at `(x_t, y_t)` before the update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub eta: f64,
    pub f: f64,
    pub v_norm: f64,
    pub w_norm: f64,
    pub grad_phi: Option<f64>,
    pub y_gap: Option<f64>,
    pub lyapunov: Option<f64>,
    /// Samples drawn so far, including the batch behind `v_t`.
    pub samples: u64,
    pub v_error: Option<f64>,
    pub w_error: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the trace as CSV with [`TRACE_HEADER`], LF line endings and
/// shortest round-trip float formatting.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut out: W) -> Result<()> {
    let mut buf = String::with_capacity(64 * (rows.len() + 1));
    buf.push_str(TRACE_HEADER);
    buf.push('\n');
    for r in rows {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.eta,
            r.f,
            r.v_norm,
            r.w_norm,
            opt(r.grad_phi),
            opt(r.y_gap),
            opt(r.lyapunov),
            r.samples
        ));
    }
    out.write_all(buf.as_bytes()).map_err(|e| Error::io("trace", e))
}

/// Mean of the recorded stationarity values, `(1/T) sum_t |grad Phi(x_t)|`
/// over the rows that carry one.
pub fn averaged_stationarity(rows: &[TraceRow]) -> Option<f64> {
    let vals: Vec<f64> = rows.iter().filter_map(|r| r.grad_phi).collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}
