use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

// JSON has no NaN or infinity; serde_json writes them as null.
fn nullable_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Outcome of one diagnostic check.
///
/// Serializes as `{name, pass, measured, tolerance, samples, details}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// The quantity compared against `tolerance`.
    #[serde(deserialize_with = "nullable_f64")]
    pub measured: f64,
    /// Infinite (null in JSON) for measurement-only reports.
    #[serde(deserialize_with = "nullable_f64")]
    pub tolerance: f64,
    /// Random trials or evaluations behind the measurement.
    pub samples: u64,
    #[serde(default)]
    pub details: Value,
}

impl CheckReport {
    /// Passing iff `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, samples: u64) -> Self {
        CheckReport {
            name: name.into(),
            pass: measured <= tolerance,
            measured,
            tolerance,
            samples,
            details: Value::Null,
        }
    }

    /// Passing iff `measured` lies in `[lo, hi]`; the tolerance field holds
    /// the half-width around the midpoint.
    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64, samples: u64) -> Self {
        let mut r = CheckReport::at_most(name, measured, (hi - lo) / 2.0, samples);
        r.pass = measured >= lo && measured <= hi;
        r.details = serde_json::json!({ "range": [lo, hi] });
        r
    }

    /// Measurement only; always passes.
    pub fn measurement(name: impl Into<String>, measured: f64, samples: u64) -> Self {
        CheckReport { name: name.into(), pass: true, measured, tolerance: f64::INFINITY, samples, details: Value::Null }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        match (&mut self.details, details) {
            (Value::Object(old), Value::Object(new)) => old.extend(new),
            (slot, new) => *slot = new,
        }
        self
    }

    /// One-line human summary.
    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {:.3e} (tolerance {:.3e}, {} samples)",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.samples
        )
    }
}
