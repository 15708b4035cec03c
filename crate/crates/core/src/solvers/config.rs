use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rgda,
    Rsgda,
    MvrRsgda,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Rgda => "rgda",
            Algorithm::Rsgda => "rsgda",
            Algorithm::MvrRsgda => "mvr_rsgda",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaRule {
    /// Fixed `eta in (0, 1]`.
    Constant { value: f64 },
    /// `eta_t = b / (m + t)^{1/3}`.
    Schedule { b: f64, m: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// i.i.d. uniform draws.
    #[default]
    WithReplacement,
    /// Distinct indices; with `batch_size == n` this is the full batch.
    WithoutReplacement,
}

fn default_batch() -> usize {
    1
}

fn default_warm_start() -> usize {
    200
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// x step scale.
    pub gamma: f64,
    /// y ascent step.
    pub lambda: f64,
    pub eta: EtaRule,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    pub iterations: usize,
    /// Projected-ascent steps used to approximate `y_1 = y*(x_1)`.
    #[serde(default = "default_warm_start")]
    pub warm_start_steps: usize,
    #[serde(default)]
    pub sampling: Sampling,
    /// Clip the momentum weights `c eta_t^2` at 1 instead of rejecting the
    /// configuration.
    #[serde(default = "default_true")]
    pub clip_momentum: bool,
    #[serde(default)]
    pub seed: u64,
}

impl SolverConfig {
    /// Deterministic RGDA with constant `eta`.
    pub fn rgda(gamma: f64, lambda: f64, eta: f64, iterations: usize) -> Self {
        SolverConfig {
            algorithm: Algorithm::Rgda,
            gamma,
            lambda,
            eta: EtaRule::Constant { value: eta },
            c1: 0.0,
            c2: 0.0,
            batch_size: 1,
            iterations,
            warm_start_steps: default_warm_start(),
            sampling: Sampling::WithReplacement,
            clip_momentum: true,
            seed: 0,
        }
    }

    pub fn rsgda(gamma: f64, lambda: f64, eta: f64, batch_size: usize, iterations: usize) -> Self {
        SolverConfig { algorithm: Algorithm::Rsgda, batch_size, ..Self::rgda(gamma, lambda, eta, iterations) }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn mvr_rsgda(
        gamma: f64,
        lambda: f64,
        b: f64,
        m: f64,
        c1: f64,
        c2: f64,
        batch_size: usize,
        iterations: usize,
    ) -> Self {
        SolverConfig {
            algorithm: Algorithm::MvrRsgda,
            eta: EtaRule::Schedule { b, m },
            c1,
            c2,
            batch_size,
            ..Self::rgda(gamma, lambda, 1.0, iterations)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Step size at iteration `t >= 1`.
    pub fn eta_at(&self, t: usize) -> f64 {
        match self.eta {
            EtaRule::Constant { value } => value,
            EtaRule::Schedule { b, m } => super::schedule_eta(t, b, m),
        }
    }
}
