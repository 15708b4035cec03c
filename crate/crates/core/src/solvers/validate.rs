use serde::{Deserialize, Serialize};

use super::{schedule_eta, Algorithm, EtaRule, SolverConfig};
use crate::error::{Error, Result};
use crate::problems::ProblemConstants;

/// A step-size condition of the convergence guarantees that the
/// configuration violates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigWarning {
    /// Short identifier of the condition, e.g. `lambda <= 1/(6 L~)`.
    pub condition: String,
    pub message: String,
}

/// Closed inequalities are admitted with this relative slack.
const SLACK: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + SLACK * b.abs().max(1.0)
}

struct Checks(Vec<ConfigWarning>);

impl Checks {
    fn require(&mut self, ok: bool, condition: &str, message: String) {
        if !ok {
            self.0.push(ConfigWarning { condition: condition.to_string(), message });
        }
    }
}

/// Hard validity checks. Violations make the run impossible or ill-defined.
pub fn check_config(config: &SolverConfig) -> Result<()> {
    let bad = |m: String| Err(Error::Config(m));
    if !(config.gamma > 0.0 && config.gamma.is_finite()) {
        return bad(format!("gamma must be positive, got {}", config.gamma));
    }
    if !(config.lambda > 0.0 && config.lambda.is_finite()) {
        return bad(format!("lambda must be positive, got {}", config.lambda));
    }
    if config.iterations == 0 {
        return bad("iterations must be >= 1".into());
    }
    if config.batch_size == 0 {
        return bad("batch_size must be >= 1".into());
    }
    if !(config.c1 >= 0.0 && config.c2 >= 0.0) {
        return bad(format!("c1, c2 must be non-negative, got {}, {}", config.c1, config.c2));
    }
    match (config.algorithm, config.eta) {
        (Algorithm::Rgda | Algorithm::Rsgda, EtaRule::Constant { value }) => {
            if !(value > 0.0 && value <= 1.0) {
                return bad(format!("constant eta must lie in (0, 1], got {value}"));
            }
        }
        (Algorithm::MvrRsgda, EtaRule::Schedule { b, m }) => {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("schedule b must be positive, got {b}"));
            }
            if !(m >= 2.0 && m.is_finite()) {
                return bad(format!("schedule m must be >= 2, got {m}"));
            }
            if m < b.powi(3) {
                return bad(format!("schedule needs m >= b^3 so that eta_t <= 1 (b = {b}, m = {m})"));
            }
            let eta1 = schedule_eta(1, b, m);
            let peak = config.c1.max(config.c2) * eta1 * eta1;
            if !config.clip_momentum && peak > 1.0 {
                return bad(format!("momentum weight c * eta_1^2 = {peak} exceeds 1; raise m or enable clip_momentum"));
            }
        }
        (alg, _) => {
            return bad(format!(
                "{alg} requires {} step sizes",
                if alg == Algorithm::MvrRsgda { "scheduled" } else { "constant" }
            ));
        }
    }
    Ok(())
}

/// Largest step sizes admitted by the deterministic guarantee:
/// `lambda = 1/(6 L~)`, `gamma = mu lambda / (10 kappa sqrt(L~))` and
/// `eta = min(1, 1/(2 gamma L))`.
pub fn theorem1_steps(c: &ProblemConstants) -> (f64, f64, f64) {
    let lambda = 1.0 / (6.0 * c.l_tilde());
    let gamma = c.mu * lambda / (10.0 * c.kappa() * c.l_tilde().sqrt());
    let eta = 1f64.min(1.0 / (2.0 * gamma * c.l));
    (gamma, lambda, eta)
}

/// Checks every step-size inequality of the guarantee that applies to the
/// algorithm. Never blocks a run: each violated condition becomes a warning.
pub fn validate_config(constants: &ProblemConstants, config: &SolverConfig) -> Vec<ConfigWarning> {
    let mu = constants.mu;
    let lt = constants.l_tilde();
    let kappa = constants.kappa();
    let l = constants.l;
    let (gamma, lambda) = (config.gamma, config.lambda);
    let mut c = Checks(Vec::new());

    match config.eta {
        EtaRule::Constant { value: eta } => {
            let eta_max = 1f64.min(1.0 / (2.0 * gamma * l));
            c.require(le(eta, eta_max), "eta <= min(1, 1/(2 gamma L))", format!("eta = {eta} exceeds {eta_max}"));
            let lambda_max = 1.0 / (6.0 * lt);
            c.require(
                le(lambda, lambda_max),
                "lambda <= 1/(6 L~)",
                format!("lambda = {lambda} exceeds 1/(6 L~) = {lambda_max}"),
            );
            let gamma_max = mu * lambda / (10.0 * kappa * lt.sqrt());
            c.require(
                le(gamma, gamma_max),
                "gamma <= mu lambda/(10 kappa sqrt(L~))",
                format!("gamma = {gamma} exceeds {gamma_max}"),
            );
        }
        EtaRule::Schedule { b, m } => {
            let b3 = b.powi(3);
            let c1_min = 2.0 / (3.0 * b3) + 2.0 * mu * mu;
            c.require(
                le(c1_min, config.c1),
                "c1 >= 2/(3 b^3) + 2 mu^2",
                format!("c1 = {} is below {c1_min}", config.c1),
            );
            let c2_min = 2.0 / (3.0 * b3) + 50.0 * lt * lt;
            c.require(
                le(c2_min, config.c2),
                "c2 >= 2/(3 b^3) + 50 L~^2",
                format!("c2 = {} is below {c2_min}", config.c2),
            );
            let c_tilde = (2.0 * gamma * l).max(config.c1).max(config.c2).max(1.0);
            let m_min = 2f64.max((c_tilde * b).powi(3));
            c.require(le(m_min, m), "m >= max(2, (c~ b)^3)", format!("m = {m} is below {m_min}"));
            let bs = config.batch_size as f64;
            let gamma_max =
                mu * lambda / (2.0 * lt) * (bs / (25.0 * kappa * kappa * bs + 4.0 * lambda * lambda)).sqrt();
            c.require(
                le(gamma, gamma_max),
                "gamma <= mu lambda/(2 L~) sqrt(B/(25 kappa^2 B + 4 lambda^2))",
                format!("gamma = {gamma} exceeds {gamma_max}"),
            );
            let lambda_max = (1.0 / (6.0 * lt)).min(9.0 * mu * bs / 8.0);
            c.require(
                le(lambda, lambda_max),
                "lambda <= min(1/(6 L~), 9 mu B/8)",
                format!("lambda = {lambda} exceeds {lambda_max}"),
            );
            let eta1 = schedule_eta(1, b, m);
            let peak = config.c1.max(config.c2) * eta1 * eta1;
            c.require(
                peak <= 1.0,
                "c eta_t^2 <= 1",
                format!("momentum weight c * eta_1^2 = {peak} exceeds 1 and is clipped"),
            );
        }
    }
    c.0
}
