use rand::Rng;
use serde::Serialize;

use super::{check_config, gda_step, mvr_estimate, Algorithm, Sampling, SolverConfig, SolverState, BLOWUP_NORM};
use crate::diagnostics::trace::{averaged_stationarity, TraceOptions, TraceRow};
use crate::diagnostics::{estimate_grad_phi, inner_step, lyapunov_value, lyapunov_weight};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;
use crate::problems::{full_grads, stoch_grads, GradientPair, MinimaxProblem, ProblemConstants, SampleBatch};
use crate::{rng, Vector};

/// Extra inputs of a run that are not solver hyperparameters.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub trace: TraceOptions,
    /// Constants for the Lyapunov column; defaults to the problem's own.
    pub constants: Option<ProblemConstants>,
    /// Initial point; drawn from the run seed when absent.
    pub x0: Option<ManifoldPoint>,
    /// Start of the warm-start ascent; the set's center when absent.
    pub y0: Option<Vector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub trace: Vec<TraceRow>,
    /// Output index, uniform on `1..=T`.
    pub zeta: usize,
    #[serde(skip)]
    pub x_zeta: ManifoldPoint,
    #[serde(skip)]
    pub y_zeta: Vector,
    #[serde(skip)]
    pub x_final: ManifoldPoint,
    #[serde(skip)]
    pub y_final: Vector,
    /// Samples drawn by the iterations: `B T` (`B (T + 1)` for MVR-RSGDA).
    pub samples: u64,
    /// Per-sample gradient evaluations spent on the warm start.
    pub warm_start_evaluations: u64,
}

impl RunResult {
    /// `(1/T) sum_t |grad Phi(x_t)|` over the recorded rows.
    pub fn averaged_stationarity(&self) -> Option<f64> {
        averaged_stationarity(&self.trace)
    }
}

/// Uniform draw from `1..=t_max`.
pub fn select_output<R: Rng + ?Sized>(t_max: usize, rng: &mut R) -> usize {
    rng.random_range(1..=t_max)
}

pub fn run<P: MinimaxProblem + ?Sized>(problem: &P, config: &SolverConfig, opts: &RunOptions) -> Result<RunResult> {
    match config.algorithm {
        Algorithm::Rgda => run_rgda(problem, config, opts),
        Algorithm::Rsgda => run_rsgda(problem, config, opts),
        Algorithm::MvrRsgda => run_mvr_rsgda(problem, config, opts),
    }
}

struct Start {
    state: SolverState,
    zeta: usize,
    warm_evals: u64,
}

fn start<P: MinimaxProblem + ?Sized>(problem: &P, config: &SolverConfig, opts: &RunOptions) -> Result<Start> {
    check_config(config)?;
    let manifold = problem.manifold();
    let x = match &opts.x0 {
        Some(x) => manifold.point(x.matrix().clone())?,
        None => manifold.random_point_with(&mut rng::derive(config.seed, "x_init")),
    };
    let set = problem.y_set();
    let mut y = match &opts.y0 {
        Some(y) => set.project(y)?,
        None => set.center(),
    };
    let step = inner_step(problem, config.lambda);
    let mut warm = 0;
    for _ in 0..config.warm_start_steps {
        let g = full_grads(problem, &x, &y).w;
        warm += 1;
        let next = set.project(&(&y + g * step))?;
        let moved = (&next - &y).norm();
        y = next;
        if moved <= 1e-9 {
            break;
        }
    }
    let zeta = select_output(config.iterations, &mut rng::derive(config.seed, "output"));
    Ok(Start { state: SolverState { t: 1, x, y }, zeta, warm_evals: warm * problem.num_samples() as u64 })
}

/// Fills the trace columns for one iterate.
struct Recorder<'a, P: ?Sized> {
    problem: &'a P,
    opts: &'a TraceOptions,
    lyapunov_weight: Option<f64>,
    inner_step: f64,
}

impl<'a, P: MinimaxProblem + ?Sized> Recorder<'a, P> {
    fn new(problem: &'a P, config: &SolverConfig, opts: &'a RunOptions) -> Self {
        let constants = opts.constants.clone().or_else(|| problem.constants());
        let lyapunov_weight = if opts.trace.lyapunov {
            constants.map(|c| lyapunov_weight(config.gamma, config.lambda, &c))
        } else {
            None
        };
        Recorder { problem, opts: &opts.trace, lyapunov_weight, inner_step: inner_step(problem, config.lambda) }
    }

    fn row(&self, state: &SolverState, eta: f64, est: &GradientPair, samples: u64) -> Result<TraceRow> {
        let v_norm = est.v.norm();
        let w_norm = est.w.norm();
        if !(v_norm <= BLOWUP_NORM) || !w_norm.is_finite() {
            return Err(Error::Numeric(format!(
                "gradient estimate blew up at t = {} (|v| = {v_norm:e}, |w| = {w_norm:e})",
                state.t
            )));
        }
        let p = self.problem;
        let (x, y) = (&state.x, &state.y);
        let y_star = p.y_star(x);
        let every = self.opts.stationarity_every;
        let grad_phi = if every > 0 && (state.t == 1 || state.t.is_multiple_of(every)) {
            match p.grad_phi(x) {
                Some(g) => Some(g.norm()),
                None => {
                    Some(estimate_grad_phi(p, x, y, self.inner_step, self.opts.inner_tol, self.opts.max_inner).norm)
                }
            }
        } else {
            None
        };
        let y_gap = y_star.as_ref().map(|ys| (y - ys).norm());
        let lyapunov = self.lyapunov_weight.and_then(|wt| lyapunov_value(p, x, y, wt));
        let (v_error, w_error) = if self.opts.estimator_error {
            let exact = full_grads(p, x, y);
            (Some((&est.v - &exact.v).norm()), Some((&est.w - &exact.w).norm()))
        } else {
            (None, None)
        };
        Ok(TraceRow {
            t: state.t,
            eta,
            f: p.value(x, y),
            v_norm,
            w_norm,
            grad_phi,
            y_gap,
            lyapunov,
            samples,
            v_error,
            w_error,
        })
    }
}

struct Tracker {
    trace: Vec<TraceRow>,
    zeta: usize,
    chosen: Option<(ManifoldPoint, Vector)>,
}

impl Tracker {
    fn new(zeta: usize, capacity: usize) -> Self {
        Tracker { trace: Vec::with_capacity(capacity), zeta, chosen: None }
    }

    fn push(&mut self, row: TraceRow, state: &SolverState) {
        if state.t == self.zeta {
            self.chosen = Some((state.x.clone(), state.y.clone()));
        }
        self.trace.push(row);
    }

    fn finish(self, algorithm: Algorithm, last: SolverState, samples: u64, warm: u64) -> RunResult {
        let (x_zeta, y_zeta) = self.chosen.expect("zeta lies in 1..=T");
        RunResult {
            algorithm,
            trace: self.trace,
            zeta: self.zeta,
            x_zeta,
            y_zeta,
            x_final: last.x,
            y_final: last.y,
            samples,
            warm_start_evaluations: warm,
        }
    }
}

/// Deterministic RGDA: exact gradients at every iteration.
pub fn run_rgda<P: MinimaxProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    let Start { mut state, zeta, warm_evals } = start(problem, config, opts)?;
    let rec = Recorder::new(problem, config, opts);
    let mut tracker = Tracker::new(zeta, config.iterations);
    let n = problem.num_samples() as u64;
    let mut samples = 0;
    for t in 1..=config.iterations {
        let eta = config.eta_at(t);
        let grads = full_grads(problem, &state.x, &state.y);
        samples += n;
        tracker.push(rec.row(&state, eta, &grads, samples)?, &state);
        state = gda_step(problem.manifold(), problem.y_set(), &state, &grads, config.gamma, config.lambda, eta)?;
    }
    Ok(tracker.finish(config.algorithm, state, samples, warm_evals))
}

fn draw_batch<R: Rng + ?Sized>(rng: &mut R, config: &SolverConfig, n: usize) -> Result<SampleBatch> {
    let b = config.batch_size;
    match config.sampling {
        Sampling::WithReplacement => Ok(SampleBatch::draw(rng, n, b)),
        Sampling::WithoutReplacement => {
            if b > n {
                return Err(Error::Domain(format!(
                    "batch size {b} exceeds the {n} available samples without replacement"
                )));
            }
            if b == n {
                return Ok(SampleBatch::full(n));
            }
            SampleBatch::new(rand::seq::index::sample(rng, n, b).into_vec(), n)
        }
    }
}

/// Mini-batch RSGDA.
pub fn run_rsgda<P: MinimaxProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    let n = problem.num_samples();
    if config.sampling == Sampling::WithoutReplacement && config.batch_size > n {
        return Err(Error::Domain(format!(
            "batch size {} exceeds the {n} available samples without replacement",
            config.batch_size
        )));
    }
    let Start { mut state, zeta, warm_evals } = start(problem, config, opts)?;
    let rec = Recorder::new(problem, config, opts);
    let mut tracker = Tracker::new(zeta, config.iterations);
    let mut batches = rng::derive(config.seed, "batches");
    let mut samples = 0;
    for t in 1..=config.iterations {
        let eta = config.eta_at(t);
        let batch = draw_batch(&mut batches, config, n)?;
        let grads = stoch_grads(problem, &state.x, &state.y, &batch)?;
        samples += batch.len() as u64;
        tracker.push(rec.row(&state, eta, &grads, samples)?, &state);
        state = gda_step(problem.manifold(), problem.y_set(), &state, &grads, config.gamma, config.lambda, eta)?;
    }
    Ok(tracker.finish(config.algorithm, state, samples, warm_evals))
}

/// MVR-RSGDA: one initial batch, then per iteration a step, a fresh batch
/// and the recursive estimator update evaluated on that batch at both the
/// old and the new iterate.
pub fn run_mvr_rsgda<P: MinimaxProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    let n = problem.num_samples();
    if config.sampling == Sampling::WithoutReplacement && config.batch_size > n {
        return Err(Error::Domain(format!(
            "batch size {} exceeds the {n} available samples without replacement",
            config.batch_size
        )));
    }
    let Start { mut state, zeta, warm_evals } = start(problem, config, opts)?;
    let rec = Recorder::new(problem, config, opts);
    let mut tracker = Tracker::new(zeta, config.iterations);
    let mut batches = rng::derive(config.seed, "batches");

    let first = draw_batch(&mut batches, config, n)?;
    let mut est = stoch_grads(problem, &state.x, &state.y, &first)?;
    let mut samples = first.len() as u64;

    for t in 1..=config.iterations {
        let eta = config.eta_at(t);
        tracker.push(rec.row(&state, eta, &est, samples)?, &state);
        let next = gda_step(problem.manifold(), problem.y_set(), &state, &est, config.gamma, config.lambda, eta)?;
        let mut alpha = config.c1 * eta * eta;
        let mut beta = config.c2 * eta * eta;
        if config.clip_momentum {
            alpha = alpha.min(1.0);
            beta = beta.min(1.0);
        }
        let batch = draw_batch(&mut batches, config, n)?;
        est = mvr_estimate(problem, &batch, &est, &state.x, &state.y, &next.x, &next.y, alpha, beta)?;
        samples += batch.len() as u64;
        state = next;
    }
    Ok(tracker.finish(config.algorithm, state, samples, warm_evals))
}
