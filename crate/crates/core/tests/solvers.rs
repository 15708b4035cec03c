use rminmax::diagnostics::estimator_error_trace;
use rminmax::diagnostics::suite::{reference_quadratic, reference_start};
use rminmax::problems::{
    make_dro, make_quadratic_saddle, make_robust_regression, synthetic_dro_samples, RegressionBall,
};
use rminmax::solvers::{run, select_output, RunOptions, Sampling};
use rminmax::{ConvexSet, Error, Mat, MinimaxProblem, SolverConfig, Vector};

fn noisy(n: usize) -> impl MinimaxProblem {
    let a = Mat::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.0, 1.0, -0.4, 0.1, 0.0, 0.5]);
    make_quadratic_saddle(
        a,
        Vector::from_column_slice(&[0.2, 0.0, -0.1]),
        1.0,
        ConvexSet::L2Ball { dim: 3, radius: 3.0 },
        n,
        0.7,
        4,
    )
    .unwrap()
}

fn assert_same_run<P: MinimaxProblem>(p: &P, full: &SolverConfig, batch: &SolverConfig) {
    let a = run(p, full, &RunOptions::default()).unwrap();
    let b = run(p, batch, &RunOptions::default()).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.x_final, b.x_final);
    assert_eq!(a.y_final, b.y_final);
    assert_eq!(a.zeta, b.zeta);
    assert_eq!(a.samples, b.samples);
}

#[test]
fn full_batch_rsgda_reproduces_rgda() {
    let p = noisy(40);
    let rgda = SolverConfig::rgda(0.02, 0.3, 0.8, 300).with_seed(5);
    let mut rsgda = SolverConfig::rsgda(0.02, 0.3, 0.8, 40, 300).with_seed(5);
    rsgda.sampling = Sampling::WithoutReplacement;
    assert_same_run(&p, &rgda, &rsgda);

    let dro = make_dro(&synthetic_dro_samples(24, 6, 8), 2).unwrap();
    let rgda = SolverConfig::rgda(0.1, 0.2, 1.0, 100).with_seed(1);
    let mut rsgda = SolverConfig::rsgda(0.1, 0.2, 1.0, 24, 100).with_seed(1);
    rsgda.sampling = Sampling::WithoutReplacement;
    assert_same_run(&dro, &rgda, &rsgda);
}

#[test]
fn batch_larger_than_n_without_replacement_is_rejected() {
    let p = noisy(10);
    let mut c = SolverConfig::rsgda(0.02, 0.3, 0.8, 11, 5);
    c.sampling = Sampling::WithoutReplacement;
    assert!(matches!(run(&p, &c, &RunOptions::default()), Err(Error::Domain(_))));
}

#[test]
fn sample_accounting() {
    let p = noisy(30);
    let opts = RunOptions::default();
    assert_eq!(run(&p, &SolverConfig::rgda(0.02, 0.3, 0.8, 7), &opts).unwrap().samples, 30 * 7);
    assert_eq!(run(&p, &SolverConfig::rsgda(0.02, 0.3, 0.8, 4, 7), &opts).unwrap().samples, 4 * 7);
    let mvr = SolverConfig::mvr_rsgda(0.02, 0.3, 0.5, 8.0, 4.0, 4.0, 4, 7);
    let r = run(&p, &mvr, &opts).unwrap();
    assert_eq!(r.samples, 4 * 8);
    // the last row is recorded before the final batch is drawn
    assert_eq!(r.trace.last().unwrap().samples, 4 * 7);
}

#[test]
fn zero_noise_mvr_tracks_the_gradient_on_stiefel() {
    // identical samples make every batch gradient the full gradient
    let a: Vec<f64> = (0..6).map(|j| 1.0 / (1.0 + j as f64)).collect();
    let p = make_robust_regression(&vec![(a, vec![0.5, -1.0, 0.25]); 16], 3, 0.5, 4.0, RegressionBall::L2).unwrap();
    let c = SolverConfig::mvr_rsgda(0.2, 0.2, 0.5, 8.0, 4.0, 4.0, 5, 500).with_seed(2);
    let errors = estimator_error_trace(&p, &c, &RunOptions::default()).unwrap();
    let worst = errors.iter().map(|(v, w)| v.max(*w)).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn noisy_mvr_error_is_not_zero() {
    let p = noisy(200);
    let c = SolverConfig::mvr_rsgda(0.02, 0.3, 0.5, 8.0, 4.0, 4.0, 5, 50).with_seed(2);
    let errors = estimator_error_trace(&p, &c, &RunOptions::default()).unwrap();
    assert!(errors.iter().any(|(v, _)| *v > 1e-3));
}

#[test]
fn output_index_is_uniform() {
    let mut rng = rminmax::rng::derive(11, "select_output_test");
    let t = 10;
    let draws = 100_000;
    let mut counts = vec![0u64; t];
    for _ in 0..draws {
        let z = select_output(t, &mut rng);
        assert!((1..=t).contains(&z));
        counts[z - 1] += 1;
    }
    let expected = draws as f64 / t as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 0.999 quantile of chi-square with 9 degrees of freedom
    assert!(chi2 < 27.877, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn output_iterate_matches_trace_row() {
    let p = reference_quadratic();
    let opts = RunOptions { x0: Some(reference_start()), ..RunOptions::default() };
    for seed in 0..5 {
        let r = run(&p, &SolverConfig::rgda(0.01, 0.1, 1.0, 50).with_seed(seed), &opts).unwrap();
        let row = &r.trace[r.zeta - 1];
        assert_eq!(row.t, r.zeta);
        let g = p.grad_phi(&r.x_zeta).unwrap().norm();
        assert_eq!(row.grad_phi, Some(g));
    }
}

#[test]
fn clipping_can_be_disabled_into_an_error() {
    let p = noisy(10);
    let mut c = SolverConfig::mvr_rsgda(0.02, 0.3, 0.5, 8.0, 512.0, 512.0, 2, 5);
    assert!(run(&p, &c, &RunOptions::default()).is_ok());
    c.clip_momentum = false;
    assert!(matches!(run(&p, &c, &RunOptions::default()), Err(Error::Config(_))));
}

#[test]
fn rgda_decreases_stationarity_on_reference() {
    let p = reference_quadratic();
    let opts = RunOptions { x0: Some(reference_start()), ..RunOptions::default() };
    let r = run(&p, &SolverConfig::rgda(0.05, 0.4, 1.0, 2000), &opts).unwrap();
    let first = r.trace[0].grad_phi.unwrap();
    let last = r.trace.last().unwrap().grad_phi.unwrap();
    assert!(last < 1e-3 * first, "{first} -> {last}");
}
