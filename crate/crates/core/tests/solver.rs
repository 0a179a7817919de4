use sparsepath::linop::mutual_coherence;
use sparsepath::solver::continuation_solve;
use sparsepath::thresholding::support;
use sparsepath::*;

fn fig1a_problem(s: usize, seed: u64) -> Problem {
    gen_problem(&ProblemSpec::new(MatrixKind::Gaussian, 500, 1000, s, 100.0, 1e-2, seed)).unwrap()
}

#[test]
fn selected_support_matches_truth_on_benign_instance() {
    let problem = fig1a_problem(10, 7);
    let path = run_full_path(&problem.op, &problem.y, Penalty::L0, 0.8, 5, 100).unwrap();
    let sel = select_bic(&path, 500).unwrap();
    assert_eq!(support(&sel.x), problem.true_support());
}

#[test]
fn full_path_equals_explicit_lambda_star_run() {
    let problem = fig1a_problem(10, 3);
    let path = run_full_path(&problem.op, &problem.y, Penalty::L1, 0.8, 5, 40).unwrap();
    let last = *path.lambdas.last().unwrap();
    let cfg = SolverConfig::new(Penalty::L1)
        .with_lambda_star(LambdaStar::Value(last))
        .with_path_len(1000);
    let (x, explicit) = continuation_solve(&problem.op, &problem.y, &cfg).unwrap();
    assert_eq!(explicit.lambdas, path.lambdas);
    assert_eq!(explicit.solutions, path.solutions);
    assert_eq!(&x, path.solutions.last().unwrap());
    assert_eq!(explicit.n_matvec, path.n_matvec);
}

#[test]
fn theory_mode_meets_the_guarantee() {
    // mu is about 0.19 at 500 x 1000, so s = 2 keeps mu s < 1/2.
    let problem =
        gen_problem(&ProblemSpec::new(MatrixKind::Gaussian, 500, 1000, 2, 100.0, 1e-3, 11)).unwrap();
    let mu = mutual_coherence(&problem.op).unwrap().mu;
    for penalty in [Penalty::L1, Penalty::L0] {
        let theory = TheoryParams::with_c_factor(mu, 2, problem.epsilon, penalty, 1.1);
        let gamma = theory.admissible_gamma(penalty, 0.8).unwrap().expect("gamma interval nonempty");
        let cfg = SolverConfig::new(penalty)
            .with_gamma(gamma)
            .with_lambda_star(LambdaStar::Theory(theory))
            .with_path_len(100_000);
        let (x, path) = continuation_solve(&problem.op, &problem.y, &cfg).unwrap();
        assert_eq!(path.stop, StopReason::BelowLambdaStar);
        let truth = problem.true_support();
        assert!(support(&x).iter().all(|i| truth.contains(i)));
        let bound = theoretical_error_bound(&theory, penalty).unwrap();
        let err = x
            .iter()
            .zip(&problem.x_true)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= bound, "{penalty:?}: {err} > {bound}");
        // Nonzeros have magnitude >= 1; above the bound the support is exact.
        if bound < 1.0 {
            assert_eq!(support(&x), truth);
        }
    }
}

#[test]
fn baseline_and_continuation_agree_on_the_objective() {
    let problem =
        gen_problem(&ProblemSpec::new(MatrixKind::Gaussian, 60, 120, 4, 10.0, 1e-2, 5)).unwrap();
    let aty = problem.op.apply_adjoint(&problem.y).unwrap();
    let target = 0.05 * aty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let steps = 10;
    let cfg = SolverConfig::new(Penalty::L1)
        .with_lambda0(Lambda0::Value(target / 0.8f64.powi(steps)))
        .with_kmax(400)
        .with_lambda_star(LambdaStar::Value(0.99 * target))
        .with_path_len(steps as usize);
    let (x, path) = continuation_solve(&problem.op, &problem.y, &cfg).unwrap();
    let lambda = *path.lambdas.last().unwrap();
    assert!((lambda - target).abs() <= 1e-12 * target);

    let sigma_max = problem.op.spectral_norm(1000, 1e-12);
    let tau = 1.0 / (sigma_max * sigma_max);
    let base = baseline_solve(&problem.op, &problem.y, lambda, tau, Penalty::L1, 200_000, 1e-13).unwrap();
    assert!(base.converged);

    let f_cont = sparsepath::solver::objective(&problem.op, &problem.y, &x, lambda, Penalty::L1).unwrap();
    let f_base = sparsepath::solver::objective(&problem.op, &problem.y, &base.x, lambda, Penalty::L1).unwrap();
    assert!((f_cont - f_base).abs() <= 1e-6, "{f_cont} vs {f_base}");
}

#[test]
fn matvec_identity_over_configs() {
    let problem = fig1a_problem(10, 2);
    for (penalty, gamma, kmax, star) in [
        (Penalty::L1, 0.8, 5, 1e-2),
        (Penalty::L0, 0.5, 3, 1e-3),
        (Penalty::L1, 0.9, 1, 0.5),
    ] {
        let cfg = SolverConfig::new(penalty)
            .with_gamma(gamma)
            .with_kmax(kmax)
            .with_lambda_star(LambdaStar::Value(star))
            .with_path_len(10_000);
        let (_, path) = continuation_solve(&problem.op, &problem.y, &cfg).unwrap();
        assert_eq!(path.stop, StopReason::BelowLambdaStar);
        assert_eq!(path.n_matvec, (2 * kmax * path.steps() + 1) as u64);
        let bound = ((star / path.lambdas[0]).ln() / f64::ln(gamma)).ceil().max(0.0) as usize;
        assert!(path.steps() <= bound);
    }
}
