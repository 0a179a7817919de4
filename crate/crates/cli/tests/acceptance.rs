//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Run with `cargo test -p sparsepath-cli --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sparsepath::experiments::{
    benchmark_table, haar1d_reconstruction, phase_cell, phase_transition_grid, support_probability_sweep, BenchSpec,
    Haar1dSpec, PhaseSpec, SweepSpec,
};
use sparsepath::linop::{dot, norm2, PartialFourierHaar};
use sparsepath::solver::{auto_lambda0, theoretical_error_bound};
use sparsepath::thresholding::support;
use sparsepath::{
    continuation_solve, gen_problem, hard_threshold, mutual_coherence, soft_threshold, threshold_vector, DenseMatrix,
    Lambda0, LambdaStar, MatrixKind, Penalty, ProblemSpec, SensingOperator, SolverConfig, StopReason, TheoryParams,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn within(limit: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()))
}

/// |T(x + y) - x| <= |y| + lambda (soft) or |y| + sqrt(2 lambda) (hard).
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst_soft = f64::INFINITY;
    let mut worst_hard = f64::INFINITY;
    for i in 0..100_000 {
        // Mix magnitudes so thresholds both above and below |x + y| occur.
        let scale = [1e-3, 1.0, 1e3][i % 3];
        let x: f64 = rng.gen_range(-1.0..1.0) * scale;
        let y: f64 = rng.gen_range(-1.0..1.0) * scale;
        let lambda: f64 = if i % 17 == 0 { 0.0 } else { rng.gen_range(0.0..1.0) * scale };
        let soft = soft_threshold(x + y, lambda).unwrap();
        let hard = hard_threshold(x + y, lambda).unwrap();
        worst_soft = worst_soft.min(y.abs() + lambda - (soft - x).abs());
        worst_hard = worst_hard.min(y.abs() + (2.0 * lambda).sqrt() - (hard - x).abs());
    }
    let (fast, time) = within(Duration::from_secs(5), start.elapsed());
    verdict(
        worst_soft >= -1e-12 && worst_hard >= -1e-12 && fast,
        format!("1e5 triples, min slack soft {worst_soft:.3e}, hard {worst_hard:.3e}; {time}"),
    )
}

/// Columns of a random `n x p` matrix orthonormalized by two passes of
/// modified Gram-Schmidt.
fn orthonormal_dense(n: usize, p: usize, seed: u64) -> SensingOperator {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    for j in 0..p {
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let c = dot(&done[k], &rest[0]);
                rest[0].iter_mut().zip(&done[k]).for_each(|(v, q)| *v -= c * q);
            }
        }
        let nrm = norm2(&cols[j]);
        cols[j].iter_mut().for_each(|v| *v /= nrm);
    }
    SensingOperator::from_unit_columns(DenseMatrix::from_columns(&cols).unwrap()).unwrap()
}

/// With orthonormal columns every path point is the thresholded adjoint data.
fn criterion_2() -> Verdict {
    let mut ops = vec![
        ("dense 64x64", orthonormal_dense(64, 64, 1)),
        ("dense 128x50", orthonormal_dense(128, 50, 2)),
        ("dense 256x200", orthonormal_dense(256, 200, 3)),
    ];
    let full = PartialFourierHaar::new(256, 256, 3, 4).unwrap();
    ops.push(("fft-haar 256x256", SensingOperator::PartialFourierHaar(full)));

    let mut worst = 0.0f64;
    let mut points = 0usize;
    for (case, (_, op)) in ops.iter().enumerate() {
        let mut rng = StdRng::seed_from_u64(100 + case as u64);
        let x: Vec<f64> = (0..op.ncols())
            .map(|_| if rng.gen_bool(0.1) { rng.gen_range(-5.0..5.0) } else { 0.0 })
            .collect();
        let mut y = op.apply(&x).unwrap();
        y.iter_mut().for_each(|v| *v += 0.05 * rng.gen_range(-1.0..1.0));
        let aty = op.apply_adjoint(&y).unwrap();
        for penalty in [Penalty::L1, Penalty::L0] {
            for kmax in [1, 3] {
                let cfg = SolverConfig::new(penalty).with_kmax(kmax).with_path_len(60);
                let (_, path) = continuation_solve(op, &y, &cfg).unwrap();
                for (lambda, sol) in path.lambdas.iter().zip(&path.solutions).skip(1) {
                    let oracle = threshold_vector(&aty, *lambda, penalty).unwrap();
                    for (a, b) in sol.iter().zip(&oracle) {
                        worst = worst.max((a - b).abs());
                    }
                    points += 1;
                }
            }
        }
    }
    let names: Vec<&str> = ops.iter().map(|(n, _)| *n).collect();
    verdict(
        worst <= 1e-12,
        format!("{points} path points on {}; max abs diff {worst:.2e}", names.join(", ")),
    )
}

#[derive(Default)]
struct TheoryTally {
    qualifying: usize,
    passed: usize,
    exact_checked: usize,
    exact_passed: usize,
}

/// Runs both penalties on one instance under admissible theory constants.
fn theory_run(problem: &sparsepath::Problem, mu: f64, tally: &mut TheoryTally, failures: &mut Vec<String>) {
    let s = problem.sparsity();
    for penalty in [Penalty::L1, Penalty::L0] {
        let theory = TheoryParams::with_c_factor(mu, s, problem.epsilon, penalty, 2.0);
        let gamma = theory.admissible_gamma(penalty, 0.8).unwrap().expect("gamma interval nonempty");
        let cfg = SolverConfig::new(penalty)
            .with_gamma(gamma)
            .with_lambda_star(LambdaStar::Theory(theory))
            .with_path_len(1_000_000);
        tally.qualifying += 1;
        let (x, _) = match continuation_solve(&problem.op, &problem.y, &cfg) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("seed {} {penalty:?}: {e}", problem.seed));
                continue;
            }
        };
        let truth = support(&problem.x_true);
        let est = support(&x);
        let bound = theoretical_error_bound(&theory, penalty).unwrap();
        let err = x.iter().zip(&problem.x_true).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let contained = est.iter().all(|i| truth.binary_search(i).is_ok());
        if contained && err <= bound {
            tally.passed += 1;
        } else {
            failures.push(format!("seed {} {penalty:?}: contained {contained}, err {err:.3e} vs bound {bound:.3e}", problem.seed));
        }
        let min_mag = truth.iter().map(|&i| problem.x_true[i].abs()).fold(f64::INFINITY, f64::min);
        if min_mag > bound {
            tally.exact_checked += 1;
            tally.exact_passed += (est == truth) as usize;
        }
    }
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut primary = TheoryTally::default();
    let mut supplement = TheoryTally::default();
    let mut failures = Vec::new();
    let mut mu_range = (f64::INFINITY, 0.0f64);
    for seed in 0..100u64 {
        let problem = gen_problem(&ProblemSpec::new(MatrixKind::Gaussian, 500, 1000, 5, 100.0, 1e-3, seed)).unwrap();
        // The matrix depends on the seed only, so mu is shared with the s = 2 instance.
        let mu = mutual_coherence(&problem.op).unwrap().mu;
        mu_range = (mu_range.0.min(mu), mu_range.1.max(mu));
        if mu * 5.0 < 0.5 {
            theory_run(&problem, mu, &mut primary, &mut failures);
        }
        if mu * 2.0 < 0.5 {
            let small = gen_problem(&ProblemSpec::new(MatrixKind::Gaussian, 500, 1000, 2, 100.0, 1e-3, seed)).unwrap();
            theory_run(&small, mu, &mut supplement, &mut failures);
        }
    }
    let (fast, time) = within(Duration::from_secs(120), start.elapsed());
    let all_pass = |t: &TheoryTally| t.passed == t.qualifying && t.exact_passed == t.exact_checked;
    let pass = fast && failures.is_empty() && all_pass(&primary) && all_pass(&supplement) && primary.qualifying + supplement.qualifying > 0;
    let mut detail = format!(
        "mu in [{:.3}, {:.3}]; s=5: {}/{} qualifying runs pass (mu*s >= 1/2 otherwise); \
         s=2 supplement: {}/{} pass, exact support {}/{}; {time}",
        mu_range.0, mu_range.1, primary.passed, primary.qualifying, supplement.passed, supplement.qualifying,
        supplement.exact_passed, supplement.exact_checked
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    verdict(pass, detail)
}

/// nMV = 2 Kmax steps + [auto lambda0], steps <= ceil(ln(lambda*/lambda0) / ln gamma).
fn criterion_4() -> Verdict {
    let problem = gen_problem(&ProblemSpec::new(MatrixKind::Gaussian, 200, 400, 5, 10.0, 1e-2, 3)).unwrap();
    let aty = problem.op.apply_adjoint(&problem.y).unwrap();
    let (mut checked, mut bad) = (0usize, Vec::new());
    let (mut truncated, mut errored) = (0usize, 0usize);
    for penalty in [Penalty::L1, Penalty::L0] {
        let auto = auto_lambda0(penalty, &aty);
        for gamma in [0.5, 0.8, 0.95] {
            for kmax in [1, 3, 5] {
                for lambda0 in [Lambda0::Auto, Lambda0::Value(2.0 * auto)] {
                    let l0 = match lambda0 {
                        Lambda0::Auto => auto,
                        Lambda0::Value(v) => v,
                    };
                    for star in [Some(1e-1), Some(1e-3), None] {
                        let lambda_star = star.map_or(LambdaStar::FullPath, |r| LambdaStar::Value(r * l0));
                        let cfg = SolverConfig::new(penalty)
                            .with_gamma(gamma)
                            .with_kmax(kmax)
                            .with_lambda0(lambda0)
                            .with_lambda_star(lambda_star)
                            .with_path_len(200);
                        let path = match continuation_solve(&problem.op, &problem.y, &cfg) {
                            Ok((_, path)) => path,
                            Err(sparsepath::Error::Divergence { .. }) => {
                                errored += 1;
                                continue;
                            }
                            Err(e) => panic!("{e}"),
                        };
                        let auto_mv = matches!(lambda0, Lambda0::Auto) as u64;
                        let base = 2 * kmax as u64 * path.steps() as u64 + auto_mv;
                        let cap = match star {
                            Some(r) => ((r.ln() / gamma.ln()).ceil() as usize).min(200),
                            None => 200,
                        };
                        let ok = if path.stop == StopReason::Diverged {
                            // The aborted step's products are counted too.
                            truncated += 1;
                            path.n_matvec > base && path.n_matvec <= base + 2 * kmax as u64
                        } else {
                            checked += 1;
                            path.n_matvec == base
                        };
                        if !ok || path.steps() > cap {
                            bad.push(format!(
                                "{penalty:?} gamma {gamma} kmax {kmax} {lambda0:?} {star:?} ({:?}): nMV {} vs {base}, steps {} vs cap {cap}",
                                path.stop,
                                path.n_matvec,
                                path.steps()
                            ));
                        }
                    }
                }
            }
        }
    }
    let mut detail = format!(
        "{checked} completed runs with exact nMV = 2*Kmax*steps + auto and steps within the bound, {} mismatches; \
         {truncated} full-path runs truncated at divergence (nMV within the aborted step), \
         {errored} explicit-lambda* runs stopped by the divergence error",
        bad.len()
    );
    if let Some(b) = bad.first() {
        detail.push_str(&format!("; first: {b}"));
    }
    verdict(bad.is_empty() && checked > 0, detail)
}

/// Count of strict increases in a sequence that should not increase.
fn inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let w = workers();
    let mut s_spec = SweepSpec::vary_s();
    s_spec.values = vec![10.0, 100.0];
    s_spec.replications = 50;
    let s_table = support_probability_sweep(&s_spec, Penalty::L0, w).unwrap();
    let mut sig_spec = SweepSpec::vary_sigma();
    sig_spec.replications = 50;
    let sig_table = support_probability_sweep(&sig_spec, Penalty::L0, w).unwrap();

    let easy = s_table.probability_at(10.0).unwrap();
    let hard = s_table.probability_at(100.0).unwrap();
    let probs: Vec<f64> = sig_table.rows.iter().map(|r| r.probability).collect();
    let inv = inversions(&probs);
    let (fast, time) = within(Duration::from_secs(600), start.elapsed());
    let probs_text: Vec<String> = probs.iter().map(|p| format!("{p:.2}")).collect();
    verdict(
        easy >= 0.9 && hard <= 0.5 && inv <= 1 && fast,
        format!(
            "IHTC, 50 reps: P(s=10) = {easy:.2}, P(s=100) = {hard:.2}; sigma grid {:?} at s=50 -> [{}], {inv} inversions; {time}",
            sig_spec.values,
            probs_text.join(", ")
        ),
    )
}

fn criterion_6() -> Verdict {
    let spec = BenchSpec::default();
    let rows = benchmark_table(&spec, Penalty::L1, workers()).unwrap();
    let r = &rows[0];
    verdict(
        (1.4e-3..=1.3e-2).contains(&r.rel_l2) && r.abs_linf <= 1.0,
        format!(
            "ISTC Bernoulli n={} p={} s={} DR=100 sigma=5e-2, {} reps: mean Rel-l2 {:.3e}, Ab-linf {:.3e}, mean nMV {:.1}",
            r.n, r.p, r.s, r.replications, r.rel_l2, r.abs_linf, r.n_matvec
        ),
    )
}

/// Three-point running median; the end points are kept.
fn median3(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for i in 1..values.len().saturating_sub(1) {
        let mut w = [values[i - 1], values[i], values[i + 1]];
        w.sort_by(f64::total_cmp);
        out[i] = w[1];
    }
    out
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let w = workers();
    let spec = PhaseSpec {
        p: 400,
        delta_grid: sparsepath::experiments::linspace(0.1, 1.0, 15),
        rho_grid: sparsepath::experiments::linspace(0.1, 1.0, 15),
        trials: 20,
        ..PhaseSpec::default()
    };
    let grid = phase_transition_grid(&spec, Penalty::L1, w).unwrap();
    let easy = phase_cell(&spec, Penalty::L1, 0.9, 0.12, w).unwrap();
    let hard = phase_cell(&spec, Penalty::L1, 0.2, 0.9, w).unwrap();
    let curve: Vec<f64> = grid.curve90.iter().map(|c| c.rho90).collect();
    let defined = curve.len() == spec.delta_grid.len() && curve.iter().all(|v| v.is_finite());
    let flagged = grid.curve90.iter().filter(|c| c.method.is_flagged()).count();
    let smooth = median3(&curve);
    let monotone = smooth.windows(2).all(|w| w[1] >= w[0]);
    let (fast, time) = within(Duration::from_secs(900), start.elapsed());
    let text: Vec<String> = smooth.iter().map(|v| format!("{v:.3}")).collect();
    verdict(
        easy.rate() == 1.0 && hard.rate() <= 0.1 && defined && monotone && fast,
        format!(
            "ISTC p=400 15x15x20: rate(0.9,0.12) = {:.2}, rate(0.2,0.9) = {:.2}; rho90 defined for {}/{} columns ({flagged} flagged); \
             smoothed rho90 [{}] {}; {time}",
            easy.rate(),
            hard.rate(),
            curve.iter().filter(|v| v.is_finite()).count(),
            spec.delta_grid.len(),
            text.join(", "),
            if monotone { "nondecreasing" } else { "NOT nondecreasing" }
        ),
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let r = haar1d_reconstruction(&Haar1dSpec::default(), Penalty::L0).unwrap();
    let (fast, time) = within(Duration::from_secs(30), start.elapsed());
    verdict(
        r.psnr_db >= 45.0 && fast,
        format!("IHTC n=665 p=1024 s={} sigma=1e-4: PSNR {:.1} dB, nMV {}; {time}", r.s, r.psnr_db, r.n_matvec),
    )
}

fn run_cli(args: &[&str], out: &Path, workers: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_sparsepath"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg(workers.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))
    }
}

/// Every output file below `dir` with nondeterministic content removed.
fn numeric_outputs(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let bytes = fs::read(&path).unwrap();
            let rel = path.strip_prefix(dir).unwrap().to_path_buf();
            let kept = match name.as_str() {
                "bench_timing.csv" => continue,
                "run_manifest.json" => {
                    // Keep the resolved config and output list, drop timing and host.
                    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                    serde_json::to_vec(&(&v["command"], &v["config"], &v["outputs"])).unwrap()
                }
                "metrics.csv" => String::from_utf8(bytes)
                    .unwrap()
                    .lines()
                    .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string() + "\n")
                    .collect::<String>()
                    .into_bytes(),
                _ => bytes,
            };
            files.insert(rel, kept);
        }
    }
    files
}

fn criterion_9() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let problem = root.path().join("problem");
    if let Err(e) = run_cli(&["gen", "--n", "200", "--p", "400", "--s", "8", "--seed", "3"], &problem, 1) {
        return verdict(false, e);
    }
    let p = problem.to_str().unwrap().to_string();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("gen", vec!["gen", "--kind", "bernoulli", "--n", "100", "--p", "300", "--s", "6", "--seed", "5"]),
        ("solve-theory", vec!["solve", "--problem", &p, "--penalty", "l0", "--lambda-star", "auto", "--mu-s", "0.05", "--c0", "3"]),
        ("solve-full", vec!["solve", "--problem", &p]),
        ("path", vec!["path", "--problem", &p, "--penalty", "l0"]),
        ("sweep", vec!["sweep", "--values", "5,40", "--n", "100", "--p", "200", "--replications", "6"]),
        ("phase", vec!["phase", "--p", "100", "--grid-size", "4", "--trials", "3", "--series"]),
        ("bench", vec!["bench", "--sizes", "400,800", "--replications", "3"]),
        ("haar1d", vec!["haar1d"]),
    ];
    let mut mismatches = Vec::new();
    let mut compared = 0usize;
    for (name, args) in &commands {
        let runs: Vec<(usize, PathBuf)> =
            [(1, "w1"), (4, "w4"), (4, "w4-again")].iter().map(|(k, tag)| (*k, root.path().join(format!("{name}-{tag}")))).collect();
        for (k, dir) in &runs {
            if let Err(e) = run_cli(args, dir, *k) {
                return verdict(false, e);
            }
        }
        let base = numeric_outputs(&runs[0].1);
        for (_, dir) in &runs[1..] {
            let other = numeric_outputs(dir);
            if other != base {
                let diff: Vec<String> = base
                    .keys()
                    .chain(other.keys())
                    .filter(|k| base.get(*k) != other.get(*k))
                    .map(|k| k.display().to_string())
                    .collect();
                mismatches.push(format!("{name}: {}", diff.join(" ")));
            }
        }
        compared += base.len();
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "{} commands x (workers 1, 4, 4 again), {compared} files each byte-identical excluding wall-time fields{}",
            commands.len(),
            if mismatches.is_empty() { String::new() } else { format!("; differing: {}", mismatches.join("; ")) }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("Lemma 1 property suite", criterion_1),
        ("orthogonal-design oracle", criterion_2),
        ("theory guarantee end to end", criterion_3),
        ("matvec accounting", criterion_4),
        ("support-recovery sweeps", criterion_5),
        ("benchmark table", criterion_6),
        ("phase transition", criterion_7),
        ("1D Fourier-Haar reconstruction", criterion_8),
        ("determinism", criterion_9),
    ];
    let filter: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if filter.as_ref().is_some_and(|f| !f.contains(&id)) {
            continue;
        }
        let v = check();
        println!("{} criterion {id} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += (!v.pass) as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
