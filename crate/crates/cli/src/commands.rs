use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};
use sparsepath::experiments::{
    benchmark_table, haar1d_reconstruction, phase_transition_grid, support_probability_sweep, BenchRow, RunManifest,
};
use sparsepath::linop::io::write_vector;
use sparsepath::probgen::{load_problem, save_problem, ProblemManifest};
use sparsepath::solver::theoretical_error_bound;
use sparsepath::{
    continuation_solve, gamma_lower_bound, gen_problem, mutual_coherence, reconstruction_metrics, select, LambdaStar,
    Metrics, Penalty, SolverConfig, StopReason, TheoryParams,
};

use crate::args::{BenchArgs, Command, Common, GenArgs, Haar1dArgs, PathArgs, PhaseArgs, SolveArgs, SweepArgs};
use crate::config::{
    read_config_file, resolve, BenchConfig, GenConfig, Haar1dConfig, LambdaStarArg, LambdaStarMode, PathConfig,
    PhaseConfig, SolveConfig, SweepConfig,
};
use crate::failure::CliError;

pub const RUN_MANIFEST: &str = "run_manifest.json";

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Path(a) => path(a),
        Command::Sweep(a) => sweep(a),
        Command::Phase(a) => phase(a),
        Command::Bench(a) => bench(a),
        Command::Haar1d(a) => haar1d(a),
    }
}

/// Output directory plus the list of files written into it.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
    start: Instant,
    workers: usize,
}

impl Output {
    fn create(common: &Common) -> Result<Self> {
        fs::create_dir_all(&common.out)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", common.out.display())))?;
        let workers = match common.workers {
            Some(w) => w as usize,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(Self {
            dir: common.out.clone(),
            files: Vec::new(),
            start: Instant::now(),
            workers,
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(CliError::runtime)?;
        self.text(name, &(text + "\n"))
    }

    fn vector(&mut self, name: &str, v: &[f64]) -> Result<()> {
        let path = self.path(name);
        write_vector(path, v).map_err(CliError::runtime)
    }

    fn finish(self, command: &str, config: &impl Serialize) -> Result<()> {
        let wall = self.start.elapsed().as_secs_f64();
        let manifest = RunManifest::new(command, config, self.files, self.workers, wall).map_err(CliError::runtime)?;
        manifest.write(self.dir.join(RUN_MANIFEST)).map_err(CliError::runtime)
    }
}

fn config_file(command: &str, common: &Common) -> Result<Option<Map<String, Value>>> {
    common.config.as_deref().map(|p| read_config_file(command, p)).transpose()
}

fn require_problem(problem: &Option<PathBuf>, command: &str) -> Result<PathBuf> {
    problem.clone().ok_or_else(|| {
        CliError::config(format!("`{command}` needs --problem <DIR> or a \"problem\" key in the config"))
    })
}

fn gen(args: GenArgs) -> Result<()> {
    let file = config_file("gen", &args.common)?;
    let cfg: GenConfig = resolve(&GenConfig::default(), file, &args.flags)?;
    let problem = gen_problem(&cfg.problem_spec())?;
    let mu = if cfg.compute_mu {
        Some(mutual_coherence(&problem.op)?.mu)
    } else {
        None
    };
    let mut out = Output::create(&args.common)?;
    let manifest = save_problem(&problem, &out.dir, mu).map_err(CliError::runtime)?;
    out.files.extend(manifest.matrix_file.iter().cloned());
    out.files.push(manifest.x_true_file.clone());
    out.files.push(manifest.y_file.clone());
    out.files.push(sparsepath::probgen::MANIFEST_FILE.to_string());
    out.finish("gen", &cfg)
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    mode: &'static str,
    penalty: Penalty,
    lambda0: f64,
    lambda_star: Option<f64>,
    gamma_lower_bound: Option<f64>,
    error_bound: Option<f64>,
    stop: StopReason,
    steps: usize,
    n_matvec: u64,
    selected_index: usize,
    selected_lambda: f64,
    support_size: usize,
}

/// Stopping rule for `solve`, with the theory constants when the a priori rule applies.
fn lambda_star_rule(cfg: &SolveConfig, manifest: &ProblemManifest) -> Result<(LambdaStar, Option<TheoryParams>)> {
    match cfg.lambda_star {
        LambdaStarArg::Value(v) => Ok((LambdaStar::Value(v), None)),
        LambdaStarArg::Mode(LambdaStarMode::FullPath) => Ok((LambdaStar::FullPath, None)),
        LambdaStarArg::Mode(LambdaStarMode::Auto) => {
            let c = match cfg.penalty {
                Penalty::L1 => cfg.c1,
                Penalty::L0 => cfg.c0,
            };
            let (Some(mu_s), Some(c)) = (cfg.mu_s, c) else {
                // Without the theory inputs the noise level is treated as unknown.
                return Ok((LambdaStar::FullPath, None));
            };
            let s = manifest.sparsity.max(1);
            let theory = TheoryParams {
                mu: mu_s / s as f64,
                s,
                c,
                epsilon: cfg.epsilon.unwrap_or(manifest.epsilon),
            };
            theory.validate(cfg.penalty)?;
            let lower = gamma_lower_bound(&theory, cfg.penalty)?;
            if cfg.path.gamma < lower {
                return Err(CliError::config(format!(
                    "gamma = {} is below the admissible lower bound {lower} for these theory constants",
                    cfg.path.gamma
                )));
            }
            Ok((LambdaStar::Theory(theory), Some(theory)))
        }
    }
}

fn solve(args: SolveArgs) -> Result<()> {
    let file = config_file("solve", &args.common)?;
    let cfg: SolveConfig = resolve(&SolveConfig::default(), file, &args.flags)?;
    let (problem, manifest) = load_problem(require_problem(&cfg.problem, "solve")?)?;
    let (lambda_star, theory) = lambda_star_rule(&cfg, &manifest)?;
    let solver = SolverConfig {
        penalty: cfg.penalty,
        lambda0: cfg.lambda0,
        gamma: cfg.path.gamma,
        kmax: cfg.path.kmax,
        lambda_star,
        path_len: cfg.path.path_len,
    };
    let mut out = Output::create(&args.common)?;
    let (x, result) = continuation_solve(&problem.op, &problem.y, &solver)?;

    let full_path = matches!(lambda_star, LambdaStar::FullPath);
    let (x, index, selection) = if full_path {
        let sel = select(&result, problem.op.nrows(), cfg.path.criterion())?;
        (sel.x.clone(), sel.index, Some(sel))
    } else {
        (x, result.len() - 1, None)
    };
    let metrics = reconstruction_metrics(&x, &problem.x_true)?.with_cost(result.n_matvec, out.start.elapsed().as_secs_f64());

    let summary = SolveSummary {
        mode: match (full_path, theory.is_some()) {
            (true, _) => "full_path_selection",
            (false, true) => "theory",
            (false, false) => "explicit",
        },
        penalty: cfg.penalty,
        lambda0: result.lambdas[0],
        lambda_star: solver.resolve_lambda_star()?,
        gamma_lower_bound: theory.map(|t| gamma_lower_bound(&t, cfg.penalty)).transpose()?,
        error_bound: theory.and_then(|t| theoretical_error_bound(&t, cfg.penalty).ok()),
        stop: result.stop,
        steps: result.steps(),
        n_matvec: result.n_matvec,
        selected_index: index,
        selected_lambda: result.lambdas[index],
        support_size: x.iter().filter(|v| **v != 0.0).count(),
    };
    out.vector("x.bin", &x)?;
    out.text("path.csv", &result.to_csv())?;
    if let Some(sel) = &selection {
        out.text("selection.csv", &sel.scores_csv())?;
    }
    write_metrics(&mut out, &metrics)?;
    out.json("summary.json", &summary)?;
    out.finish("solve", &cfg)
}

fn write_metrics(out: &mut Output, m: &Metrics) -> Result<()> {
    out.text("metrics.csv", &format!("{}\n{}\n", Metrics::CSV_HEADER, m.csv_row()))
}

fn path(args: PathArgs) -> Result<()> {
    let file = config_file("path", &args.common)?;
    let cfg: PathConfig = resolve(&PathConfig::default(), file, &args.flags)?;
    let (problem, _) = load_problem(require_problem(&cfg.problem, "path")?)?;
    let solver = SolverConfig::new(cfg.penalty)
        .with_gamma(cfg.path.gamma)
        .with_kmax(cfg.path.kmax)
        .with_path_len(cfg.path.path_len);
    let mut out = Output::create(&args.common)?;
    let (_, result) = continuation_solve(&problem.op, &problem.y, &solver)?;
    let sel = select(&result, problem.op.nrows(), cfg.path.criterion())?;
    let metrics =
        reconstruction_metrics(&sel.x, &problem.x_true)?.with_cost(result.n_matvec, out.start.elapsed().as_secs_f64());
    out.vector("x.bin", &sel.x)?;
    out.text("path.csv", &result.to_csv())?;
    out.text("selection.csv", &sel.scores_csv())?;
    write_metrics(&mut out, &metrics)?;
    out.json(
        "summary.json",
        &SolveSummary {
            mode: "full_path_selection",
            penalty: cfg.penalty,
            lambda0: result.lambdas[0],
            lambda_star: None,
            gamma_lower_bound: None,
            error_bound: None,
            stop: result.stop,
            steps: result.steps(),
            n_matvec: result.n_matvec,
            selected_index: sel.index,
            selected_lambda: sel.lambda,
            support_size: sel.x.iter().filter(|v| **v != 0.0).count(),
        },
    )?;
    out.finish("path", &cfg)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let file = config_file("sweep", &args.common)?;
    // The varied parameter picks the preset that supplies every other default.
    let varied = match (&args.flags.varied, file.as_ref().and_then(|f| f.get("varied"))) {
        (Some(v), _) => *v,
        (None, Some(v)) => serde_json::from_value(v.clone())
            .map_err(|e| CliError::config(format!("invalid configuration: varied: {e}")))?,
        (None, None) => sparsepath::experiments::Varied::S,
    };
    let cfg: SweepConfig = resolve(&SweepConfig::preset(varied), file, &args.flags)?;
    let mut out = Output::create(&args.common)?;
    let table = support_probability_sweep(&cfg.spec(), cfg.penalty, out.workers)?;
    out.text("sweep.csv", &table.to_csv())?;
    out.finish("sweep", &cfg)
}

fn phase(args: PhaseArgs) -> Result<()> {
    let file = config_file("phase", &args.common)?;
    let mut cfg: PhaseConfig = resolve(&PhaseConfig::default(), file, &args.flags)?;
    cfg.materialize()?;
    let mut out = Output::create(&args.common)?;
    let grid = phase_transition_grid(&cfg.spec(), cfg.penalty, out.workers)?;
    out.text("phase_grid.csv", &grid.to_csv())?;
    out.text("phase_curve.csv", &grid.curve_csv())?;
    if args.series {
        let dir = out.dir.join("series");
        fs::create_dir_all(&dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        for (i, delta) in grid.delta_grid.iter().enumerate() {
            out.text(&format!("series/delta_{delta:.4}.csv"), &grid.series_csv(i))?;
        }
    }
    out.finish("phase", &cfg)
}

fn bench(args: BenchArgs) -> Result<()> {
    let file = config_file("bench", &args.common)?;
    let cfg: BenchConfig = resolve(&BenchConfig::default(), file, &args.flags)?;
    let mut out = Output::create(&args.common)?;
    let rows = benchmark_table(&cfg.spec(), cfg.penalty, out.workers)?;
    out.text("bench.csv", &BenchRow::to_csv(&rows))?;
    out.text("bench_timing.csv", &BenchRow::timing_csv(&rows))?;
    out.finish("bench", &cfg)
}

#[derive(Debug, Serialize)]
struct Haar1dSummary {
    s: usize,
    psnr_db: f64,
    rel_l2: f64,
    lambda: f64,
    n_matvec: u64,
}

fn haar1d(args: Haar1dArgs) -> Result<()> {
    let file = config_file("haar1d", &args.common)?;
    let cfg: Haar1dConfig = resolve(&Haar1dConfig::default(), file, &args.flags)?;
    let mut out = Output::create(&args.common)?;
    let r = haar1d_reconstruction(&cfg.spec(), cfg.penalty)?;
    out.text("haar1d_signal.csv", &r.signal_csv())?;
    out.json(
        "summary.json",
        &Haar1dSummary {
            s: r.s,
            psnr_db: r.psnr_db,
            rel_l2: r.rel_l2,
            lambda: r.lambda,
            n_matvec: r.n_matvec,
        },
    )?;
    out.finish("haar1d", &cfg)
}
