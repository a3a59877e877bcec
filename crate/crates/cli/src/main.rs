//! `garo`: solve single instances, run the knapsack benchmark and print
//! closed-form checks.

mod instance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use garo_core::adaptive::{build_nested_sets, huber_family, solve_adaptive_garo};
use garo_core::analytic::weber_garo;
use garo_core::baselines::{solve_regret_discrete, solve_ro_discrete, solve_satisficing, SatConfig};
use garo_core::experiment::{
    emit_csv, run_suite, write_guarantees, DataVariant, ExperimentReport, MethodKind, SuiteConfig,
    GUARANTEES_FILE,
};
use garo_core::garo::{
    solve_garo_constraint_generation, solve_garo_discretized, LipschitzSeparation, ParametricSeparation,
    ScenarioSeparation, Separation, DEFAULT_CG_MAX_ITER,
};
use garo_core::robust::{robust_oracle, trace_oracle_path};
use garo_core::{Error, GammaInterval, RateFunction, UncertaintyModel};
use log::{error, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use instance::InstanceFile;

#[derive(Parser)]
#[command(name = "garo", version, about = "Globalized adversarial regret optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file with one method and print the decision as JSON.
    Solve(SolveArgs),
    /// Run the knapsack suite and write tradeoff.csv and guarantees.csv.
    Bench(SuiteArgs),
    /// Run only the methods with guarantee curves and write guarantees.csv.
    Curve(SuiteArgs),
    /// Adaptive decision from a family of Huber estimates on Gaussian data.
    Adaptive(AdaptiveArgs),
    /// Closed-form half-line location problem.
    Weber(WeberArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Ro,
    Rod,
    Sat,
    Reg,
    Garo,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON instance file.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "garo")]
    method: SolveMethod,
    /// Radius fraction for ro/rod/reg, target factor for sat, rate exponent for garo.
    #[arg(long, default_value_t = 1.0)]
    param: f64,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    /// Solve GARO over the continuous interval by constraint generation.
    #[arg(long)]
    cg: bool,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

#[derive(Args)]
struct SuiteArgs {
    /// Decision dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Samples per dataset.
    #[arg(long)]
    m: Option<usize>,
    /// Instances and datasets per instance; `--seeds 3` runs 3×3 cells.
    #[arg(long)]
    seeds: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["gaussian", "inverse", "heavytail"])]
    data: Option<String>,
    /// Comma-separated subset of RO, ROd, SAT, REG, GARO.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Start from n=50, m=5000 and 5×5 cells instead of the desk defaults.
    #[arg(long)]
    full_scale: bool,
    #[arg(long, env = "GARO_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct AdaptiveArgs {
    #[arg(long, default_value_t = 0.0)]
    truth: f64,
    /// Noise level of the data.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Smallest Huber threshold; the others double.
    #[arg(long, default_value_t = 0.25)]
    kappa0: f64,
    /// Index of the largest threshold.
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WeberArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 4.0, 6.0])]
    q: Vec<f64>,
}

/// Errors that stem from the invocation rather than the computation.
fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::InvalidArgument(_) | Error::Io { .. } | Error::MalformedProgram(_))
}

fn fail(e: Error) -> ExitCode {
    error!("{e}");
    eprintln!("error: {e}");
    if is_config_error(&e) {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Bench(a) => suite(&a, false),
        Command::Curve(a) => suite(&a, true),
        Command::Adaptive(a) => adaptive(&a),
        Command::Weber(a) => weber(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn solve(a: &SolveArgs) -> Result<ExitCode, Error> {
    let inst = InstanceFile::load(&a.instance)?.build()?;
    let interval = GammaInterval::new(0.0, inst.gamma_max)?;
    let (prob, model) = (&inst.problem, &inst.model);
    let scenarios = |gamma: f64| -> Result<Vec<Vec<f64>>, Error> {
        match model {
            UncertaintyModel::Discrete(d) => Ok(d.active(gamma).into_iter().map(<[f64]>::to_vec).collect()),
            _ => Err(Error::invalid("rod and reg need a discrete model")),
        }
    };
    let out = match a.method {
        SolveMethod::Ro => {
            let sol = robust_oracle(prob, model, a.param * inst.gamma_max)?;
            json!({"method": "RO", "param": a.param, "gamma": sol.gamma, "x": sol.x, "value": sol.value})
        }
        SolveMethod::Rod => {
            let (x, value) = solve_ro_discrete(prob, &scenarios(a.param * inst.gamma_max)?)?;
            json!({"method": "ROd", "param": a.param, "x": x, "value": value})
        }
        SolveMethod::Reg => {
            let (x, regret) = solve_regret_discrete(prob, &scenarios(a.param * inst.gamma_max)?)?;
            json!({"method": "REG", "param": a.param, "x": x, "regret": regret})
        }
        SolveMethod::Sat => {
            let cfg = SatConfig {
                target_factor: a.param,
                grid: interval.grid(a.grid_size),
            };
            let sol = solve_satisficing(prob, model, &cfg)?;
            json!({"method": "SAT", "param": a.param, "x": sol.x, "alpha": sol.alpha, "target": sol.target})
        }
        SolveMethod::Garo => {
            let rate = RateFunction::power(a.param)?;
            let sol = if a.cg {
                let sep: Box<dyn Separation> = match model {
                    UncertaintyModel::NormBall(b) if b.norm.is_polyhedral() => Box::new(ParametricSeparation {
                        path: trace_oracle_path(prob, b, interval)?,
                    }),
                    UncertaintyModel::Discrete(_) => Box::new(ScenarioSeparation),
                    _ => Box::new(LipschitzSeparation::default()),
                };
                solve_garo_constraint_generation(prob, model, interval, &rate, sep.as_ref(), a.eps, DEFAULT_CG_MAX_ITER)?
            } else {
                solve_garo_discretized(prob, model, &interval.grid(a.grid_size), &rate)?
            };
            json!({
                "method": "GARO",
                "param": a.param,
                "x": sol.x,
                "alpha": sol.alpha,
                "grid_points": sol.grid.len(),
                "min_slack": sol.min_slack(),
                "gap_bound": sol.gap_bound,
                "runtime_s": sol.runtime_s,
            })
        }
    };
    print_json(&out);
    Ok(ExitCode::SUCCESS)
}

fn suite_config(a: &SuiteArgs, curves_only: bool) -> Result<SuiteConfig, Error> {
    let mut cfg = if a.full_scale {
        SuiteConfig::full_scale()
    } else {
        SuiteConfig::desk_scale()
    };
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(m) = a.m {
        cfg.m = m;
    }
    if let Some(k) = a.seeds {
        cfg.instances = k;
        cfg.datasets = k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(d) = &a.data {
        cfg.variant = d.parse::<DataVariant>()?;
    }
    if let Some(list) = &a.methods {
        cfg.methods = list.iter().map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
    }
    if curves_only {
        cfg.methods.retain(|m| matches!(m, MethodKind::Ro | MethodKind::Sat | MethodKind::Garo));
    }
    if let Some(g) = a.grid_size {
        cfg.grid.grid_size = g;
    }
    if a.threads == Some(0) {
        return Err(Error::invalid("GARO_THREADS must be positive"));
    }
    cfg.threads = a.threads;
    Ok(cfg)
}

fn summarize(report: &ExperimentReport) {
    let mut methods: Vec<(&str, f64)> = Vec::new();
    for r in &report.rows {
        if !methods.iter().any(|(m, p)| *m == r.method && *p == r.param) {
            methods.push((&r.method, r.param));
        }
    }
    println!("{:<6} {:>6} {:>12} {:>12} {:>12}", "method", "param", "mean", "q90", "worst");
    for (m, p) in methods {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.method == m && r.param == p).collect();
        let avg = |f: fn(&garo_core::experiment::ReportRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64;
        println!(
            "{m:<6} {p:>6.2} {:>12.3} {:>12.3} {:>12.3}",
            avg(|r| r.mean),
            avg(|r| r.q90),
            avg(|r| r.worst)
        );
    }
}

fn suite(a: &SuiteArgs, curves_only: bool) -> Result<ExitCode, Error> {
    let cfg = suite_config(a, curves_only)?;
    info!(
        "suite: n={} m={} cells={}×{} data={} methods={:?}",
        cfg.n,
        cfg.m,
        cfg.instances,
        cfg.datasets,
        cfg.variant.label(),
        cfg.methods
    );
    let report = run_suite(&cfg)?;
    if curves_only {
        std::fs::create_dir_all(&a.out).map_err(|e| Error::Io {
            path: a.out.display().to_string(),
            message: e.to_string(),
        })?;
        let path = a.out.join(GUARANTEES_FILE);
        write_guarantees(&report.guarantees, &path)?;
        println!("wrote {}", path.display());
    } else {
        let (t, g) = emit_csv(&report, &a.out)?;
        summarize(&report);
        println!("wrote {} and {}", t.display(), g.display());
    }
    for f in &report.failures {
        error!(
            "cell instance={} data={} method={} param={:?}: {}",
            f.instance, f.data, f.method, f.param, f.message
        );
    }
    Ok(if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn adaptive(a: &AdaptiveArgs) -> Result<ExitCode, Error> {
    let noise = Normal::new(0.0, a.sigma).map_err(|e| Error::invalid(format!("sigma: {e}")))?;
    if a.trials == 0 || a.samples == 0 {
        return Err(Error::invalid("trials and samples must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let j_star = (0..=a.levels)
        .find(|&j| a.kappa0 * 2f64.powi(j as i32) >= a.sigma)
        .unwrap_or(a.levels);
    let mut hits = 0;
    for trial in 0..a.trials {
        let data: Vec<f64> = (0..a.samples).map(|_| a.truth + noise.sample(&mut rng)).collect();
        let family = huber_family(&data, a.kappa0, 2.0, a.levels, a.delta)?;
        let sets = build_nested_sets(&family);
        let sol = solve_adaptive_garo(&sets)?;
        let radius = family.entries()[j_star].1;
        let covered = (sol.x - a.truth).abs() <= 2.0 * radius;
        hits += usize::from(covered);
        if trial == 0 {
            for (j, ((est, r), level)) in family.entries().iter().zip(&sets.levels).enumerate() {
                println!("level {j}: estimate {est:.5} radius {r:.5} meet {level:?}");
            }
            println!("decision {:.6} ratio {:.6} (bound 1)", sol.x, sol.alpha);
        }
    }
    println!(
        "|x − truth| ≤ 2·radius[{j_star}] held in {hits}/{} trials",
        a.trials
    );
    Ok(ExitCode::SUCCESS)
}

fn weber(a: &WeberArgs) -> Result<ExitCode, Error> {
    println!("{:>6} {:>14} {:>14} {:>14}", "q", "mu_lo", "mu_hi", "alpha");
    for &q in &a.q {
        let s = weber_garo(q)?;
        println!("{q:>6} {:>14.9} {:>14.9} {:>14.9}", s.mu_lo, s.mu_hi, s.alpha);
    }
    Ok(ExitCode::SUCCESS)
}
