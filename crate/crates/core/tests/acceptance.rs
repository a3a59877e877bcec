//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a hard criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use garo_core::adaptive::{build_nested_sets, huber_family, solve_adaptive_garo, EstimatorFamily};
use garo_core::analytic::weber_garo;
use garo_core::experiment::{run_suite, SuiteConfig};
use garo_core::garo::{
    audit, discretization_error_bound, regret_lipschitz, separate_parametric, solve_garo_constraint_generation,
    solve_garo_discretized, solve_garo_two_point, LipschitzSeparation, ParametricSeparation, RateFunction,
    Separation, DEFAULT_CG_MAX_ITER,
};
use garo_core::robust::{trace_oracle_path, LinearDecisionProblem, RobustOracle};
use garo_core::uncertainty::{
    kl_worst_case, DiscreteScenarios, Ellipsoid, GammaInterval, Norm, NormBall, UncertaintyModel,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

enum Outcome {
    Pass(String),
    Fail(String),
    /// Soft criteria report but never fail the run.
    Soft(bool, String),
}

type Check = fn() -> Result<Outcome, garo_core::Error>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

fn simplex_l1() -> (LinearDecisionProblem, NormBall) {
    (
        LinearDecisionProblem::simplex(2).unwrap(),
        NormBall {
            center: vec![1.0, 2.0],
            norm: Norm::L1,
        },
    )
}

/// φ flat up to a kink, then steep, so the binding radius sits at the kink.
/// The kink lies strictly between grid points for every tested spacing, at
/// 77% and 85% of a cell for Δ = 0.5 and Δ = 0.1.
fn kink_rate() -> RateFunction {
    RateFunction::tabulated(vec![(0.0, 1.0), (KINK, 1.0), (2.0, 1.0 + 20.0 * (2.0 - KINK))]).unwrap()
}

const KINK: f64 = 1.385;

/// Random polytope `{x ∈ [0, 1]ⁿ : Σx ≥ 1, aᵀx ≥ b}` with a norm-ball model.
fn random_polyhedral(rng: &mut ChaCha8Rng) -> (LinearDecisionProblem, NormBall, f64) {
    let n = rng.random_range(2..=5);
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let b = 0.5 * a.iter().sum::<f64>() * rng.random_range(0.2..0.8);
    let prob = LinearDecisionProblem::new(
        vec![vec![1.0; n], a.clone()],
        vec![1.0, b],
        vec![(0.0, 1.0); n],
    )
    .unwrap();
    let ball = NormBall {
        center: (0..n).map(|_| rng.random_range(0.5..3.0)).collect(),
        norm: if rng.random::<bool>() { Norm::L1 } else { Norm::Linf },
    };
    (prob, ball, rng.random_range(0.5..3.0))
}

fn c1_weber() -> Result<Outcome, garo_core::Error> {
    let two = weber_garo(2.0)?;
    let exact_two = (two.mu_lo, two.mu_hi, two.alpha) == (0.0, 1.0, 1.0);
    let four = weber_garo(4.0)?;
    let root = 0.5 * (2f64.sqrt() - 1.0);
    // Grid minimization of max_γ (μ − γ)²/(1 + γ)⁴ over μ.
    let gammas = linspace(0.0, 20.0, 8001);
    let (mut best_mu, mut best_ratio) = (0.0, f64::INFINITY);
    for mu in linspace(0.0, 1.0, 2001) {
        let r = gammas
            .iter()
            .map(|&g| (mu - g).powi(2) / (1.0 + g).powi(4))
            .fold(0.0, f64::max);
        if r < best_ratio {
            (best_mu, best_ratio) = (mu, r);
        }
    }
    let ok = exact_two
        && (four.mu_lo - root).abs() <= 1e-6
        && (four.mu_lo - best_mu).abs() <= 1e-3
        && (four.alpha - best_ratio).abs() <= 1e-3;
    Ok(verdict(
        ok,
        format!(
            "q=2 → {two:?}; q=4 μ={:.9} (root {root:.9}, grid {best_mu:.4}), α={:.6} (grid {best_ratio:.6})",
            four.mu_lo, four.alpha
        ),
    ))
}

fn c2_two_point() -> Result<Outcome, garo_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (prob, ball, top) = random_polyhedral(&mut rng);
        let rate = if rng.random::<bool>() {
            RateFunction::Constant
        } else {
            RateFunction::power(rng.random_range(0.0..=1.0))?
        };
        let model = UncertaintyModel::NormBall(ball);
        let interval = GammaInterval::new(0.0, top)?;
        let tp = solve_garo_two_point(&prob, &model, interval, &rate)?;
        let grid = solve_garo_discretized(&prob, &model, &interval.grid(200), &rate)?;
        worst = worst.max((tp.alpha - grid.alpha).abs());
    }
    Ok(verdict(worst <= 1e-6, format!("max |α_two-point − α_grid200| = {worst:.2e}")))
}

fn c3_discretization() -> Result<Outcome, garo_core::Error> {
    let (prob, ball) = simplex_l1();
    let model = UncertaintyModel::NormBall(ball.clone());
    let interval = GammaInterval::new(0.0, 2.0)?;
    let rate = kink_rate();
    let oracle = RobustOracle::new(&prob, &model)?;
    let path = trace_oracle_path(&prob, &ball, interval)?;
    let exact = solve_garo_constraint_generation(
        &prob,
        &model,
        interval,
        &rate,
        &ParametricSeparation { path },
        1e-12,
        DEFAULT_CG_MAX_ITER,
    )?;
    let lipschitz = regret_lipschitz(&oracle, interval)?;
    let rate_slope = rate.slope_bound(interval);
    let rate_min = rate.min_on(interval)?;
    let audit_grid = interval.grid(10_001);
    let mut ok = true;
    let mut gaps = Vec::new();
    let mut detail = Vec::new();
    for spacing in [0.5f64, 0.25, 0.1, 0.05] {
        let count = (2.0 / spacing).round() as usize + 1;
        let sol = solve_garo_discretized(&prob, &model, &interval.grid(count), &rate)?;
        let bound = discretization_error_bound(spacing, lipschitz, rate_slope, sol.alpha)?;
        let violation = audit(&oracle, &sol.x, sol.alpha, &rate, &audit_grid)?;
        let gap = exact.alpha - sol.alpha;
        ok &= violation <= bound && gap <= bound / rate_min + 1e-9 && gap >= -1e-9;
        gaps.push(gap);
        detail.push(format!("Δ={spacing}: viol {violation:.4} ≤ {bound:.3}, gap {gap:.5}"));
    }
    let ratios = [gaps[1] / gaps[0], gaps[3] / gaps[2]];
    ok &= ratios.iter().all(|r| (0.3..=0.7).contains(r));
    detail.push(format!("halving ratios {:.3}, {:.3}", ratios[0], ratios[1]));
    Ok(verdict(ok, detail.join("; ")))
}

fn c4_constraint_generation() -> Result<Outcome, garo_core::Error> {
    let eps = 1e-6;
    let mut cases: Vec<(LinearDecisionProblem, UncertaintyModel, GammaInterval, RateFunction)> = Vec::new();
    let (prob, ball) = simplex_l1();
    for rate in [RateFunction::Constant, RateFunction::power(1.0)?, kink_rate()] {
        cases.push((prob.clone(), UncertaintyModel::NormBall(ball.clone()), GammaInterval::new(0.0, 2.0)?, rate));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..4 {
        let (prob, ball, top) = random_polyhedral(&mut rng);
        let rate = RateFunction::power(rng.random_range(0.0..2.0))?;
        cases.push((prob, UncertaintyModel::NormBall(ball), GammaInterval::new(0.0, top)?, rate));
    }
    let ell = Ellipsoid::new(vec![1.0, 1.2, 0.8], DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, 0.5, 0.1, 0.0, 0.1, 0.7]))?;
    cases.push((
        LinearDecisionProblem::simplex(3)?,
        UncertaintyModel::Ellipsoid(ell),
        GammaInterval::new(0.0, 4.0)?,
        RateFunction::power(1.0)?,
    ));

    let mut ok = true;
    let (mut max_iter, mut worst_excess, mut worst_gap) = (0, f64::NEG_INFINITY, 0.0f64);
    for (prob, model, interval, rate) in &cases {
        let sep: Box<dyn Separation> = match model {
            UncertaintyModel::NormBall(b) => Box::new(ParametricSeparation {
                path: trace_oracle_path(prob, b, *interval)?,
            }),
            _ => Box::new(LipschitzSeparation::default()),
        };
        let sol = solve_garo_constraint_generation(prob, model, *interval, rate, sep.as_ref(), eps, DEFAULT_CG_MAX_ITER)?;
        max_iter = max_iter.max(sol.cg_log.len());
        let oracle = RobustOracle::new(prob, model)?;
        let excess = audit(&oracle, &sol.x, sol.alpha, rate, &interval.grid(10_000))?;
        worst_excess = worst_excess.max(excess);
        let mut dense = interval.grid(1001);
        dense.extend(&sol.grid);
        dense.sort_by(f64::total_cmp);
        dense.dedup();
        let alpha_dense = solve_garo_discretized(prob, model, &dense, rate)?.alpha;
        let rate_min = rate.min_on(*interval)?;
        let upper = sol.alpha + eps / rate_min + 1e-9;
        ok &= excess <= eps && sol.alpha <= alpha_dense + 1e-9 && alpha_dense <= upper;
        worst_gap = worst_gap.max(alpha_dense - sol.alpha);
    }
    Ok(verdict(
        ok && max_iter <= DEFAULT_CG_MAX_ITER,
        format!(
            "{} instances, max iterations {max_iter}, max audit excess {worst_excess:.2e}, max α_dense − α_cg {worst_gap:.2e}",
            cases.len()
        ),
    ))
}

fn c5_separation_agreement() -> Result<Outcome, garo_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let (prob, ball, top) = if trial % 2 == 0 {
            let (p, b) = simplex_l1();
            (p, b, 2.0)
        } else {
            random_polyhedral(&mut rng)
        };
        let interval = GammaInterval::new(0.0, top)?;
        let model = UncertaintyModel::NormBall(ball.clone());
        let oracle = RobustOracle::new(&prob, &model)?;
        let path = trace_oracle_path(&prob, &ball, interval)?;
        // A random convex combination of oracle decisions stays feasible.
        let xs: Vec<Vec<f64>> = interval.grid(4).iter().map(|&g| oracle.solve(g).map(|s| s.x)).collect::<Result<_, _>>()?;
        let w: Vec<f64> = (0..xs.len()).map(|_| rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let x: Vec<f64> = (0..prob.dim())
            .map(|i| xs.iter().zip(&w).map(|(v, wi)| v[i] * wi / total).sum())
            .collect();
        let alpha = rng.random_range(0.0..2.0);
        let rate = match trial % 3 {
            0 => RateFunction::Constant,
            1 => RateFunction::power(rng.random_range(0.0..2.0))?,
            _ => RateFunction::tabulated(vec![(0.0, 1.0), (0.5 * top, 1.5), (top, 4.0)])?,
        };
        let exact = separate_parametric(&path, &ball, &x, alpha, &rate, interval)?;
        let sawtooth = LipschitzSeparation::default().separate(&oracle, &x, alpha, &rate, interval, None)?;
        worst = worst.max((exact.violation - sawtooth.violation).abs());
    }
    Ok(verdict(worst <= 1e-6, format!("max violation difference {worst:.2e} over 50 pairs")))
}

/// `min_{x ∈ X} max_s p_sᵀx` on `X = {x ∈ [0,1]² : x₁ + x₂ ≥ 1}` for positive
/// costs: the optimum sits on the segment `x = (t, 1 − t)`, where the
/// objective is a maximum of lines in `t`.
fn segment_minmax(scenarios: &[&[f64]]) -> f64 {
    let line = |s: &[f64], t: f64| s[0] * t + s[1] * (1.0 - t);
    let mut ts = vec![0.0, 1.0];
    for (i, a) in scenarios.iter().enumerate() {
        for b in &scenarios[i + 1..] {
            let denom = (a[0] - a[1]) - (b[0] - b[1]);
            if denom.abs() > 1e-14 {
                let t = (b[1] - a[1]) / denom;
                if (0.0..=1.0).contains(&t) {
                    ts.push(t);
                }
            }
        }
    }
    ts.iter()
        .map(|&t| scenarios.iter().map(|s| line(s, t)).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn c6_brute_force() -> Result<Outcome, garo_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prob = LinearDecisionProblem::new(vec![vec![1.0, 1.0]], vec![1.0], vec![(0.0, 1.0); 2])?;
    let axis = linspace(0.0, 1.0, 200);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let center = vec![rng.random_range(1.0..1.6), rng.random_range(1.0..1.6)];
        let count = rng.random_range(3..8);
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|_| center.iter().map(|c| (c + rng.random_range(-0.3..0.3f64)).max(1.0)).collect())
            .collect();
        let metric = Ellipsoid::new(center.clone(), DMatrix::identity(2, 2))?;
        let dists: Vec<f64> = pts.iter().map(|p| metric.squared_distance(p)).collect();
        let top = dists.iter().copied().fold(0.0, f64::max);
        let mut grid: Vec<f64> = vec![0.0];
        grid.extend((0..rng.random_range(1..5)).map(|_| rng.random_range(0.0..=top)));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let rate = if rng.random::<bool>() { RateFunction::Constant } else { RateFunction::power(1.0)? };
        let scen = DiscreteScenarios::with_metric(pts.clone(), metric)?;
        let model = UncertaintyModel::Discrete(scen);
        let sol = solve_garo_discretized(&prob, &model, &grid, &rate)?;

        // Independent evaluation: active sets by direct distance checks.
        let active: Vec<Vec<&[f64]>> = grid
            .iter()
            .map(|&g| {
                let mut set: Vec<&[f64]> = vec![&center];
                set.extend(pts.iter().zip(&dists).filter(|(_, &d)| d <= g).map(|(p, _)| p.as_slice()));
                set
            })
            .collect();
        let optimal: Vec<f64> = active.iter().map(|s| segment_minmax(s)).collect();
        let rates: Vec<f64> = grid.iter().map(|&g| rate.eval(g)).collect::<Result<_, _>>()?;
        let mut best = f64::INFINITY;
        for &x0 in &axis {
            for &x1 in &axis {
                if x0 + x1 < 1.0 - 1e-12 {
                    continue;
                }
                let ratio = active
                    .iter()
                    .zip(&optimal)
                    .zip(&rates)
                    .map(|((set, v), phi)| {
                        let wc = set.iter().map(|p| p[0] * x0 + p[1] * x1).fold(f64::NEG_INFINITY, f64::max);
                        (wc - v) / phi
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                best = best.min(ratio);
            }
        }
        worst = worst.max((best - sol.alpha).abs());
    }
    Ok(verdict(worst <= 2e-3, format!("max |α_grid-search − α_GARO| = {worst:.2e} over 10 problems")))
}

fn c7_adaptive() -> Result<Outcome, garo_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 1000 {
        let len = rng.random_range(1..=8);
        let truth = rng.random_range(-5.0..5.0);
        let mut entries: Vec<(f64, f64)> = (0..len)
            .map(|_| {
                let r = rng.random_range(0.05..4.0);
                (truth + r * rng.random_range(-1.0..1.0), r)
            })
            .collect();
        entries.sort_by(|a, b| a.1.total_cmp(&b.1));
        // Every interval contains `truth`, so the full meet is nonempty.
        let sets = build_nested_sets(&EstimatorFamily::new(entries)?);
        worst = worst.max(solve_adaptive_garo(&sets)?.alpha);
        done += 1;
    }
    let example = solve_adaptive_garo(&build_nested_sets(&EstimatorFamily::new(vec![(0.0, 1.0), (0.5, 2.0)])?))?;
    let ok = worst <= 1.0 + 1e-9
        && (example.x - 1.0 / 6.0).abs() <= 1e-9
        && (example.alpha - 1.0 / 6.0).abs() <= 1e-9;
    Ok(verdict(ok, format!("max α {worst:.6} over 1000 families; example {example:?}")))
}

fn c8_lepskii() -> Result<Outcome, garo_core::Error> {
    let (kappa0, ratio, top, samples, delta, trials) = (0.25, 2.0f64, 6usize, 200, 0.1, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut hits = 0;
    for _ in 0..trials {
        let truth = rng.random_range(-5.0..5.0);
        let sigma = kappa0 * ratio.powf(rng.random_range(0.0..top as f64));
        let noise = Normal::new(0.0, sigma).unwrap();
        let data: Vec<f64> = (0..samples).map(|_| truth + noise.sample(&mut rng)).collect();
        let fam = huber_family(&data, kappa0, ratio, top, delta)?;
        let j_star = (0..=top).find(|&j| kappa0 * ratio.powi(j as i32) >= sigma).unwrap_or(top);
        let radius = fam.entries()[j_star].1;
        if let Ok(sol) = solve_adaptive_garo(&build_nested_sets(&fam)) {
            if (sol.x - truth).abs() <= 2.0 * radius {
                hits += 1;
            }
        }
    }
    let rate = hits as f64 / trials as f64;
    Ok(verdict(rate >= 1.0 - delta - 0.03, format!("coverage {rate:.3} (need ≥ {:.2})", 1.0 - delta - 0.03)))
}

fn c9_kl_lipschitz() -> Result<Outcome, garo_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gammas = linspace(0.0, 3.0, 601);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let k = rng.random_range(2..12);
        let losses: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..10.0)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let spread = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - losses.iter().copied().fold(f64::INFINITY, f64::min);
        let values: Vec<f64> = gammas.iter().map(|&g| kl_worst_case(&losses, &weights, g)).collect::<Result<_, _>>()?;
        for (w, g) in values.windows(2).zip(gammas.windows(2)) {
            let slope = (w[1] - w[0]) / (g[1] - g[0]);
            worst_excess = worst_excess.max(slope - 2f64.sqrt() * spread);
        }
    }
    Ok(verdict(
        worst_excess <= 1e-6,
        format!("max slope − √2·spread = {worst_excess:.3e} over 100 tables"),
    ))
}

fn desk_report() -> Result<garo_core::experiment::ExperimentReport, garo_core::Error> {
    use std::sync::OnceLock;
    static REPORT: OnceLock<garo_core::experiment::ExperimentReport> = OnceLock::new();
    if let Some(r) = REPORT.get() {
        return Ok(r.clone());
    }
    let report = run_suite(&SuiteConfig::desk_scale())?;
    Ok(REPORT.get_or_init(|| report).clone())
}

fn c10a_garo_audit() -> Result<Outcome, garo_core::Error> {
    let report = desk_report()?;
    let garo_rows = report.rows.iter().filter(|r| r.method == "GARO").count();
    let checks: Vec<_> = report.diagnostics.iter().flat_map(|d| &d.garo).collect();
    let worst = checks.iter().map(|c| c.min_slack).fold(f64::INFINITY, f64::min);
    let ok = report.failures.is_empty() && checks.len() == garo_rows && garo_rows == 9 * 5 && worst >= -1e-6;
    Ok(verdict(
        ok,
        format!(
            "{garo_rows} GARO rows, min grid slack {worst:.2e}, {} failures",
            report.failures.len()
        ),
    ))
}

fn c10b_alpha_monotone() -> Result<Outcome, garo_core::Error> {
    let report = desk_report()?;
    let mut ok = true;
    for d in &report.diagnostics {
        let mut g = d.garo.clone();
        g.sort_by(|a, b| a.q.total_cmp(&b.q));
        ok &= g.windows(2).all(|w| w[1].alpha <= w[0].alpha + 1e-7 * (1.0 + w[0].alpha));
    }
    Ok(verdict(ok, format!("{} cells checked", report.diagnostics.len())))
}

fn c10c_dominance() -> Result<Outcome, garo_core::Error> {
    let report = desk_report()?;
    let mut dominated_cells = 0;
    let mut notes = Vec::new();
    for d in &report.diagnostics {
        let rows: Vec<_> = report
            .rows
            .iter()
            .filter(|r| r.instance == d.instance && r.data == d.data)
            .collect();
        let Some(garo) = rows.iter().find(|r| r.method == "GARO" && r.param == 1.0) else {
            continue;
        };
        let dominator = rows.iter().find(|r| {
            r.method != "GARO" && r.mean < 0.99 * garo.mean && r.q90 < 0.99 * garo.q90
        });
        if let Some(r) = dominator {
            dominated_cells += 1;
            notes.push(format!("{}/{} by {}({})", d.instance, d.data, r.method, r.param));
        }
    }
    let cells = report.diagnostics.len();
    Ok(Outcome::Soft(
        2 * dominated_cells <= cells,
        format!("GARO(q=1) dominated by >1% on {dominated_cells}/{cells} cells {notes:?}"),
    ))
}

fn c11_sat_bridge() -> Result<Outcome, garo_core::Error> {
    let report = desk_report()?;
    let checks: Vec<_> = report.diagnostics.iter().flat_map(|d| &d.sat).collect();
    let bridged = checks.iter().filter(|c| c.robust_gap <= 1e-3).count();
    let worst = checks.iter().map(|c| c.robust_gap).fold(0.0, f64::max);
    let mut misses: Vec<String> = checks
        .iter()
        .filter(|c| c.robust_gap > 1e-3)
        .map(|c| format!("β={}", c.beta))
        .collect();
    misses.sort();
    misses.dedup();
    let continuum = checks.iter().map(|c| c.continuum_gap).fold(0.0, f64::max);
    Ok(Outcome::Soft(
        bridged == checks.len(),
        format!(
            "{bridged}/{} SAT solutions match a robust optimum within 1e-3 (worst {worst:.2e}; misses at {misses:?}); \
             between grid points the worst gap is {continuum:.2e}",
            checks.len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 13] = [
        ("1 closed-form Weber", c1_weber, Duration::from_secs(1)),
        ("2 two-point exactness", c2_two_point, Duration::from_secs(30)),
        ("3 discretization convergence", c3_discretization, Duration::from_secs(10)),
        ("4 constraint generation", c4_constraint_generation, Duration::from_secs(60)),
        ("5 separation agreement", c5_separation_agreement, Duration::from_secs(30)),
        ("6 brute-force equivalence", c6_brute_force, Duration::from_secs(20)),
        ("7 adaptive bound", c7_adaptive, Duration::from_secs(5)),
        ("8 Lepskii coverage", c8_lepskii, Duration::from_secs(60)),
        ("9 KL Lipschitz", c9_kl_lipschitz, Duration::from_secs(10)),
        ("10a desk GARO audit", c10a_garo_audit, Duration::from_secs(600)),
        ("10b desk α monotone in q", c10b_alpha_monotone, Duration::from_secs(600)),
        ("10c desk dominance (soft)", c10c_dominance, Duration::from_secs(600)),
        ("11 SAT/RO bridge (soft)", c11_sat_bridge, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let timing = format!("{:.2}s / {}s", took.as_secs_f64(), budget.as_secs());
        let over = took > budget;
        match outcome {
            Ok(Outcome::Pass(d)) if !over => println!("PASS  {name} [{timing}] {d}"),
            Ok(Outcome::Pass(d)) | Ok(Outcome::Fail(d)) => {
                failed += 1;
                println!("FAIL  {name} [{timing}{}] {d}", if over { " over budget" } else { "" });
            }
            Ok(Outcome::Soft(ok, d)) => {
                println!("{}  {name} [{timing}] {d}", if ok && !over { "PASS" } else { "WARN" })
            }
            Err(e) => {
                failed += 1;
                println!("FAIL  {name} [{timing}] error: {e}");
            }
        }
    }
    println!("acceptance: {failed} hard failure(s)");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

