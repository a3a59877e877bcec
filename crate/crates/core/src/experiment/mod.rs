//! Minimum-knapsack benchmark: instance and data generation, calibration,
//! method sweeps, out-of-sample evaluation and guarantee curves.

mod csv_io;
mod data;

use std::collections::BTreeMap;
use std::time::Instant;

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use csv_io::{
    emit_csv, read_guarantees, read_tradeoff, write_guarantees, write_tradeoff, GUARANTEES_FILE, TRADEOFF_FILE,
};
pub use data::{
    generate_instance, generate_instance_indexed, knapsack_weights, sample_data, sample_data_indexed,
    train_size, DataModelSpec, DataVariant, KnapsackInstanceSpec, CAPACITY_FRACTION, VARIABLE_BOUND,
};

use crate::baselines::{
    scenario_minima, solve_ro_discrete, solve_regret_discrete_with, solve_satisficing_with, SatConfig,
};
use crate::error::{Error, Result};
use crate::garo::{solve_garo_discretized_with, RateFunction};
use crate::robust::{LinearDecisionProblem, RobustOracle};
use crate::uncertainty::{
    calibrate_gamma, dot, DiscreteScenarios, Ellipsoid, GammaInterval, UncertaintyModel,
};

/// Coverage fraction defining the right end of the radius interval.
pub const COVERAGE: f64 = 0.99;
pub const QUANTILE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodKind {
    Ro,
    RoD,
    Sat,
    Reg,
    Garo,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Ro,
        MethodKind::RoD,
        MethodKind::Sat,
        MethodKind::Reg,
        MethodKind::Garo,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MethodKind::Ro => "RO",
            MethodKind::RoD => "ROd",
            MethodKind::Sat => "SAT",
            MethodKind::Reg => "REG",
            MethodKind::Garo => "GARO",
        }
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

/// Parameter sweeps per method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodGrid {
    /// Radius fractions of the calibrated right end.
    pub ro: Vec<f64>,
    pub ro_d: Vec<f64>,
    /// Target factors.
    pub sat: Vec<f64>,
    pub reg: Vec<f64>,
    /// Rate exponents.
    pub garo: Vec<f64>,
    /// Number of equidistant radii on the interval.
    pub grid_size: usize,
}

fn steps(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start + step * k as f64).collect()
}

impl Default for MethodGrid {
    fn default() -> Self {
        Self {
            ro: steps(0.0, 0.02, 5),
            ro_d: steps(0.1, 0.1, 5),
            sat: steps(1.2, 0.2, 5),
            reg: steps(0.1, 0.1, 5),
            garo: steps(0.0, 0.5, 5),
            grid_size: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub datasets: usize,
    pub variant: DataVariant,
    pub seed: u64,
    pub split: f64,
    pub grid: MethodGrid,
    pub methods: Vec<MethodKind>,
    /// Points on the normalized radius axis of the guarantee curves.
    pub curve_points: usize,
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn desk_scale() -> Self {
        Self {
            n: 20,
            m: 1000,
            instances: 3,
            datasets: 3,
            variant: DataVariant::Gaussian,
            seed: 2024,
            split: 0.8,
            grid: MethodGrid::default(),
            methods: MethodKind::ALL.to_vec(),
            curve_points: 100,
            threads: None,
        }
    }

    pub fn full_scale() -> Self {
        Self {
            n: 50,
            m: 5000,
            instances: 5,
            datasets: 5,
            ..Self::desk_scale()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.instances > 1 << 16 || self.datasets > 1 << 16 {
            return Err(Error::invalid("at most 65536 instances and datasets"));
        }
        if self.instances == 0 || self.datasets == 0 || self.methods.is_empty() {
            return Err(Error::invalid("the suite needs instances, datasets and methods"));
        }
        if self.grid.grid_size < 2 || self.curve_points < 2 {
            return Err(Error::invalid("grid sizes must be at least 2"));
        }
        if self.n == 0 || self.m < 2 || !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::invalid("data model needs n ≥ 1, m ≥ 2 and a split in (0, 1)"));
        }
        Ok(())
    }
}

/// Out-of-sample statistics of one decision on one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: usize,
    pub data: String,
    pub method: String,
    pub param: f64,
    pub mean: f64,
    pub worst: f64,
    pub q90: f64,
    pub runtime_s: f64,
}

/// Cell-averaged bound on the realized cost at a normalized radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeSample {
    pub method: String,
    pub param: f64,
    pub gamma_norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaroCheck {
    pub q: f64,
    pub alpha: f64,
    /// Smallest `α·φ(γ_t) − A(x, γ_t)` over the grid.
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatCheck {
    pub beta: f64,
    /// Smallest relative gap `|v_wc(x, γ) − v*(γ)| / (1 + |v*(γ)|)` over the grid.
    pub robust_gap: f64,
    pub gamma: f64,
    /// Same gap minimized over the whole interval rather than the grid.
    pub continuum_gap: f64,
    pub continuum_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostics {
    pub instance: usize,
    pub data: String,
    pub gamma_max: f64,
    pub oracle_values: Vec<f64>,
    pub garo: Vec<GaroCheck>,
    pub sat: Vec<SatCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub instance: usize,
    pub data: String,
    pub method: String,
    pub param: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub guarantees: Vec<GuaranteeSample>,
    pub diagnostics: Vec<CellDiagnostics>,
    pub failures: Vec<CellFailure>,
    /// Largest calibrated radius; `gamma_norm = 1` maps to it.
    pub gamma_scale: f64,
}

/// Nearest-rank quantile: the `⌈ρN⌉`-th smallest value.
pub fn nearest_rank(sorted: &[f64], rho: f64) -> f64 {
    let k = ((rho * sorted.len() as f64 - 1e-9).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Mean, maximum and 90% nearest-rank quantile of `xᵀp` over `scenarios`.
pub fn test_statistics(x: &[f64], scenarios: &[Vec<f64>]) -> (f64, f64, f64) {
    let mut costs: Vec<f64> = scenarios.iter().map(|p| dot(x, p)).collect();
    costs.sort_by(f64::total_cmp);
    let mean = costs.iter().sum::<f64>() / costs.len() as f64;
    (mean, costs[costs.len() - 1], nearest_rank(&costs, QUANTILE))
}

/// Training mean and unbiased covariance.
pub fn empirical_moments(points: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if points.len() < 2 {
        return Err(Error::invalid("moments need at least two points"));
    }
    let n = points[0].len();
    let m = points.len() as f64;
    let mut mean = vec![0.0; n];
    for p in points {
        for (a, b) in mean.iter_mut().zip(p) {
            *a += b / m;
        }
    }
    let centered = DMatrix::from_fn(points.len(), n, |i, j| points[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (m - 1.0);
    Ok((mean, cov))
}

/// Fitted models of one (instance, dataset) cell.
pub struct CellSetup {
    pub instance: usize,
    pub data: String,
    pub problem: LinearDecisionProblem,
    pub model: UncertaintyModel,
    pub scenarios: UncertaintyModel,
    pub gamma_max: f64,
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

/// Data stream index of cell `(instance, dataset)`.
pub fn cell_stream(instance: usize, dataset: usize) -> u64 {
    ((instance as u64) << 16) | dataset as u64
}

pub fn setup_cell(cfg: &SuiteConfig, instance: usize, dataset: usize) -> Result<CellSetup> {
    let problem = generate_instance_indexed(
        &KnapsackInstanceSpec {
            n: cfg.n,
            seed: cfg.seed,
        },
        instance as u64,
    )?;
    let spec = DataModelSpec {
        variant: cfg.variant,
        n: cfg.n,
        m: cfg.m,
        split: cfg.split,
        seed: cfg.seed,
    };
    let (train, test) = sample_data_indexed(&spec, cell_stream(instance, dataset))?;
    let (mean, cov) = empirical_moments(&train)?;
    let ellipsoid = Ellipsoid::from_covariance(mean, &cov)?;
    let model = UncertaintyModel::Ellipsoid(ellipsoid.clone());
    let gamma_max = calibrate_gamma(&model, &train, COVERAGE)?;
    let scenarios = UncertaintyModel::Discrete(DiscreteScenarios::with_metric(train.clone(), ellipsoid)?);
    Ok(CellSetup {
        instance,
        data: format!("{}-{dataset}", cfg.variant.label()),
        problem,
        model,
        scenarios,
        gamma_max,
        train,
        test,
    })
}

/// Per-method bound curve of one cell, on the shared radius axis.
type Curve = (MethodKind, f64, Vec<f64>);

struct CellOutcome {
    rows: Vec<ReportRow>,
    curves: Vec<Curve>,
    diagnostics: CellDiagnostics,
    failures: Vec<CellFailure>,
}

fn run_cell(cfg: &SuiteConfig, cell: &CellSetup, axis: &[f64]) -> Result<CellOutcome> {
    let oracle = RobustOracle::new(&cell.problem, &cell.model)?;
    let grid = GammaInterval::new(0.0, cell.gamma_max)?.grid(cfg.grid.grid_size);
    let oracle_values = oracle.precompute(&grid)?;
    let mut out = CellOutcome {
        rows: Vec::new(),
        curves: Vec::new(),
        diagnostics: CellDiagnostics {
            instance: cell.instance,
            data: cell.data.clone(),
            gamma_max: cell.gamma_max,
            oracle_values: oracle_values.clone(),
            garo: Vec::new(),
            sat: Vec::new(),
        },
        failures: Vec::new(),
    };
    let axis_values = if cfg.methods.contains(&MethodKind::Garo) {
        oracle.precompute(axis)?
    } else {
        Vec::new()
    };
    let Some(UncertaintyModel::Discrete(discrete)) = Some(&cell.scenarios) else {
        unreachable!("cells carry a scenario model")
    };
    let mut minima: Option<(f64, Vec<f64>)> = None;

    for &method in &cfg.methods {
        let params = match method {
            MethodKind::Ro => &cfg.grid.ro,
            MethodKind::RoD => &cfg.grid.ro_d,
            MethodKind::Sat => &cfg.grid.sat,
            MethodKind::Reg => &cfg.grid.reg,
            MethodKind::Garo => &cfg.grid.garo,
        };
        for &param in params {
            let start = Instant::now();
            let result: Result<Vec<f64>> = (|| match method {
                MethodKind::Ro => {
                    let gamma = param * cell.gamma_max;
                    let sol = oracle.solve(gamma)?;
                    let bound = axis
                        .iter()
                        .map(|&g| if g <= gamma { sol.value } else { f64::INFINITY })
                        .collect();
                    out.curves.push((method, param, bound));
                    Ok(sol.x)
                }
                MethodKind::RoD => {
                    let active: Vec<Vec<f64>> =
                        discrete.active(param * cell.gamma_max).into_iter().map(<[f64]>::to_vec).collect();
                    Ok(solve_ro_discrete(&cell.problem, &active)?.0)
                }
                MethodKind::Reg => {
                    if minima.is_none() {
                        minima = Some((
                            oracle.solve(0.0)?.value,
                            scenario_minima(&cell.problem, &cell.train)?,
                        ));
                    }
                    let (center_min, train_min) = minima.as_ref().expect("filled above");
                    let idx = discrete.indices_within(param * cell.gamma_max);
                    let mut pts = vec![cell.model.nominal()];
                    let mut mins = vec![*center_min];
                    for i in idx {
                        pts.push(cell.train[i].clone());
                        mins.push(train_min[i]);
                    }
                    Ok(solve_regret_discrete_with(&cell.problem, &pts, &mins)?.0)
                }
                MethodKind::Sat => {
                    let sat = solve_satisficing_with(
                        &oracle,
                        &SatConfig {
                            target_factor: param,
                            grid: grid.clone(),
                        },
                    )?;
                    let bound = axis.iter().map(|&g| sat.target + sat.alpha * g).collect();
                    out.curves.push((method, param, bound));
                    let mut best = (f64::INFINITY, 0.0);
                    for (&g, &v) in grid.iter().zip(&oracle_values) {
                        let gap = (cell.model.worst_case_cost(&sat.x, g)? - v).abs() / (1.0 + v.abs());
                        if gap < best.0 {
                            best = (gap, g);
                        }
                    }
                    let (continuum_gap, continuum_gamma) = min_relative_regret(&oracle, &sat.x, cell.gamma_max)?;
                    out.diagnostics.sat.push(SatCheck {
                        beta: param,
                        robust_gap: best.0,
                        gamma: best.1,
                        continuum_gap,
                        continuum_gamma,
                    });
                    Ok(sat.x)
                }
                MethodKind::Garo => {
                    let rate = RateFunction::power(param)?;
                    let sol = solve_garo_discretized_with(&oracle, &grid, &rate)?;
                    let bound = axis
                        .iter()
                        .zip(&axis_values)
                        .map(|(&g, &v)| Ok(v + sol.alpha * rate.eval(g)?))
                        .collect::<Result<Vec<_>>>()?;
                    out.curves.push((method, param, bound));
                    out.diagnostics.garo.push(GaroCheck {
                        q: param,
                        alpha: sol.alpha,
                        min_slack: sol.min_slack(),
                    });
                    Ok(sol.x)
                }
            })();
            let runtime_s = start.elapsed().as_secs_f64();
            match result {
                Ok(x) => {
                    let (mean, worst, q90) = test_statistics(&x, &cell.test);
                    out.rows.push(ReportRow {
                        instance: cell.instance,
                        data: cell.data.clone(),
                        method: method.label().into(),
                        param,
                        mean,
                        worst,
                        q90,
                        runtime_s,
                    });
                }
                Err(e) => {
                    warn!("cell ({}, {}) {}({param}) failed: {e}", cell.instance, cell.data, method.label());
                    out.failures.push(CellFailure {
                        instance: cell.instance,
                        data: cell.data.clone(),
                        method: method.label().into(),
                        param: Some(param),
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Smallest relative regret `A(x, γ)/(1 + |v*(γ)|)` over `[0, γ_max]`.
/// `A` is convex in `√γ` for ellipsoids, so a golden-section search in
/// `√γ` locates its minimum.
fn min_relative_regret(oracle: &RobustOracle<'_>, x: &[f64], gamma_max: f64) -> Result<(f64, f64)> {
    let regret = |r: f64| -> Result<(f64, f64)> {
        let g = r * r;
        let v = oracle.solve(g)?.value;
        Ok((oracle.model().worst_case_cost(x, g)? - v, v))
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, gamma_max.sqrt());
    let (mut c, mut d) = (b - ratio * (b - a), a + ratio * (b - a));
    let (mut fc, mut fd) = (regret(c)?.0, regret(d)?.0);
    for _ in 0..80 {
        if fc <= fd {
            (b, d, fd) = (d, c, fc);
            c = b - ratio * (b - a);
            fc = regret(c)?.0;
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + ratio * (b - a);
            fd = regret(d)?.0;
        }
        if b - a <= 1e-10 * (1.0 + b) {
            break;
        }
    }
    let mut best = (f64::INFINITY, 0.0);
    for r in [0.0, 0.5 * (a + b), gamma_max.sqrt()] {
        let (gap, v) = regret(r)?;
        let rel = gap.abs() / (1.0 + v.abs());
        if rel < best.0 {
            best = (rel, r * r);
        }
    }
    Ok(best)
}

/// Runs every method on every (instance, dataset) cell. Cell failures are
/// recorded in the report; only configuration errors return `Err`.
pub fn run_suite(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(|| run_suite_inner(cfg)),
        None => run_suite_inner(cfg),
    }
}

fn run_suite_inner(cfg: &SuiteConfig) -> Result<ExperimentReport> {
    let keys: Vec<(usize, usize)> = (0..cfg.instances)
        .flat_map(|i| (0..cfg.datasets).map(move |j| (i, j)))
        .collect();
    let setups: Vec<(usize, usize, Result<CellSetup>)> = keys
        .par_iter()
        .map(|&(i, j)| (i, j, setup_cell(cfg, i, j)))
        .collect();
    let mut report = ExperimentReport::default();
    let mut cells = Vec::new();
    for (i, j, s) in setups {
        match s {
            Ok(c) => cells.push(c),
            Err(e) => {
                warn!("cell ({i}, {j}) setup failed: {e}");
                report.failures.push(CellFailure {
                    instance: i,
                    data: format!("{}-{j}", cfg.variant.label()),
                    method: "setup".into(),
                    param: None,
                    message: e.to_string(),
                });
            }
        }
    }
    report.gamma_scale = cells.iter().map(|c| c.gamma_max).fold(0.0, f64::max);
    let axis_norm = GammaInterval::new(0.0, 1.0)?.grid(cfg.curve_points);
    let axis: Vec<f64> = axis_norm.iter().map(|g| g * report.gamma_scale).collect();
    info!(
        "running {} cells, radius scale {:.4}",
        cells.len(),
        report.gamma_scale
    );

    let outcomes: Vec<(usize, usize, Result<CellOutcome>)> = cells
        .par_iter()
        .map(|c| (c.instance, 0, run_cell(cfg, c, &axis)))
        .collect();
    let mut curves: BTreeMap<(MethodKind, u64), (f64, Vec<f64>, usize)> = BTreeMap::new();
    for ((_, _, outcome), cell) in outcomes.into_iter().zip(&cells) {
        match outcome {
            Ok(o) => {
                report.rows.extend(o.rows);
                report.failures.extend(o.failures);
                report.diagnostics.push(o.diagnostics);
                for (method, param, bound) in o.curves {
                    let entry = curves
                        .entry((method, param.to_bits()))
                        .or_insert_with(|| (param, vec![0.0; axis.len()], 0));
                    for (acc, b) in entry.1.iter_mut().zip(bound) {
                        *acc += b;
                    }
                    entry.2 += 1;
                }
            }
            Err(e) => {
                warn!("cell ({}, {}) failed: {e}", cell.instance, cell.data);
                report.failures.push(CellFailure {
                    instance: cell.instance,
                    data: cell.data.clone(),
                    method: "oracle".into(),
                    param: None,
                    message: e.to_string(),
                });
            }
        }
    }
    for ((method, _), (param, sums, count)) in curves {
        for (&g, s) in axis_norm.iter().zip(sums) {
            report.guarantees.push(GuaranteeSample {
                method: method.label().into(),
                param,
                gamma_norm: g,
                bound: s / count as f64,
            });
        }
    }
    sort_report(&mut report);
    Ok(report)
}

/// Lexicographic order on the key columns.
pub fn sort_report(report: &mut ExperimentReport) {
    report.rows.sort_by(|a, b| {
        (a.instance, &a.data, &a.method)
            .cmp(&(b.instance, &b.data, &b.method))
            .then(a.param.total_cmp(&b.param))
    });
    report.guarantees.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.param.total_cmp(&b.param))
            .then(a.gamma_norm.total_cmp(&b.gamma_norm))
    });
    report
        .diagnostics
        .sort_by(|a, b| (a.instance, &a.data).cmp(&(b.instance, &b.data)));
    report.failures.sort_by(|a, b| {
        (a.instance, &a.data, &a.method).cmp(&(b.instance, &b.data, &b.method))
    });
}
