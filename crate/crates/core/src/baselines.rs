//! Comparison methods: robust, scenario-robust, satisficing and
//! scenario-regret decisions.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{self, Relation};
use crate::error::{Error, Result};
use crate::garo::{solve_master, MasterRow};
use crate::robust::{robust_oracle, LinearDecisionProblem, OracleSolution, RobustOracle};
use crate::uncertainty::UncertaintyModel;

/// Robust decision at a single radius.
pub fn solve_ro(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    gamma: f64,
) -> Result<OracleSolution> {
    robust_oracle(prob, model, gamma)
}

fn check_scenarios(prob: &LinearDecisionProblem, scenarios: &[Vec<f64>]) -> Result<()> {
    if scenarios.is_empty() {
        return Err(Error::invalid("scenario list is empty"));
    }
    if scenarios.iter().any(|p| p.len() != prob.dim()) {
        return Err(Error::invalid("scenario dimension differs from the problem"));
    }
    Ok(())
}

/// `min_x max_p xᵀp − offset_p` over the listed scenarios.
fn epigraph(prob: &LinearDecisionProblem, scenarios: &[Vec<f64>], offsets: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = prob.dim();
    let mut p = prob.program();
    let t = p.add_variable(f64::NEG_INFINITY, f64::INFINITY);
    p.objective[t] = 1.0;
    for (s, &off) in scenarios.iter().zip(offsets) {
        let mut terms: Vec<(usize, f64)> = s.iter().copied().enumerate().collect();
        terms.push((t, -1.0));
        p.add_sparse(&terms, Relation::Le, off);
    }
    let out = conic::solve(&p)?.into_result("scenario epigraph")?;
    let x = out.primal[..n].to_vec();
    let value = scenarios
        .iter()
        .zip(offsets)
        .map(|(s, &off)| crate::uncertainty::dot(&x, s) - off)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((x, value))
}

/// Robust decision against a finite scenario list.
pub fn solve_ro_discrete(prob: &LinearDecisionProblem, scenarios: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    check_scenarios(prob, scenarios)?;
    epigraph(prob, scenarios, &vec![0.0; scenarios.len()])
}

/// `min_{x∈X} xᵀp` for every scenario.
pub fn scenario_minima(prob: &LinearDecisionProblem, scenarios: &[Vec<f64>]) -> Result<Vec<f64>> {
    scenarios
        .par_iter()
        .map(|p| prob.minimize(p).map(|r| r.1))
        .collect()
}

/// Min-max regret against a finite scenario list.
pub fn solve_regret_discrete(prob: &LinearDecisionProblem, scenarios: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    check_scenarios(prob, scenarios)?;
    let minima = scenario_minima(prob, scenarios)?;
    solve_regret_discrete_with(prob, scenarios, &minima)
}

/// Same as [`solve_regret_discrete`] with the per-scenario minima supplied.
pub fn solve_regret_discrete_with(
    prob: &LinearDecisionProblem,
    scenarios: &[Vec<f64>],
    minima: &[f64],
) -> Result<(Vec<f64>, f64)> {
    check_scenarios(prob, scenarios)?;
    if minima.len() != scenarios.len() {
        return Err(Error::invalid("one minimum per scenario is required"));
    }
    epigraph(prob, scenarios, minima)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatConfig {
    /// Target as a multiple of the nominal optimum, at least 1.
    pub target_factor: f64,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatSolution {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub target: f64,
}

/// Minimizes the slope α with `v_wc(x, γ_t) ≤ f₀ + α·γ_t` on the grid.
pub fn solve_satisficing(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    cfg: &SatConfig,
) -> Result<SatSolution> {
    let oracle = RobustOracle::new(prob, model)?;
    solve_satisficing_with(&oracle, cfg)
}

pub fn solve_satisficing_with(oracle: &RobustOracle<'_>, cfg: &SatConfig) -> Result<SatSolution> {
    if !(cfg.target_factor >= 1.0) {
        return Err(Error::invalid(format!(
            "target factor must be at least 1, got {}",
            cfg.target_factor
        )));
    }
    let grid = &cfg.grid;
    if grid.is_empty() || grid.windows(2).any(|w| w[1] < w[0]) || grid[0] < 0.0 {
        return Err(Error::invalid("satisficing grid must be nonempty, sorted and nonnegative"));
    }
    let nominal = oracle.solve(0.0)?.value;
    let target = cfg.target_factor * nominal;
    if target < nominal - 1e-12 * (1.0 + nominal.abs()) {
        // Negative nominal costs flip the factor; the target then sits below v*(0).
        return Err(Error::Infeasible(format!(
            "target {target} is below the nominal optimum {nominal}"
        )));
    }
    let top = oracle.solve(grid[grid.len() - 1])?.value;
    if target > top {
        warn!("satisficing target {target} exceeds the robust optimum {top} at the largest radius");
    }
    let rows: Vec<MasterRow> = grid
        .iter()
        .map(|&gamma| MasterRow {
            gamma,
            rhs: target,
            coef: gamma,
        })
        .collect();
    let (x, alpha) = solve_master(oracle.problem(), oracle.model(), &rows)?;
    Ok(SatSolution { x, alpha, target })
}
