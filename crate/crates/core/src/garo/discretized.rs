use std::time::Instant;

use super::{GaroMethod, GaroSolution, RateFunction};
use crate::conic;
use crate::error::{Error, Result};
use crate::robust::{add_worst_case_le, encode_premium, LinearDecisionProblem, RobustOracle};
use crate::tol::TOL_FEAS;
use crate::uncertainty::{GammaInterval, UncertaintyModel};

/// Points on which the two-point answer is checked against the full interval.
const AUDIT_POINTS: usize = 100;

/// `v_wc(x, γ) ≤ rhs + α·coef`.
pub(crate) struct MasterRow {
    pub gamma: f64,
    pub rhs: f64,
    pub coef: f64,
}

/// Minimizes α over `x ∈ X`, `α ≥ 0` subject to `rows`, then reports the
/// smallest α that the returned `x` satisfies exactly.
pub(crate) fn solve_master(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    rows: &[MasterRow],
) -> Result<(Vec<f64>, f64)> {
    let n = prob.dim();
    let mut p = prob.program();
    let premium = encode_premium(&mut p, model)?;
    let alpha = p.add_variable(0.0, f64::INFINITY);
    p.objective[alpha] = 1.0;
    for row in rows {
        if row.coef > 0.0 {
            add_worst_case_le(&mut p, model, &premium, row.gamma, &[(alpha, -row.coef)], row.rhs);
        } else {
            // φ = 0 forces exact oracle optimality; the slack absorbs round-off.
            let slack = 1e-9 * (1.0 + row.rhs.abs());
            add_worst_case_le(&mut p, model, &premium, row.gamma, &[], row.rhs + slack);
        }
    }
    let out = conic::solve(&p)?.into_result("regret master problem")?;
    let x = out.primal[..n].to_vec();
    let mut certified = 0.0_f64;
    for row in rows.iter().filter(|r| r.coef > 0.0) {
        let excess = model.worst_case_cost(&x, row.gamma)? - row.rhs;
        certified = certified.max(excess / row.coef);
    }
    Ok((x, certified))
}

fn check_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::invalid("radius grid is empty"));
    }
    if grid.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(Error::invalid("radius grid must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("radius grid must be sorted"));
    }
    let mut out = grid.to_vec();
    out.dedup();
    Ok(out)
}

pub fn solve_garo_discretized(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    grid: &[f64],
    rate: &RateFunction,
) -> Result<GaroSolution> {
    solve_garo_discretized_with(&RobustOracle::new(prob, model)?, grid, rate)
}

/// Discretized problem over `grid`, reusing the oracle's cached values.
pub fn solve_garo_discretized_with(
    oracle: &RobustOracle<'_>,
    grid: &[f64],
    rate: &RateFunction,
) -> Result<GaroSolution> {
    let start = Instant::now();
    let grid = check_grid(grid)?;
    let oracle_values = oracle.precompute(&grid)?;
    let rate_values = grid.iter().map(|&g| rate.eval(g)).collect::<Result<Vec<_>>>()?;
    if rate_values.iter().any(|v| *v < 0.0) {
        return Err(Error::invalid("rate function is negative on the grid"));
    }
    let rows: Vec<MasterRow> = grid
        .iter()
        .zip(&oracle_values)
        .zip(&rate_values)
        .map(|((&gamma, &rhs), &coef)| MasterRow { gamma, rhs, coef })
        .collect();
    let (x, alpha) = solve_master(oracle.problem(), oracle.model(), &rows)?;
    let slacks = slacks(oracle.model(), &x, alpha, &grid, &oracle_values, &rate_values)?;
    Ok(GaroSolution {
        x,
        alpha,
        grid,
        oracle_values,
        rate_values,
        slacks,
        method: GaroMethod::Discretized,
        runtime_s: start.elapsed().as_secs_f64(),
        cg_log: Vec::new(),
        gap_bound: None,
    })
}

pub(crate) fn slacks(
    model: &UncertaintyModel,
    x: &[f64],
    alpha: f64,
    grid: &[f64],
    oracle_values: &[f64],
    rate_values: &[f64],
) -> Result<Vec<f64>> {
    grid.iter()
        .zip(oracle_values)
        .zip(rate_values)
        .map(|((&g, &v), &phi)| Ok(alpha * phi - (model.worst_case_cost(x, g)? - v)))
        .collect()
}

/// Largest `A(x, γ) − α·φ(γ)` over `gammas`.
pub fn audit(
    oracle: &RobustOracle<'_>,
    x: &[f64],
    alpha: f64,
    rate: &RateFunction,
    gammas: &[f64],
) -> Result<f64> {
    let values = oracle.precompute(gammas)?;
    let mut worst = f64::NEG_INFINITY;
    for (&g, &v) in gammas.iter().zip(&values) {
        let excess = oracle.model().worst_case_cost(x, g)? - v - alpha * rate.eval(g)?;
        worst = worst.max(excess);
    }
    Ok(worst)
}

/// Exact solve when `v_wc` is affine in γ and φ is concave: only the two
/// interval ends can bind.
pub fn solve_garo_two_point(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    interval: GammaInterval,
    rate: &RateFunction,
) -> Result<GaroSolution> {
    if !matches!(model, UncertaintyModel::NormBall(_)) {
        return Err(Error::Unsupported(
            "the two-point reduction needs a worst-case cost affine in γ (norm balls)".into(),
        ));
    }
    if !rate.is_concave_on(interval) {
        return Err(Error::invalid("the two-point reduction needs a concave rate"));
    }
    let start = Instant::now();
    let oracle = RobustOracle::new(prob, model)?;
    let mut sol = solve_garo_discretized_with(&oracle, &[interval.lo(), interval.hi()], rate)?;
    let check = interval.grid(AUDIT_POINTS);
    let values = oracle.precompute(&check)?;
    for (&g, &v) in check.iter().zip(&values) {
        let excess = model.worst_case_cost(&sol.x, g)? - v - sol.alpha * rate.eval(g)?;
        if excess > TOL_FEAS * (1.0 + v.abs()) {
            return Err(Error::AuditFailed(format!(
                "two-point solution violates γ={g} by {excess:.3e}"
            )));
        }
    }
    sol.method = GaroMethod::TwoPoint;
    sol.runtime_s = start.elapsed().as_secs_f64();
    Ok(sol)
}
