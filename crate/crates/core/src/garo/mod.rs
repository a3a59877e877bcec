//! Minimizing the uniform adversarial-regret ratio `α` subject to
//! `A(x, γ) ≤ α·φ(γ)` for all radii in an interval.

mod cg;
mod discretized;
mod rate;

use serde::{Deserialize, Serialize};

pub use cg::{
    separate_lipschitz, separate_parametric, solve_garo_constraint_generation, CgIteration,
    LipschitzSeparation, ParametricSeparation, ScenarioSeparation, Separation, SeparationResult,
    DEFAULT_CG_MAX_ITER,
};
pub(crate) use discretized::{solve_master, MasterRow};
pub use discretized::{audit, solve_garo_discretized, solve_garo_discretized_with, solve_garo_two_point};
pub use rate::{
    interval_conjugate, perspective_argmax, perspective_conjugate, rate_eval, RateFunction,
};

use crate::error::{Error, Result};
use crate::robust::{premium_slope, RobustOracle};
use crate::uncertainty::{GammaInterval, UncertaintyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaroMethod {
    Discretized,
    TwoPoint,
    ConstraintGeneration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaroSolution {
    pub x: Vec<f64>,
    /// Smallest ratio certified for `x` on `grid`.
    pub alpha: f64,
    pub grid: Vec<f64>,
    pub oracle_values: Vec<f64>,
    pub rate_values: Vec<f64>,
    /// `α·φ(γ_t) − A(x, γ_t)` per grid point.
    pub slacks: Vec<f64>,
    pub method: GaroMethod,
    pub runtime_s: f64,
    pub cg_log: Vec<CgIteration>,
    /// Certified bound on `α − α⋆` when one is available.
    pub gap_bound: Option<f64>,
}

impl GaroSolution {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest spacing between consecutive grid points.
pub fn grid_spacing(grid: &[f64]) -> f64 {
    grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Feasibility defect `Δ(L + α·L′)` of a discretized solution.
pub fn discretization_error_bound(spacing: f64, lipschitz: f64, rate_slope: f64, alpha: f64) -> Result<f64> {
    if [spacing, lipschitz, rate_slope, alpha].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("error bound inputs must be nonnegative"));
    }
    Ok(spacing * (lipschitz + alpha * rate_slope))
}

/// Bound on `α⋆ − α^Δ`; `None` when `φ_min = 0`.
pub fn a_posteriori_gap_bound(
    spacing: f64,
    lipschitz: f64,
    rate_slope: f64,
    alpha: f64,
    rate_min: f64,
) -> Result<Option<f64>> {
    let defect = discretization_error_bound(spacing, lipschitz, rate_slope, alpha)?;
    Ok((rate_min > 0.0).then(|| defect / rate_min))
}

/// Lipschitz constant in γ of `v_wc(x_rob(γ₀), ·)` over all γ₀ in the
/// interval, for norm balls: the dual norm of the robust decision at the
/// left end, which is the steepest point of the concave oracle value.
pub fn regret_lipschitz(oracle: &RobustOracle<'_>, interval: GammaInterval) -> Result<f64> {
    match oracle.model() {
        UncertaintyModel::NormBall(_) => {
            let x = oracle.solve(interval.lo())?.x;
            Ok(premium_slope(oracle.model(), &x).expect("norm balls have a premium slope"))
        }
        _ => Err(Error::Unsupported(
            "a γ-Lipschitz constant is available for norm balls only".into(),
        )),
    }
}
