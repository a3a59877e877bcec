//! Robust oracles, adversarial regret and the piecewise-linear oracle path.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{self, ConicProgram, Relation};
use crate::error::{Error, Result};
use crate::tol::{BREAKPOINT_MERGE, TOL_FEAS};
use crate::uncertainty::{dot, GammaInterval, NormBall, UncertaintyModel};

/// `min xᵀp` over `{x : rows·x ≥ rhs, lo ≤ x ≤ hi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDecisionProblem {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl LinearDecisionProblem {
    /// Fails unless the feasible set is nonempty and bounded.
    pub fn new(rows: Vec<Vec<f64>>, rhs: Vec<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let n = bounds.len();
        if n == 0 {
            return Err(Error::invalid("decision dimension is zero"));
        }
        if rows.len() != rhs.len() || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("constraint rows do not match the dimension"));
        }
        let prob = Self { rows, rhs, bounds };
        let base = prob.program();
        base.validate()?;
        conic::solve(&base)?.into_result("decision set is empty")?;
        for j in 0..n {
            let (lo, hi) = prob.bounds[j];
            for (sign, finite) in [(1.0, lo.is_finite()), (-1.0, hi.is_finite())] {
                if finite {
                    continue;
                }
                let mut p = base.clone();
                p.objective[j] = sign;
                let out = conic::solve(&p)?;
                if out.status == conic::SolveStatus::Unbounded {
                    return Err(Error::Unbounded(format!("coordinate {j} is unbounded on X")));
                }
                out.into_result("boundedness check")?;
            }
        }
        Ok(prob)
    }

    /// The simplex `{x ≥ 0, Σx = 1}` as two opposite covering rows.
    pub fn simplex(n: usize) -> Result<Self> {
        Self::new(
            vec![vec![1.0; n], vec![-1.0; n]],
            vec![1.0, -1.0],
            vec![(0.0, f64::INFINITY); n],
        )
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// The feasible set as a program over `x`, with a zero objective.
    pub fn program(&self) -> ConicProgram {
        let mut p = ConicProgram::new(self.dim());
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            p.set_bounds(j, lo, hi);
        }
        for (row, &b) in self.rows.iter().zip(&self.rhs) {
            p.add_linear(row.clone(), Relation::Ge, b);
        }
        p
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.program().max_violation(x) <= TOL_FEAS
    }

    /// `min_{x ∈ X} xᵀcost`.
    pub fn minimize(&self, cost: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut p = self.program();
        p.set_objective(cost.to_vec());
        let out = conic::solve(&p)?.into_result("nominal problem")?;
        Ok((out.primal, out.objective_value))
    }
}

/// How the worst-case premium over the nominal cost is modelled in a program.
pub(crate) enum Premium {
    /// `premium(γ) = coef(γ)·var` with `var ≥ ‖x‖_*` or `var ≥ ‖Lᵀx‖`.
    Scaled { var: usize, sqrt_radius: bool },
    /// One row per active scenario.
    Scenarios,
}

/// Adds the variables and rows bounding the premium of `x = v[0..n]`.
pub(crate) fn encode_premium(prog: &mut ConicProgram, model: &UncertaintyModel) -> Result<Premium> {
    let n = model.dim();
    match model {
        UncertaintyModel::NormBall(ball) => {
            let t = prog.add_variable(0.0, f64::INFINITY);
            match ball.norm.dual() {
                crate::uncertainty::Norm::Linf => {
                    for i in 0..n {
                        prog.add_sparse(&[(t, 1.0), (i, -1.0)], Relation::Ge, 0.0);
                        prog.add_sparse(&[(t, 1.0), (i, 1.0)], Relation::Ge, 0.0);
                    }
                }
                crate::uncertainty::Norm::L1 => {
                    let mut sum = vec![(t, 1.0)];
                    for i in 0..n {
                        let u = prog.add_variable(0.0, f64::INFINITY);
                        prog.add_sparse(&[(u, 1.0), (i, -1.0)], Relation::Ge, 0.0);
                        prog.add_sparse(&[(u, 1.0), (i, 1.0)], Relation::Ge, 0.0);
                        sum.push((u, -1.0));
                    }
                    prog.add_sparse(&sum, Relation::Ge, 0.0);
                }
                crate::uncertainty::Norm::L2 => {
                    let m = prog.num_vars();
                    let rows = (0..n)
                        .map(|i| {
                            let mut r = vec![0.0; m];
                            r[i] = 1.0;
                            r
                        })
                        .collect();
                    let mut c = vec![0.0; m];
                    c[t] = 1.0;
                    prog.add_soc(rows, vec![0.0; n], c, 0.0);
                }
            }
            Ok(Premium::Scaled {
                var: t,
                sqrt_radius: false,
            })
        }
        UncertaintyModel::Ellipsoid(e) => {
            let tau = prog.add_variable(0.0, f64::INFINITY);
            let m = prog.num_vars();
            let l = e.cholesky();
            // ‖Lᵀx‖ ≤ τ.
            let rows = (0..n)
                .map(|i| {
                    let mut r = vec![0.0; m];
                    for j in 0..n {
                        r[j] = l[(j, i)];
                    }
                    r
                })
                .collect();
            let mut c = vec![0.0; m];
            c[tau] = 1.0;
            prog.add_soc(rows, vec![0.0; n], c, 0.0);
            Ok(Premium::Scaled {
                var: tau,
                sqrt_radius: true,
            })
        }
        UncertaintyModel::Discrete(_) => Ok(Premium::Scenarios),
        UncertaintyModel::Kl(_) => Err(Error::Unsupported(
            "KL balls need an exponential cone; only worst-case evaluation is available".into(),
        )),
    }
}

/// Adds `v_wc(x, γ) + Σ extra ≤ rhs`.
pub(crate) fn add_worst_case_le(
    prog: &mut ConicProgram,
    model: &UncertaintyModel,
    premium: &Premium,
    gamma: f64,
    extra: &[(usize, f64)],
    rhs: f64,
) {
    let m = prog.num_vars();
    let mut row_for = |p: &[f64], aux: Option<(usize, f64)>| {
        let mut row = vec![0.0; m];
        row[..p.len()].copy_from_slice(p);
        if let Some((j, a)) = aux {
            row[j] += a;
        }
        for &(j, a) in extra {
            row[j] += a;
        }
        prog.add_linear(row, Relation::Le, rhs);
    };
    match (model, premium) {
        (UncertaintyModel::Discrete(d), _) => {
            for p in d.active(gamma) {
                row_for(p, None);
            }
        }
        (_, Premium::Scaled { var, sqrt_radius }) => {
            let coef = if *sqrt_radius { gamma.sqrt() } else { gamma };
            row_for(&model.nominal(), Some((*var, coef)));
        }
        (_, Premium::Scenarios) => unreachable!("scenario premium on a continuous model"),
    }
}

/// Rate at which the worst-case cost of `x` grows with the radius: `‖x‖_*`
/// for norm balls, `‖Lᵀx‖` per unit of `√γ` for ellipsoids.
pub fn premium_slope(model: &UncertaintyModel, x: &[f64]) -> Option<f64> {
    match model {
        UncertaintyModel::NormBall(b) => Some(b.norm.dual().eval(x)),
        UncertaintyModel::Ellipsoid(e) => Some(e.shape_norm(x)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub gamma: f64,
    pub x: Vec<f64>,
    pub value: f64,
}

/// `min_{x∈X} v_wc(x, γ)`. The reported value is the worst-case cost of the
/// returned decision, so its adversarial regret is exactly zero.
pub fn robust_oracle(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    gamma: f64,
) -> Result<OracleSolution> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("radius must be finite and nonnegative, got {gamma}")));
    }
    if model.dim() != prob.dim() {
        return Err(Error::invalid("model and problem dimensions differ"));
    }
    let continuous = matches!(
        model,
        UncertaintyModel::Ellipsoid(_) | UncertaintyModel::NormBall(_)
    );
    let x = if gamma == 0.0 && continuous {
        prob.minimize(&model.nominal())?.0
    } else {
        let mut p = prob.program();
        let premium = encode_premium(&mut p, model)?;
        let s = p.add_variable(f64::NEG_INFINITY, f64::INFINITY);
        p.objective[s] = 1.0;
        add_worst_case_le(&mut p, model, &premium, gamma, &[(s, -1.0)], 0.0);
        let out = conic::solve(&p)?.into_result(&format!("robust oracle at γ={gamma}"))?;
        out.primal[..prob.dim()].to_vec()
    };
    let value = model.worst_case_cost(&x, gamma)?;
    Ok(OracleSolution { gamma, x, value })
}

/// Anything that can report `v*_wc(γ)`.
pub trait OracleValue: Sync {
    fn oracle_value(&self, gamma: f64) -> Result<f64>;
}

/// Memoized robust oracle for one (problem, model) pair.
pub struct RobustOracle<'a> {
    problem: &'a LinearDecisionProblem,
    model: &'a UncertaintyModel,
    cache: Mutex<HashMap<u64, OracleSolution>>,
}

impl<'a> RobustOracle<'a> {
    pub fn new(problem: &'a LinearDecisionProblem, model: &'a UncertaintyModel) -> Result<Self> {
        if model.dim() != problem.dim() {
            return Err(Error::invalid("model and problem dimensions differ"));
        }
        Ok(Self {
            problem,
            model,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn problem(&self) -> &'a LinearDecisionProblem {
        self.problem
    }

    pub fn model(&self) -> &'a UncertaintyModel {
        self.model
    }

    pub fn solve(&self, gamma: f64) -> Result<OracleSolution> {
        let key = gamma.to_bits();
        if let Some(hit) = self.cache.lock().expect("oracle cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let sol = robust_oracle(self.problem, self.model, gamma)?;
        self.cache
            .lock()
            .expect("oracle cache poisoned")
            .insert(key, sol.clone());
        Ok(sol)
    }

    /// Solves all radii in parallel and returns their oracle values in order.
    pub fn precompute(&self, gammas: &[f64]) -> Result<Vec<f64>> {
        gammas
            .par_iter()
            .map(|&g| self.solve(g).map(|s| s.value))
            .collect()
    }

    /// `A(x, γ) = v_wc(x, γ) − v*_wc(γ)`.
    pub fn regret(&self, x: &[f64], gamma: f64) -> Result<f64> {
        Ok(self.model.worst_case_cost(x, gamma)? - self.solve(gamma)?.value)
    }
}

impl OracleValue for RobustOracle<'_> {
    fn oracle_value(&self, gamma: f64) -> Result<f64> {
        self.solve(gamma).map(|s| s.value)
    }
}

/// `A(x, γ)`; rejects decisions outside `X`.
pub fn adversarial_regret(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    x: &[f64],
    gamma: f64,
) -> Result<f64> {
    if !prob.contains(x) {
        return Err(Error::invalid("decision is not feasible"));
    }
    Ok(model.worst_case_cost(x, gamma)? - robust_oracle(prob, model, gamma)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSegment {
    pub start: f64,
    pub end: f64,
    pub x: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
}

impl OracleSegment {
    pub fn value_at(&self, gamma: f64) -> f64 {
        self.intercept + self.slope * gamma
    }
}

/// `γ ↦ v*_wc(γ)` for a polyhedral norm ball: concave, piecewise linear,
/// with an optimal vertex per piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePath {
    segments: Vec<OracleSegment>,
}

impl OraclePath {
    pub fn from_segments(segments: Vec<OracleSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("oracle path needs a segment"));
        }
        for w in segments.windows(2) {
            if (w[0].end - w[1].start).abs() > BREAKPOINT_MERGE {
                return Err(Error::invalid("oracle path segments are not contiguous"));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[OracleSegment] {
        &self.segments
    }

    pub fn start(&self) -> f64 {
        self.segments[0].start
    }

    pub fn end(&self) -> f64 {
        self.segments[self.segments.len() - 1].end
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.start).collect()
    }

    pub fn segment_at(&self, gamma: f64) -> Result<&OracleSegment> {
        if gamma < self.start() - BREAKPOINT_MERGE || gamma > self.end() + BREAKPOINT_MERGE {
            return Err(Error::invalid(format!(
                "γ={gamma} outside the traced range [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        Ok(self
            .segments
            .iter()
            .find(|s| gamma <= s.end)
            .unwrap_or(&self.segments[self.segments.len() - 1]))
    }

    pub fn value(&self, gamma: f64) -> Result<f64> {
        self.segment_at(gamma).map(|s| s.value_at(gamma))
    }

    /// Largest slope, attained on the first segment.
    pub fn max_slope(&self) -> f64 {
        self.segments.iter().map(|s| s.slope).fold(0.0, f64::max)
    }
}

impl OracleValue for OraclePath {
    fn oracle_value(&self, gamma: f64) -> Result<f64> {
        self.value(gamma)
    }
}

/// Traces `v*_wc` over `interval` for a polyhedral norm ball.
pub fn trace_oracle_path(
    prob: &LinearDecisionProblem,
    ball: &NormBall,
    interval: GammaInterval,
) -> Result<OraclePath> {
    if !ball.norm.is_polyhedral() {
        return Err(Error::Unsupported(
            "the oracle path is piecewise linear only for polyhedral norms".into(),
        ));
    }
    let n = prob.dim();
    if ball.center.len() != n {
        return Err(Error::invalid("model and problem dimensions differ"));
    }
    let model = UncertaintyModel::NormBall(ball.clone());
    let mut p = prob.program();
    let Premium::Scaled { var, .. } = encode_premium(&mut p, &model)? else {
        unreachable!("norm balls use a scaled premium")
    };
    p.objective[..n].copy_from_slice(&ball.center);
    let mut direction = vec![0.0; p.num_vars()];
    direction[var] = 1.0;
    let raw = conic::solve_lp_parametric(&p, &direction, (interval.lo(), interval.hi()))?;
    let dual = ball.norm.dual();
    let segments = raw
        .into_iter()
        .map(|s| {
            let x = s.vertex[..n].to_vec();
            OracleSegment {
                start: s.start,
                end: s.end,
                intercept: dot(&x, &ball.center),
                slope: dual.eval(&x),
                x,
            }
        })
        .collect();
    OraclePath::from_segments(segments)
}
