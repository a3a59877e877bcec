use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::discretized::{slacks, solve_master, MasterRow};
use super::{perspective_argmax, GaroMethod, GaroSolution, RateFunction};
use crate::error::{Error, Result};
use crate::robust::{premium_slope, LinearDecisionProblem, OraclePath, RobustOracle};
use crate::uncertainty::{GammaInterval, NormBall, UncertaintyModel};

pub const DEFAULT_CG_MAX_ITER: usize = 500;

/// Most violated radius found for a candidate `(x, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub gamma: f64,
    /// `A(x, γ) − α·φ(γ)` at `gamma`.
    pub violation: f64,
    /// Certified upper bound on the violation over the whole interval.
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgIteration {
    pub iteration: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub violation: f64,
    pub upper_bound: f64,
    pub cuts: usize,
}

pub trait Separation {
    /// Violations at or below `eps` count as satisfied; with `None` the
    /// search runs to full accuracy.
    fn separate(
        &self,
        oracle: &RobustOracle<'_>,
        x: &[f64],
        alpha: f64,
        rate: &RateFunction,
        interval: GammaInterval,
        eps: Option<f64>,
    ) -> Result<SeparationResult>;
}

struct Piece {
    u: f64,
    v: f64,
    su: Sample,
    sv: Sample,
    bound: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

/// Function value with, when known, its split `g = a + b` into a part `a`
/// convex on the interval and a part `b` monotone on it.
#[derive(Clone, Copy)]
struct Sample {
    value: f64,
    convex: Option<f64>,
}

fn piece(u: f64, v: f64, su: Sample, sv: Sample, lipschitz: f64) -> Piece {
    let mut bound = 0.5 * (su.value + sv.value) + 0.5 * lipschitz * (v - u);
    if let (Some(au), Some(av)) = (su.convex, sv.convex) {
        // A convex part peaks at an end and a monotone part too.
        bound = bound.min(au.max(av) + (su.value - au).max(sv.value - av));
    }
    Piece { u, v, su, sv, bound }
}

/// Global maximum of an `L`-Lipschitz function on `[lo, hi]` by sawtooth
/// upper bounds, to absolute accuracy `tol`.
///
/// With a `threshold` the search also stops once the global bound drops to
/// the threshold, or once a point above it is known to within half of its
/// excess.
pub fn separate_lipschitz<F>(
    mut f: F,
    interval: (f64, f64),
    lipschitz: f64,
    tol: f64,
    threshold: Option<f64>,
    max_evals: usize,
) -> Result<SeparationResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    sawtooth(
        |t| f(t).map(|value| Sample { value, convex: None }),
        interval,
        lipschitz,
        tol,
        threshold,
        max_evals,
    )
}

fn sawtooth<F>(
    mut f: F,
    interval: (f64, f64),
    lipschitz: f64,
    tol: f64,
    threshold: Option<f64>,
    max_evals: usize,
) -> Result<SeparationResult>
where
    F: FnMut(f64) -> Result<Sample>,
{
    let (lo, hi) = interval;
    if !(lipschitz > 0.0) || !lipschitz.is_finite() {
        return Err(Error::invalid(format!(
            "Lipschitz separation needs a positive constant, got {lipschitz}"
        )));
    }
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(Error::invalid("Lipschitz separation needs tol > 0 and lo ≤ hi"));
    }
    let (slo, shi) = (f(lo)?, f(hi)?);
    let mut best = if shi.value > slo.value { (hi, shi.value) } else { (lo, slo.value) };
    let mut heap = BinaryHeap::new();
    heap.push(piece(lo, hi, slo, shi, lipschitz));
    let mut evals = 2;
    while let Some(top) = heap.pop() {
        let slack = match threshold {
            Some(t) if top.bound <= t => f64::INFINITY,
            Some(t) if best.1 > t => tol.max(0.5 * (best.1 - t)),
            _ => tol,
        };
        if top.bound - best.1 <= slack || top.v - top.u <= f64::EPSILON * (1.0 + top.v.abs()) {
            let upper = heap.iter().map(|p| p.bound).fold(top.bound, f64::max);
            return Ok(SeparationResult {
                gamma: best.0,
                violation: best.1,
                upper_bound: upper.max(best.1),
            });
        }
        if evals >= max_evals {
            return Err(Error::IterationLimit {
                limit: max_evals,
                violation: top.bound,
            });
        }
        let (gu, gv) = (top.su.value, top.sv.value);
        let m = (0.5 * (top.u + top.v) + (gv - gu) / (2.0 * lipschitz)).clamp(top.u, top.v);
        let sm = f(m)?;
        evals += 1;
        if sm.value > best.1 {
            best = (m, sm.value);
        }
        heap.push(piece(top.u, m, top.su, sm, lipschitz));
        heap.push(piece(m, top.v, sm, top.sv, lipschitz));
    }
    unreachable!("the heap is never empty inside the loop")
}

/// Sawtooth search using oracle evaluations, for norm balls (in γ) and
/// ellipsoids (in `r = √γ`, where the worst-case cost is affine).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSeparation {
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for LipschitzSeparation {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_evals: 10_000,
        }
    }
}

impl Separation for LipschitzSeparation {
    fn separate(
        &self,
        oracle: &RobustOracle<'_>,
        x: &[f64],
        alpha: f64,
        rate: &RateFunction,
        interval: GammaInterval,
        eps: Option<f64>,
    ) -> Result<SeparationResult> {
        let model = oracle.model();
        let sqrt_scale = match model {
            UncertaintyModel::NormBall(_) => false,
            UncertaintyModel::Ellipsoid(_) => true,
            _ => {
                return Err(Error::Unsupported(
                    "Lipschitz separation needs a worst-case cost continuous in γ".into(),
                ))
            }
        };
        let own = premium_slope(model, x).expect("continuous models have a premium slope");
        let oracle_slope =
            premium_slope(model, &oracle.solve(interval.lo())?.x).expect("continuous model");
        let mut rate_slope = rate.slope_bound(interval);
        let (lo, hi) = if sqrt_scale {
            rate_slope *= 2.0 * interval.hi().sqrt();
            (interval.lo().sqrt(), interval.hi().sqrt())
        } else {
            (interval.lo(), interval.hi())
        };
        let lipschitz = own.max(oracle_slope + alpha * rate_slope).max(f64::MIN_POSITIVE);
        let to_gamma = |t: f64| if sqrt_scale { (t * t).min(interval.hi()) } else { t };
        // The regret is convex in γ (and in √γ) and the rate is monotone.
        let mut res = sawtooth(
            |t| {
                let g = to_gamma(t);
                let regret = model.worst_case_cost(x, g)? - oracle.solve(g)?.value;
                Ok(Sample {
                    value: regret - alpha * rate.eval(g)?,
                    convex: Some(regret),
                })
            },
            (lo, hi),
            lipschitz,
            self.tol,
            eps,
            self.max_evals,
        )?;
        res.gamma = to_gamma(res.gamma);
        Ok(res)
    }
}

/// Exact separation along a traced oracle path: on each linear piece the
/// violation is a constant plus a perspective of the rate conjugate.
pub fn separate_parametric(
    path: &OraclePath,
    ball: &NormBall,
    x: &[f64],
    alpha: f64,
    rate: &RateFunction,
    interval: GammaInterval,
) -> Result<SeparationResult> {
    if path.start() > interval.lo() + 1e-9 || path.end() < interval.hi() - 1e-9 {
        return Err(Error::invalid("oracle path does not cover the interval"));
    }
    let nominal = crate::uncertainty::dot(x, &ball.center);
    let own = ball.norm.dual().eval(x);
    let mut best = SeparationResult {
        gamma: interval.lo(),
        violation: f64::NEG_INFINITY,
        upper_bound: f64::NEG_INFINITY,
    };
    for seg in path.segments() {
        let a = seg.start.max(interval.lo());
        let b = seg.end.min(interval.hi());
        if a > b {
            continue;
        }
        let (v, g) = perspective_argmax(rate, (a, b), own - seg.slope, alpha)?;
        let value = nominal - seg.intercept + v;
        if value > best.violation {
            best.violation = value;
            best.gamma = g;
        }
    }
    best.upper_bound = best.violation;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricSeparation {
    pub path: OraclePath,
}

impl Separation for ParametricSeparation {
    fn separate(
        &self,
        oracle: &RobustOracle<'_>,
        x: &[f64],
        alpha: f64,
        rate: &RateFunction,
        interval: GammaInterval,
        _eps: Option<f64>,
    ) -> Result<SeparationResult> {
        match oracle.model() {
            UncertaintyModel::NormBall(ball) => {
                separate_parametric(&self.path, ball, x, alpha, rate, interval)
            }
            _ => Err(Error::Unsupported("parametric separation needs a norm ball".into())),
        }
    }
}

/// Exact separation for scenario sets: between consecutive scenario radii
/// the regret is constant while the rate does not decrease, so only the
/// left end and the radii themselves can be maximizers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScenarioSeparation;

impl Separation for ScenarioSeparation {
    fn separate(
        &self,
        oracle: &RobustOracle<'_>,
        x: &[f64],
        alpha: f64,
        rate: &RateFunction,
        interval: GammaInterval,
        _eps: Option<f64>,
    ) -> Result<SeparationResult> {
        let UncertaintyModel::Discrete(d) = oracle.model() else {
            return Err(Error::Unsupported("scenario separation needs a scenario set".into()));
        };
        let mut candidates = vec![interval.lo()];
        if let Some(m) = d.metric() {
            candidates.extend(
                d.points()
                    .iter()
                    .map(|p| m.squared_distance(p))
                    .filter(|&r| interval.contains(r)),
            );
        }
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let values = oracle.precompute(&candidates)?;
        let mut best = SeparationResult {
            gamma: interval.lo(),
            violation: f64::NEG_INFINITY,
            upper_bound: f64::NEG_INFINITY,
        };
        for (&g, &v) in candidates.iter().zip(&values) {
            let value = oracle.model().worst_case_cost(x, g)? - v - alpha * rate.eval(g)?;
            if value > best.violation {
                best.violation = value;
                best.gamma = g;
            }
        }
        best.upper_bound = best.violation;
        Ok(best)
    }
}

/// Cutting-plane solve over the continuous interval, starting from its two
/// ends. Stops once the certified violation is at most `eps`. The reported
/// α is the master value, a lower bound on the optimum; `gap_bound` bounds
/// the distance to it.
pub fn solve_garo_constraint_generation(
    prob: &LinearDecisionProblem,
    model: &UncertaintyModel,
    interval: GammaInterval,
    rate: &RateFunction,
    separation: &dyn Separation,
    eps: f64,
    max_iter: usize,
) -> Result<GaroSolution> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {eps}")));
    }
    let start = Instant::now();
    let oracle = RobustOracle::new(prob, model)?;
    let rate_min = rate.min_on(interval)?;
    let mut cuts = vec![interval.lo()];
    if interval.hi() > interval.lo() {
        cuts.push(interval.hi());
    }
    let mut log = Vec::new();
    let mut last_bound = f64::INFINITY;
    for iteration in 1..=max_iter {
        let values = oracle.precompute(&cuts)?;
        let rates = cuts.iter().map(|&g| rate.eval(g)).collect::<Result<Vec<_>>>()?;
        let rows: Vec<MasterRow> = cuts
            .iter()
            .zip(&values)
            .zip(&rates)
            .map(|((&gamma, &rhs), &coef)| MasterRow { gamma, rhs, coef })
            .collect();
        let (x, alpha) = solve_master(prob, model, &rows)?;
        let sep = separation.separate(&oracle, &x, alpha, rate, interval, Some(eps))?;
        debug!(
            "cg iteration {iteration}: α={alpha:.9} worst γ={:.6} violation={:.3e} bound={:.3e}",
            sep.gamma, sep.violation, sep.upper_bound
        );
        log.push(CgIteration {
            iteration,
            alpha,
            gamma: sep.gamma,
            violation: sep.violation,
            upper_bound: sep.upper_bound,
            cuts: cuts.len(),
        });
        last_bound = sep.upper_bound;
        let repeated = cuts.iter().any(|&c| (c - sep.gamma).abs() <= 1e-12 * (1.0 + c.abs()));
        if sep.upper_bound <= eps || repeated {
            if repeated && sep.upper_bound > eps {
                warn!(
                    "separation returned an existing cut γ={} with bound {:.3e}; stopping",
                    sep.gamma, sep.upper_bound
                );
            }
            let slacks = slacks(model, &x, alpha, &cuts, &values, &rates)?;
            let excess = sep.upper_bound.max(0.0);
            let gap_bound = if excess == 0.0 {
                Some(0.0)
            } else {
                (rate_min > 0.0).then(|| excess / rate_min)
            };
            return Ok(GaroSolution {
                x,
                alpha,
                grid: cuts,
                oracle_values: values,
                rate_values: rates,
                slacks,
                method: GaroMethod::ConstraintGeneration,
                runtime_s: start.elapsed().as_secs_f64(),
                cg_log: log,
                gap_bound,
            });
        }
        let pos = cuts.partition_point(|&c| c < sep.gamma);
        cuts.insert(pos, sep.gamma);
    }
    if let Some(last) = log.last() {
        warn!(
            "constraint generation hit {max_iter} iterations at α={} with violation {:.3e}",
            last.alpha, last.violation
        );
    }
    Err(Error::IterationLimit {
        limit: max_iter,
        violation: last_bound,
    })
}
