use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robust::OraclePath;
use crate::uncertainty::GammaInterval;

/// Budget for adversarial regret as a function of the radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateFunction {
    /// `φ ≡ 1`.
    Constant,
    /// `φ(γ) = (1 + γ)^q`.
    Power(f64),
    /// Piecewise linear through `(γ, φ)` knots sorted by `γ`.
    Tabulated(Vec<(f64, f64)>),
    /// `φ = v*_wc` along a traced oracle path.
    OracleCost(OraclePath),
}

impl RateFunction {
    pub fn power(q: f64) -> Result<Self> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::invalid(format!("power rate needs q ≥ 0, got {q}")));
        }
        Ok(RateFunction::Power(q))
    }

    /// Checks knots: sorted, finite, nonnegative and nondecreasing.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("tabulated rate needs at least one knot"));
        }
        if knots.iter().any(|&(g, v)| !g.is_finite() || !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("tabulated rate knots must be finite and nonnegative"));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid("tabulated rate knots must be strictly increasing in γ"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::invalid("rate functions must be nondecreasing"));
            }
        }
        Ok(RateFunction::Tabulated(knots))
    }

    pub fn eval(&self, gamma: f64) -> Result<f64> {
        match self {
            RateFunction::Constant => Ok(1.0),
            RateFunction::Power(q) => Ok((1.0 + gamma).powf(*q)),
            RateFunction::Tabulated(knots) => {
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if gamma < first.0 - 1e-12 || gamma > last.0 + 1e-12 {
                    return Err(Error::invalid(format!(
                        "γ={gamma} outside the tabulated range [{}, {}]",
                        first.0, last.0
                    )));
                }
                if knots.len() == 1 {
                    return Ok(first.1);
                }
                let k = knots
                    .windows(2)
                    .position(|w| gamma <= w[1].0)
                    .unwrap_or(knots.len() - 2);
                let ((g0, v0), (g1, v1)) = (knots[k], knots[k + 1]);
                let t = ((gamma - g0) / (g1 - g0)).clamp(0.0, 1.0);
                Ok(v0 + t * (v1 - v0))
            }
            RateFunction::OracleCost(path) => path.value(gamma),
        }
    }

    /// Smallest value on `interval`, attained at its left end.
    pub fn min_on(&self, interval: GammaInterval) -> Result<f64> {
        self.eval(interval.lo())
    }

    /// Lipschitz constant on `interval`.
    pub fn slope_bound(&self, interval: GammaInterval) -> f64 {
        let (a, b) = (interval.lo(), interval.hi());
        match self {
            RateFunction::Constant => 0.0,
            RateFunction::Power(q) => {
                let at = if *q >= 1.0 { b } else { a };
                q * (1.0 + at).powf(q - 1.0)
            }
            RateFunction::Tabulated(knots) => knots
                .windows(2)
                .filter(|w| w[1].0 > a && w[0].0 < b)
                .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                .fold(0.0, f64::max),
            RateFunction::OracleCost(path) => path
                .segments()
                .iter()
                .filter(|s| s.end >= a && s.start <= b)
                .map(|s| s.slope)
                .fold(0.0, f64::max),
        }
    }

    /// Whether φ is concave on `interval`.
    pub fn is_concave_on(&self, interval: GammaInterval) -> bool {
        match self {
            RateFunction::Constant => true,
            RateFunction::Power(q) => *q <= 1.0,
            RateFunction::Tabulated(_) | RateFunction::OracleCost(_) => {
                let slopes: Vec<f64> = self
                    .pieces_on(interval.lo(), interval.hi())
                    .iter()
                    .map(|&(a, b, va, vb)| if b > a { (vb - va) / (b - a) } else { 0.0 })
                    .collect();
                slopes.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()))
            }
        }
    }

    /// Linear pieces `(a, b, φ(a), φ(b))` of a piecewise-linear rate
    /// restricted to `[lo, hi]`.
    fn pieces_on(&self, lo: f64, hi: f64) -> Vec<(f64, f64, f64, f64)> {
        let mut cuts = vec![lo];
        match self {
            RateFunction::Tabulated(knots) => {
                cuts.extend(knots.iter().map(|k| k.0).filter(|&g| g > lo && g < hi))
            }
            RateFunction::OracleCost(path) => {
                cuts.extend(path.breakpoints().into_iter().filter(|&g| g > lo && g < hi))
            }
            _ => {}
        }
        cuts.push(hi);
        cuts.windows(2)
            .filter_map(|w| {
                let (a, b) = (w[0], w[1]);
                Some((a, b, self.eval(a).ok()?, self.eval(b).ok()?))
            })
            .collect()
    }

    /// `max_{γ ∈ [a, b]} Δγ − φ(γ)` together with a maximizer.
    pub fn conjugate_argmax(&self, a: f64, b: f64, slope: f64) -> Result<(f64, f64)> {
        if !(a <= b) {
            return Err(Error::invalid(format!("empty interval [{a}, {b}]")));
        }
        let mut candidates = vec![a, b];
        match self {
            RateFunction::Constant => {}
            RateFunction::Power(q) => {
                // Stationary point of Δγ − (1+γ)^q; a maximum only when q > 1.
                if *q != 1.0 && *q > 0.0 && slope > 0.0 {
                    let g = (slope / q).powf(1.0 / (q - 1.0)) - 1.0;
                    if g.is_finite() {
                        candidates.push(g.clamp(a, b));
                    }
                }
            }
            RateFunction::Tabulated(_) | RateFunction::OracleCost(_) => {
                candidates.extend(self.pieces_on(a, b).iter().map(|p| p.0));
            }
        }
        let mut best = (f64::NEG_INFINITY, a);
        for g in candidates {
            let v = slope * g - self.eval(g)?;
            if v > best.0 {
                best = (v, g);
            }
        }
        Ok(best)
    }
}

/// `φ(γ)`.
pub fn rate_eval(rate: &RateFunction, gamma: f64) -> Result<f64> {
    rate.eval(gamma)
}

/// `max_{γ ∈ [a, b]} Δγ − φ(γ)`.
pub fn interval_conjugate(rate: &RateFunction, interval: (f64, f64), slope: f64) -> Result<f64> {
    rate.conjugate_argmax(interval.0, interval.1, slope).map(|r| r.0)
}

/// `α·φ*(Δ/α)` on `[a, b]` with a maximizing γ; at `α = 0` the support
/// function of the interval.
pub fn perspective_argmax(
    rate: &RateFunction,
    interval: (f64, f64),
    slope: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    let (a, b) = interval;
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!("perspective needs α ≥ 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(if slope * b >= slope * a {
            (slope * b, b)
        } else {
            (slope * a, a)
        });
    }
    let (v, g) = rate.conjugate_argmax(a, b, slope / alpha)?;
    Ok((alpha * v, g))
}

pub fn perspective_conjugate(
    rate: &RateFunction,
    interval: (f64, f64),
    slope: f64,
    alpha: f64,
) -> Result<f64> {
    perspective_argmax(rate, interval, slope, alpha).map(|r| r.0)
}
