//! Adaptive decisions from a family of scalar estimates with nested
//! confidence radii, for the decision cost `|x − p|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Estimates `p₀(κ_j)` with radii `γ_j`, sorted by radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorFamily {
    entries: Vec<(f64, f64)>,
}

impl EstimatorFamily {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("estimator family is empty"));
        }
        if entries.iter().any(|&(p, r)| !p.is_finite() || !(r > 0.0) || !r.is_finite()) {
            return Err(Error::invalid("estimates must be finite and radii positive"));
        }
        if entries.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::invalid("radii must be nondecreasing"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Level `j` is the intersection of the intervals of entries `j..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedIntervalSets {
    pub levels: Vec<Option<(f64, f64)>>,
}

impl NestedIntervalSets {
    pub fn is_empty_level(&self, j: usize) -> bool {
        self.levels[j].is_none()
    }

    /// Smallest index with a nonempty level.
    pub fn first_nonempty(&self) -> Option<usize> {
        self.levels.iter().position(Option::is_some)
    }
}

pub fn build_nested_sets(fam: &EstimatorFamily) -> NestedIntervalSets {
    let mut levels = vec![None; fam.entries.len()];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (j, &(p, r)) in fam.entries.iter().enumerate().rev() {
        lo = lo.max(p - r);
        hi = hi.min(p + r);
        levels[j] = (lo <= hi).then_some((lo, hi));
    }
    NestedIntervalSets { levels }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSolution {
    pub x: f64,
    pub alpha: f64,
}

/// Minimizes α with `max_{p∈P_j} |x − p| ≤ (1 + α)·r_j` on every nonempty
/// level, where `r_j` is the level's half-width. Each constraint reads
/// `|x − c_j| ≤ α·r_j`, so the optimum sits at a center or where two
/// such cones cross.
pub fn solve_adaptive_garo(sets: &NestedIntervalSets) -> Result<AdaptiveSolution> {
    let cones: Vec<(f64, f64)> = sets
        .levels
        .iter()
        .flatten()
        .map(|&(lo, hi)| (0.5 * (lo + hi), 0.5 * (hi - lo)))
        .collect();
    if cones.is_empty() {
        return Err(Error::Infeasible("every level is empty".into()));
    }
    let ratio = |x: f64| {
        cones
            .iter()
            .map(|&(c, r)| {
                let d = (x - c).abs();
                if r > 0.0 {
                    d / r
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    };
    let mut candidates: Vec<f64> = cones.iter().map(|c| c.0).collect();
    for (i, &(ci, ri)) in cones.iter().enumerate() {
        for &(cj, rj) in &cones[i + 1..] {
            if ri + rj > 0.0 {
                candidates.push((ci * rj + cj * ri) / (ri + rj));
            }
        }
    }
    let mut best = AdaptiveSolution {
        x: candidates[0],
        alpha: f64::INFINITY,
    };
    for x in candidates {
        let a = ratio(x);
        if a < best.alpha || (a == best.alpha && x < best.x) {
            best = AdaptiveSolution { x, alpha: a };
        }
    }
    if !best.alpha.is_finite() {
        return Err(Error::Infeasible("degenerate levels admit no common decision".into()));
    }
    Ok(best)
}

/// Whether the adaptive ratio stays within the factor-two bound.
pub fn lepskii_alpha_bound_check(sets: &NestedIntervalSets) -> bool {
    solve_adaptive_garo(sets).is_ok_and(|s| s.alpha <= 1.0 + 1e-9)
}

/// Huber location estimate with clipping threshold `scale`.
pub fn huber_location(data: &[f64], scale: f64) -> Result<f64> {
    if data.is_empty() || !(scale > 0.0) {
        return Err(Error::invalid("Huber estimate needs data and a positive scale"));
    }
    let score = |m: f64| -> f64 { data.iter().map(|&p| (p - m).clamp(-scale, scale)).sum() };
    let (mut lo, mut hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| (a.min(p), b.max(p)));
    // The score is nonincreasing in m, nonnegative at the minimum and
    // nonpositive at the maximum.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Confidence radius `κ·√(2·ln(2(J+1)/δ)/N)`.
pub fn sub_gaussian_radius(kappa: f64, levels: usize, delta: f64, samples: usize) -> f64 {
    kappa * (2.0 * (2.0 * levels as f64 / delta).ln() / samples as f64).sqrt()
}

/// Family of Huber estimates with thresholds `κ_j = κ₀·β^j`, `j = 0..=J`.
pub fn huber_family(data: &[f64], kappa0: f64, ratio: f64, top: usize, delta: f64) -> Result<EstimatorFamily> {
    let entries = (0..=top)
        .map(|j| {
            let kappa = kappa0 * ratio.powi(j as i32);
            Ok((
                huber_location(data, kappa)?,
                sub_gaussian_radius(kappa, top + 1, delta, data.len()),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    EstimatorFamily::new(entries)
}
