//! JSON instance files for `garo solve`.

use std::path::Path;

use garo_core::uncertainty::{DiscreteScenarios, Ellipsoid, Norm, NormBall, UncertaintyModel};
use garo_core::{Error, LinearDecisionProblem, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// `{x : rows·x ≥ rhs, lo ≤ x ≤ hi}`; `null` bounds mean unbounded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipsoidFile {
    pub center: Vec<f64>,
    /// Row-major shape matrix.
    pub shape: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelFile {
    Ellipsoid(EllipsoidFile),
    NormBall { center: Vec<f64>, norm: Norm },
    Discrete { points: Vec<Vec<f64>>, metric: Option<EllipsoidFile> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub problem: ProblemFile,
    pub model: ModelFile,
    /// Right end of the radius interval; the left end is 0.
    pub gamma_max: f64,
}

fn ellipsoid(e: &EllipsoidFile) -> Result<Ellipsoid> {
    let n = e.center.len();
    if e.shape.len() != n || e.shape.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("ellipsoid shape must be a square matrix matching the center"));
    }
    let flat: Vec<f64> = e.shape.iter().flatten().copied().collect();
    Ellipsoid::new(e.center.clone(), DMatrix::from_row_slice(n, n, &flat))
}

pub struct Instance {
    pub problem: LinearDecisionProblem,
    pub model: UncertaintyModel,
    pub gamma_max: f64,
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    /// Builds validated core objects.
    pub fn build(&self) -> Result<Instance> {
        let p = &self.problem;
        let bounds = p
            .bounds
            .iter()
            .map(|&(lo, hi)| (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
            .collect();
        let problem = LinearDecisionProblem::new(p.rows.clone(), p.rhs.clone(), bounds)?;
        let model = match &self.model {
            ModelFile::Ellipsoid(e) => UncertaintyModel::Ellipsoid(ellipsoid(e)?),
            ModelFile::NormBall { center, norm } => UncertaintyModel::NormBall(NormBall {
                center: center.clone(),
                norm: *norm,
            }),
            ModelFile::Discrete { points, metric } => UncertaintyModel::Discrete(match metric {
                Some(m) => DiscreteScenarios::with_metric(points.clone(), ellipsoid(m)?)?,
                None => DiscreteScenarios::new(points.clone())?,
            }),
        };
        if model.dim() != problem.dim() {
            return Err(Error::invalid("model and problem dimensions differ"));
        }
        if !(self.gamma_max >= 0.0) || !self.gamma_max.is_finite() {
            return Err(Error::invalid("gamma_max must be finite and nonnegative"));
        }
        Ok(Instance {
            problem,
            model,
            gamma_max: self.gamma_max,
        })
    }
}
