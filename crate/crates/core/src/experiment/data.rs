use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::robust::LinearDecisionProblem;

/// Stream offsets separating instance draws from data draws.
const INSTANCE_STREAM: u64 = 1 << 32;
const DATA_STREAM: u64 = 2 << 32;

/// Generator for stream `index` of the given kind under a master seed.
pub(crate) fn stream_rng(master: u64, kind: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(kind + index);
    rng
}

/// Minimum knapsack `min pᵀx` s.t. `aᵀx ≥ b`, `x ∈ [0, 100]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackInstanceSpec {
    pub n: usize,
    pub seed: u64,
}

pub const WEIGHT_RANGE: (f64, f64) = (25.0, 100.0);
pub const CAPACITY_FRACTION: f64 = 0.4;
pub const VARIABLE_BOUND: f64 = 100.0;

pub fn knapsack_weights(spec: &KnapsackInstanceSpec, index: u64) -> Result<Vec<f64>> {
    if spec.n == 0 {
        return Err(Error::invalid("knapsack dimension must be positive"));
    }
    let mut rng = stream_rng(spec.seed, INSTANCE_STREAM, index);
    Ok((0..spec.n)
        .map(|_| rng.random_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1))
        .collect())
}

/// Instance number `index` under the spec's seed.
pub fn generate_instance_indexed(spec: &KnapsackInstanceSpec, index: u64) -> Result<LinearDecisionProblem> {
    let a = knapsack_weights(spec, index)?;
    let b = CAPACITY_FRACTION * a.iter().sum::<f64>();
    LinearDecisionProblem::new(vec![a], vec![b], vec![(0.0, VARIABLE_BOUND); spec.n])
}

pub fn generate_instance(spec: &KnapsackInstanceSpec) -> Result<LinearDecisionProblem> {
    generate_instance_indexed(spec, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataVariant {
    Gaussian,
    GaussianInverseMV,
    HeavyTail,
}

impl DataVariant {
    pub fn label(self) -> &'static str {
        match self {
            DataVariant::Gaussian => "gaussian",
            DataVariant::GaussianInverseMV => "inverse",
            DataVariant::HeavyTail => "heavytail",
        }
    }
}

impl std::str::FromStr for DataVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(DataVariant::Gaussian),
            "inverse" => Ok(DataVariant::GaussianInverseMV),
            "heavytail" => Ok(DataVariant::HeavyTail),
            _ => Err(Error::invalid(format!(
                "unknown data model '{s}' (expected gaussian, inverse or heavytail)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataModelSpec {
    pub variant: DataVariant,
    pub n: usize,
    pub m: usize,
    /// Training fraction.
    pub split: f64,
    pub seed: u64,
}

pub const MEAN_RANGE: f64 = 50.0;
pub const PARETO_SHAPE: f64 = 1.5;

/// Haar-distributed orthogonal matrix from the QR factor of a Gaussian matrix.
fn random_orthonormal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Mean and per-direction deviations with orthonormal directions as columns.
pub(crate) struct GaussianModel {
    pub mean: Vec<f64>,
    pub deviations: Vec<f64>,
    pub basis: DMatrix<f64>,
}

#[cfg(test)]
impl GaussianModel {
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.deviations.len(),
            self.deviations.iter().map(|s| s * s),
        ));
        &self.basis * d * self.basis.transpose()
    }
}

fn gaussian_model(variant: DataVariant, n: usize, rng: &mut ChaCha8Rng) -> GaussianModel {
    let mean: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=MEAN_RANGE)).collect();
    let deviations = mean
        .iter()
        .map(|&mu| {
            let top = match variant {
                DataVariant::GaussianInverseMV => MEAN_RANGE - mu,
                _ => 0.5 * mu,
            };
            rng.random::<f64>() * top
        })
        .collect();
    let basis = random_orthonormal(n, rng);
    GaussianModel { mean, deviations, basis }
}

fn check_spec(spec: &DataModelSpec) -> Result<()> {
    if spec.n == 0 || spec.m < 2 {
        return Err(Error::invalid("data model needs n ≥ 1 and m ≥ 2"));
    }
    if !(spec.split > 0.0 && spec.split < 1.0) {
        return Err(Error::invalid(format!("split {} outside (0, 1)", spec.split)));
    }
    Ok(())
}

pub(crate) fn sample_points(spec: &DataModelSpec, index: u64) -> Result<(Vec<Vec<f64>>, Option<GaussianModel>)> {
    check_spec(spec)?;
    let mut rng = stream_rng(spec.seed, DATA_STREAM, index);
    let n = spec.n;
    Ok(match spec.variant {
        DataVariant::HeavyTail => {
            let pareto = Pareto::new(1.0, PARETO_SHAPE).expect("valid Pareto parameters");
            let pts = (0..spec.m)
                .map(|_| (0..n).map(|_| pareto.sample(&mut rng) + 1.0).collect())
                .collect();
            (pts, None)
        }
        variant => {
            let model = gaussian_model(variant, n, &mut rng);
            let pts = (0..spec.m)
                .map(|_| {
                    let mut p = model.mean.clone();
                    for (j, &s) in model.deviations.iter().enumerate() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        for (i, pi) in p.iter_mut().enumerate() {
                            *pi += s * z * model.basis[(i, j)];
                        }
                    }
                    p
                })
                .collect();
            (pts, Some(model))
        }
    })
}

/// Number of training points for `m` samples.
pub fn train_size(m: usize, split: f64) -> usize {
    ((split * m as f64).round() as usize).clamp(1, m - 1)
}

/// Dataset number `index`, split by position into training and test points.
pub fn sample_data_indexed(spec: &DataModelSpec, index: u64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (mut pts, _) = sample_points(spec, index)?;
    let test = pts.split_off(train_size(spec.m, spec.split));
    Ok((pts, test))
}

pub fn sample_data(spec: &DataModelSpec) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    sample_data_indexed(spec, 0)
}
