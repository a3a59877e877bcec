//! Nested families of cost-vector sets indexed by a radius, with worst-case
//! cost evaluation and radius calibration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue floor applied to estimated covariance matrices.
pub const COVARIANCE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|a| a.abs()).sum(),
            Norm::L2 => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m: f64, a| m.max(a.abs())),
        }
    }

    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn is_polyhedral(self) -> bool {
        self != Norm::L2
    }
}

/// The closed radius range `[lo, hi]`, `lo ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaInterval {
    lo: f64,
    hi: f64,
}

impl GammaInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::invalid(format!("radius interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.lo && gamma <= self.hi
    }

    /// `count` equidistant points including both ends (`count ≥ 1`).
    pub fn grid(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.lo],
            _ => (0..count)
                .map(|k| {
                    if k + 1 == count {
                        self.hi
                    } else {
                        self.lo + self.width() * k as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// `{p : (p − p0)ᵀ Σ⁻¹ (p − p0) ≤ γ}`; the radius bounds the squared distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    shape: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl Ellipsoid {
    /// Requires `shape` symmetric positive definite.
    pub fn new(center: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::invalid("shape matrix does not match the center"));
        }
        check_symmetric(&shape)?;
        let chol = shape
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("shape matrix is not positive definite"))?
            .l();
        Ok(Self {
            center,
            shape,
            chol,
        })
    }

    /// Regularizes an estimated covariance before building the set.
    pub fn from_covariance(center: Vec<f64>, covariance: &DMatrix<f64>) -> Result<Self> {
        Self::new(center, regularize_covariance(covariance)?)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// Lower Cholesky factor `L` with `Σ = L·Lᵀ`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn squared_distance(&self, p: &[f64]) -> f64 {
        let diff = DVector::from_iterator(p.len(), p.iter().zip(&self.center).map(|(a, b)| a - b));
        let y = self
            .chol
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        y.norm_squared()
    }

    /// `√(xᵀΣx)`.
    pub fn shape_norm(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        (self.chol.transpose() * xv).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBall {
    pub center: Vec<f64>,
    pub norm: Norm,
}

/// A finite scenario list. With a metric, the set at radius γ is the
/// center together with the scenarios inside the metric's ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScenarios {
    points: Vec<Vec<f64>>,
    metric: Option<Ellipsoid>,
    distances: Vec<f64>,
}

impl DiscreteScenarios {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        check_points(&points)?;
        let distances = vec![0.0; points.len()];
        Ok(Self {
            points,
            metric: None,
            distances,
        })
    }

    pub fn with_metric(points: Vec<Vec<f64>>, metric: Ellipsoid) -> Result<Self> {
        check_points(&points)?;
        if points[0].len() != metric.center.len() {
            return Err(Error::invalid("scenario dimension does not match the metric"));
        }
        let distances = points.iter().map(|p| metric.squared_distance(p)).collect();
        Ok(Self {
            points,
            metric: Some(metric),
            distances,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn metric(&self) -> Option<&Ellipsoid> {
        self.metric.as_ref()
    }

    /// Indices of the listed scenarios inside the set at radius γ.
    pub fn indices_within(&self, gamma: f64) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.metric.is_none() || self.distances[i] <= gamma)
            .collect()
    }

    /// The scenario vectors making up the set at radius γ.
    pub fn active(&self, gamma: f64) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        if let Some(m) = &self.metric {
            out.push(&m.center);
        }
        out.extend(self.indices_within(gamma).into_iter().map(|i| self.points[i].as_slice()));
        out
    }
}

/// Distributions over `support` within KL divergence γ² of `weights`, with
/// loss `xᵀξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlBall {
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl KlBall {
    pub fn new(support: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        check_points(&support)?;
        check_weights(&weights)?;
        if weights.len() != support.len() {
            return Err(Error::invalid("one weight per support point is required"));
        }
        Ok(Self { support, weights })
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn losses(&self, x: &[f64]) -> Vec<f64> {
        self.support.iter().map(|xi| dot(xi, x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UncertaintyModel {
    Ellipsoid(Ellipsoid),
    NormBall(NormBall),
    Discrete(DiscreteScenarios),
    Kl(KlBall),
}

impl UncertaintyModel {
    pub fn dim(&self) -> usize {
        match self {
            UncertaintyModel::Ellipsoid(e) => e.center.len(),
            UncertaintyModel::NormBall(b) => b.center.len(),
            UncertaintyModel::Discrete(d) => d.points[0].len(),
            UncertaintyModel::Kl(k) => k.support[0].len(),
        }
    }

    /// The prediction `p0`; for discrete sets without a metric the scenario
    /// mean, for KL balls the mean under the reference weights.
    pub fn nominal(&self) -> Vec<f64> {
        match self {
            UncertaintyModel::Ellipsoid(e) => e.center.clone(),
            UncertaintyModel::NormBall(b) => b.center.clone(),
            UncertaintyModel::Discrete(d) => match &d.metric {
                Some(m) => m.center.clone(),
                None => mean(d.points.iter().map(|p| (1.0 / d.points.len() as f64, p))),
            },
            UncertaintyModel::Kl(k) => mean(k.weights.iter().copied().zip(&k.support)),
        }
    }

    /// `max_{p ∈ P_γ} xᵀp`.
    pub fn worst_case_cost(&self, x: &[f64], gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!("radius must be finite and nonnegative, got {gamma}")));
        }
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "decision has length {} but the model has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(match self {
            UncertaintyModel::Ellipsoid(e) => dot(x, &e.center) + gamma.sqrt() * e.shape_norm(x),
            UncertaintyModel::NormBall(b) => dot(x, &b.center) + gamma * b.norm.dual().eval(x),
            UncertaintyModel::Discrete(d) => d
                .active(gamma)
                .into_iter()
                .map(|p| dot(x, p))
                .fold(f64::NEG_INFINITY, f64::max),
            UncertaintyModel::Kl(k) => kl_worst_case(&k.losses(x), &k.weights, gamma)?,
        })
    }

    /// Whether `p` lies in `P_γ`. KL balls are sets of distributions and
    /// have no such test.
    pub fn contains(&self, p: &[f64], gamma: f64) -> Option<bool> {
        match self {
            UncertaintyModel::Ellipsoid(e) => Some(e.squared_distance(p) <= gamma),
            UncertaintyModel::NormBall(b) => {
                let diff: Vec<f64> = p.iter().zip(&b.center).map(|(a, c)| a - c).collect();
                Some(b.norm.eval(&diff) <= gamma)
            }
            UncertaintyModel::Discrete(d) => Some(d.active(gamma).iter().any(|q| *q == p)),
            UncertaintyModel::Kl(_) => None,
        }
    }

    /// Per-point statistic whose sublevel sets are the `P_γ`.
    pub fn radius_statistic(&self, p: &[f64]) -> Result<f64> {
        match self {
            UncertaintyModel::Ellipsoid(e) => Ok(e.squared_distance(p)),
            UncertaintyModel::NormBall(b) => {
                let diff: Vec<f64> = p.iter().zip(&b.center).map(|(a, c)| a - c).collect();
                Ok(b.norm.eval(&diff))
            }
            _ => Err(Error::Unsupported(
                "radius statistics exist only for ellipsoids and norm balls".into(),
            )),
        }
    }
}

/// Smallest radius whose set covers a fraction `rho` of `data`.
pub fn calibrate_gamma(model: &UncertaintyModel, data: &[Vec<f64>], rho: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("calibration data is empty"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("coverage fraction {rho} outside [0, 1]")));
    }
    let mut stats = data
        .iter()
        .map(|p| model.radius_statistic(p))
        .collect::<Result<Vec<_>>>()?;
    let required = (rho * data.len() as f64 - 1e-9).ceil().max(0.0) as usize;
    if required == 0 {
        return Ok(0.0);
    }
    stats.sort_by(f64::total_cmp);
    Ok(stats[required - 1])
}

/// Returns `sigma` unchanged when its smallest eigenvalue is at least
/// [`COVARIANCE_FLOOR`], otherwise `sigma + COVARIANCE_FLOOR·I`.
pub fn regularize_covariance(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(sigma)?;
    let n = sigma.nrows();
    if n == 0 {
        return Err(Error::invalid("empty covariance matrix"));
    }
    let scale = sigma.amax().max(1.0);
    let min_eig = sigma.clone().symmetric_eigenvalues().min();
    if min_eig < -1e-8 * scale {
        return Err(Error::invalid(format!(
            "covariance has a negative eigenvalue {min_eig:.3e}"
        )));
    }
    if min_eig >= COVARIANCE_FLOOR {
        Ok(sigma.clone())
    } else {
        Ok(sigma + DMatrix::identity(n, n) * COVARIANCE_FLOOR)
    }
}

/// Worst-case expected loss over distributions within KL divergence γ² of
/// the reference weights, evaluated through its one-dimensional dual.
pub fn kl_worst_case(losses: &[f64], weights: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("radius must be finite and nonnegative, got {gamma}")));
    }
    if losses.len() != weights.len() || losses.is_empty() {
        return Err(Error::invalid("loss table and weights must have equal nonzero length"));
    }
    check_weights(weights)?;
    let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let mean: f64 = losses.iter().zip(weights).map(|(l, w)| l * w).sum();
    let spread = hi - lo;
    if spread <= 0.0 {
        return Ok(hi);
    }
    if gamma == 0.0 {
        return Ok(mean);
    }

    // Work with u = (α − ℓmax)/spread and gaps e_i = (ℓmax − ℓ_i)/spread ∈ [0, 1]:
    // value = ℓmax + spread·h(u), h(u) = u − c·exp(Σ w log(u + e)), c = e^{−γ²}.
    let gaps: Vec<(f64, f64)> = losses
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, &w)| ((hi - l) / spread, w))
        .collect();
    let c = (-gamma * gamma).exp();
    let one_minus_c = -(-gamma * gamma).exp_m1();
    let log_geo = |u: f64| gaps.iter().map(|&(e, w)| w * (u + e).ln()).sum::<f64>();
    let slope = |u: f64| {
        let s: f64 = gaps.iter().map(|&(e, w)| w / (u + e)).sum();
        1.0 - c * log_geo(u).exp() * s
    };
    // u − c·u·(1 + expm1(Σ w ln(1 + e/u))), stable for large u.
    let h = |u: f64| {
        let s: f64 = gaps.iter().map(|&(e, w)| w * (e / u).ln_1p()).sum();
        u * one_minus_c - c * u * s.exp_m1()
    };

    let mut left = 1e-12 / spread;
    if slope(left) >= 0.0 {
        let at_edge = -c * log_geo(0.0).exp();
        return Ok((hi + spread * at_edge).max(mean).min(hi));
    }
    let mut right = 11.0 + 1.0 / spread;
    while slope(right) < 0.0 {
        left = right;
        right *= 2.0;
        if right > 1e300 {
            return Ok(mean);
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (left + right);
        if slope(mid) < 0.0 {
            left = mid;
        } else {
            right = mid;
        }
        if right - left <= 1e-14 * right {
            break;
        }
    }
    let u = 0.5 * (left + right);
    Ok((hi + spread * h(u)).clamp(mean, hi))
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid("matrix is not square"));
    }
    let tol = 1e-10 * m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > tol {
        return Err(Error::invalid(format!("matrix is not symmetric (asymmetry {asym:.3e})")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

fn check_points(points: &[Vec<f64>]) -> Result<()> {
    let Some(first) = points.first() else {
        return Err(Error::invalid("scenario list is empty"));
    };
    if first.is_empty() || points.iter().any(|p| p.len() != first.len()) {
        return Err(Error::invalid("scenarios must share a nonzero dimension"));
    }
    Ok(())
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::invalid("weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

fn mean<'a>(items: impl Iterator<Item = (f64, &'a Vec<f64>)>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for (w, p) in items {
        if out.is_empty() {
            out = vec![0.0; p.len()];
        }
        for (o, v) in out.iter_mut().zip(p) {
            *o += w * v;
        }
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ellipsoid_identity() -> UncertaintyModel {
        UncertaintyModel::Ellipsoid(Ellipsoid::new(vec![1.0, 2.0], DMatrix::identity(2, 2)).unwrap())
    }

    fn ball(norm: Norm, center: Vec<f64>) -> UncertaintyModel {
        UncertaintyModel::NormBall(NormBall { center, norm })
    }

    /// Primal KL worst case by projected ascent over the simplex, for small
    /// tables: maximize Σ q ℓ subject to Σ w log(w/q) ≤ r via the tilted
    /// family q ∝ w/(a − ℓ), scanning a.
    fn kl_primal(losses: &[f64], weights: &[f64], gamma: f64) -> f64 {
        let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let r = gamma * gamma;
        let mut best = losses.iter().zip(weights).map(|(l, w)| l * w).sum::<f64>();
        for k in 1..=40_000 {
            let a = hi + 1e-9 * (1.0f64 + 1e-3).powi(k);
            let raw: Vec<f64> = losses.iter().zip(weights).map(|(l, w)| w / (a - l)).collect();
            let z: f64 = raw.iter().sum();
            let q: Vec<f64> = raw.iter().map(|v| v / z).collect();
            let kl: f64 = weights
                .iter()
                .zip(&q)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, qi)| w * (w / qi).ln())
                .sum();
            if kl <= r {
                let val: f64 = q.iter().zip(losses).map(|(qi, l)| qi * l).sum();
                best = best.max(val);
            }
            if a > hi + 1e6 {
                break;
            }
        }
        best
    }

    #[test]
    fn ellipsoid_worst_case_matches_boundary_samples() {
        let model = ellipsoid_identity();
        let v = model.worst_case_cost(&[1.0, 0.0], 4.0).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        let sampled = (0..2000)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 2000.0;
                1.0 + 2.0 * t.cos()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - sampled).abs() < 1e-3);
    }

    #[test]
    fn l1_ball_worst_case_by_vertices() {
        let model = ball(Norm::L1, vec![1.0, 2.0]);
        let x = [0.5, 0.5];
        let v = model.worst_case_cost(&x, 2.0).unwrap();
        let vertices = [[3.0, 2.0], [-1.0, 2.0], [1.0, 4.0], [1.0, 0.0]];
        let best = vertices
            .iter()
            .map(|p| dot(p, &x))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - 2.5).abs() < 1e-12);
        assert!((v - best).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_gives_nominal_cost() {
        let x = [0.3, 0.7];
        for model in [ellipsoid_identity(), ball(Norm::L2, vec![1.0, 2.0])] {
            assert!((model.worst_case_cost(&x, 0.0).unwrap() - 1.7).abs() < 1e-12);
        }
        let kl = kl_worst_case(&[0.0, 1.0, 3.0], &[0.2, 0.5, 0.3], 0.0).unwrap();
        assert!((kl - 1.4).abs() < 1e-12);
        assert!(ellipsoid_identity().worst_case_cost(&x, -1.0).is_err());
    }

    #[test]
    fn kl_approaches_max_loss() {
        let mut prev = 0.5;
        for gamma in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = kl_worst_case(&[0.0, 1.0], &[0.5, 0.5], gamma).unwrap();
            assert!(v >= prev - 1e-12 && v <= 1.0);
            prev = v;
        }
        assert!(prev > 0.999);
        assert_eq!(kl_worst_case(&[2.0, 2.0], &[0.5, 0.5], 1.0).unwrap(), 2.0);
    }

    #[test]
    fn kl_dual_matches_primal_scan() {
        let losses = [0.0, 1.0, 3.0];
        let weights = [0.2, 0.5, 0.3];
        for gamma in [0.05, 0.3, 0.8, 1.5] {
            let dual = kl_worst_case(&losses, &weights, gamma).unwrap();
            let primal = kl_primal(&losses, &weights, gamma);
            assert!((dual - primal).abs() < 1e-3, "γ={gamma}: {dual} vs {primal}");
        }
    }

    #[test]
    fn kl_zero_weight_on_max_loss() {
        // Mass may move to the unweighted scenario freely, up to the KL budget.
        let v = kl_worst_case(&[0.0, 1.0, 5.0], &[0.5, 0.5, 0.0], 0.7).unwrap();
        assert!(v <= 5.0 && v >= 0.5);
        let w = kl_worst_case(&[0.0, 1.0, 5.0], &[0.5, 0.5, 0.0], 0.8).unwrap();
        assert!(w >= v);
    }

    #[test]
    fn calibration_examples() {
        let model = UncertaintyModel::Ellipsoid(
            Ellipsoid::new(vec![0.0], DMatrix::from_element(1, 1, 1.0)).unwrap(),
        );
        let data: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 4.0, 10.0].iter().map(|v| vec![*v]).collect();
        assert_eq!(calibrate_gamma(&model, &data, 0.8).unwrap(), 16.0);
        assert_eq!(calibrate_gamma(&model, &data, 0.0).unwrap(), 0.0);
        let at_center = vec![vec![0.0]; 4];
        assert_eq!(calibrate_gamma(&model, &at_center, 0.9).unwrap(), 0.0);
        let disc = UncertaintyModel::Discrete(DiscreteScenarios::new(data.clone()).unwrap());
        assert!(calibrate_gamma(&disc, &data, 0.5).is_err());
    }

    #[test]
    fn covariance_regularization() {
        let i = DMatrix::<f64>::identity(2, 2);
        assert_eq!(regularize_covariance(&i).unwrap(), i);
        let z = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(regularize_covariance(&z).unwrap(), &i * 1e-4);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-6]));
        let r = regularize_covariance(&d).unwrap();
        let eig = r.clone().symmetric_eigenvalues();
        let mut e: Vec<f64> = eig.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] - (1e-6 + 1e-4)).abs() < 1e-15 && (e[1] - 1.0001).abs() < 1e-15);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(regularize_covariance(&asym).is_err());
    }

    #[test]
    fn discrete_set_always_holds_its_center() {
        let metric = Ellipsoid::new(vec![0.0, 0.0], DMatrix::identity(2, 2)).unwrap();
        let d = DiscreteScenarios::with_metric(vec![vec![3.0, 0.0], vec![0.0, 1.0]], metric).unwrap();
        assert_eq!(d.active(0.5).len(), 1);
        assert_eq!(d.active(1.0).len(), 2);
        assert_eq!(d.active(9.0).len(), 3);
        let model = UncertaintyModel::Discrete(d);
        assert_eq!(model.worst_case_cost(&[1.0, 0.0], 0.5).unwrap(), 0.0);
        assert_eq!(model.worst_case_cost(&[1.0, 0.0], 9.0).unwrap(), 3.0);
    }

    #[test]
    fn grid_hits_both_ends() {
        let g = GammaInterval::new(0.0, 2.0).unwrap().grid(101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 2.0);
        assert!((g[50] - 1.0).abs() < 1e-15);
        assert!(GammaInterval::new(-0.1, 1.0).is_err());
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, n)
    }

    fn any_norm() -> impl Strategy<Value = Norm> {
        prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::Linf)]
    }

    proptest! {
        #[test]
        fn worst_case_is_monotone_in_radius(
            x in small_vec(3), c in small_vec(3), norm in any_norm(),
            g1 in 0.0f64..5.0, dg in 0.0f64..5.0,
        ) {
            for model in [ball(norm, c.clone()),
                          UncertaintyModel::Ellipsoid(Ellipsoid::new(c.clone(), DMatrix::identity(3, 3) * 2.0).unwrap())] {
                let a = model.worst_case_cost(&x, g1).unwrap();
                let b = model.worst_case_cost(&x, g1 + dg).unwrap();
                prop_assert!(b >= a - 1e-12);
            }
        }

        #[test]
        fn premium_is_translation_invariant_and_homogeneous(
            x in small_vec(3), c1 in small_vec(3), c2 in small_vec(3),
            norm in any_norm(), g in 0.0f64..5.0, t in 0.0f64..4.0,
        ) {
            let m1 = ball(norm, c1.clone());
            let m2 = ball(norm, c2.clone());
            let p1 = m1.worst_case_cost(&x, g).unwrap() - dot(&x, &c1);
            let p2 = m2.worst_case_cost(&x, g).unwrap() - dot(&x, &c2);
            prop_assert!((p1 - p2).abs() < 1e-9);
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let pt = m1.worst_case_cost(&tx, g).unwrap() - dot(&tx, &c1);
            prop_assert!((pt - t * p1).abs() < 1e-9);

            let e1 = UncertaintyModel::Ellipsoid(Ellipsoid::new(c1.clone(), DMatrix::identity(3, 3)).unwrap());
            let e2 = UncertaintyModel::Ellipsoid(Ellipsoid::new(c2.clone(), DMatrix::identity(3, 3)).unwrap());
            let q1 = e1.worst_case_cost(&x, g).unwrap() - dot(&x, &c1);
            let q2 = e2.worst_case_cost(&x, g).unwrap() - dot(&x, &c2);
            prop_assert!((q1 - q2).abs() < 1e-9);
        }

        #[test]
        fn kl_is_lipschitz_in_radius(
            losses in prop::collection::vec(-5.0f64..5.0, 2..6),
            raw in prop::collection::vec(0.05f64..1.0, 6),
            g1 in 0.0f64..3.0, g2 in 0.0f64..3.0,
        ) {
            let w: Vec<f64> = raw[..losses.len()].to_vec();
            let total: f64 = w.iter().sum();
            let mut w: Vec<f64> = w.iter().map(|v| v / total).collect();
            let fix: f64 = 1.0 - w.iter().sum::<f64>();
            w[0] += fix;
            let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
            let a = kl_worst_case(&losses, &w, g1).unwrap();
            let b = kl_worst_case(&losses, &w, g2).unwrap();
            prop_assert!((a - b).abs() <= std::f64::consts::SQRT_2 * (hi - lo) * (g1 - g2).abs() + 1e-9);
            prop_assert!(a <= hi + 1e-12);
        }

        // Dense sampling of the set never beats the closed form and gets close.
        #[test]
        fn closed_forms_match_sampling(
            x in small_vec(2), c in small_vec(2), norm in any_norm(), g in 0.1f64..3.0,
        ) {
            let model = ball(norm, c.clone());
            let exact = model.worst_case_cost(&x, g).unwrap();
            let mut best = f64::NEG_INFINITY;
            for k in 0..20_000 {
                let t = std::f64::consts::TAU * k as f64 / 20_000.0;
                let dir = [t.cos(), t.sin()];
                let r = g / norm.eval(&dir);
                let p = [c[0] + r * dir[0], c[1] + r * dir[1]];
                best = best.max(dot(&p, &x));
            }
            prop_assert!(best <= exact + 1e-9);
            prop_assert!(exact - best < 1e-3 * (1.0 + exact.abs()));
        }
    }
}
