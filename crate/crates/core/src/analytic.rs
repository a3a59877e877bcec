//! Instances with closed-form answers: a half-line location problem and
//! least-norm regression with an uncertain design matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conic::{self, ConicProgram, Relation};
use crate::error::{Error, Result};
use crate::garo::RateFunction;

/// Location on the half-line predicted at 0, with rate `(1 + γ)^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineWeber {
    q: f64,
}

impl HalfLineWeber {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 2.0) || !q.is_finite() {
            return Err(Error::invalid(format!(
                "the half-line instance needs q ≥ 2, got {q}; smaller exponents admit no finite ratio"
            )));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `sup_{γ≥0} (μ − γ)² / (1 + γ)^q`. Setting the log-derivative
    /// `2/(γ − μ) − q/(1 + γ)` to zero gives the interior candidate
    /// `γ = (2 + qμ)/(q − 2)`; the other candidate is `γ = 0`.
    pub fn ratio(&self, mu: f64) -> f64 {
        let q = self.q;
        let at_zero = mu * mu;
        if q == 2.0 {
            return at_zero.max(1.0);
        }
        let g = (2.0 + q * mu) / (q - 2.0);
        at_zero.max((mu - g).powi(2) / (1.0 + g).powf(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeberSolution {
    /// Optimal locations form `[mu_lo, mu_hi]`.
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub alpha: f64,
}

pub fn weber_adversarial_regret(mu: f64, gamma: f64) -> Result<f64> {
    if !(mu >= 0.0) || !(gamma >= 0.0) {
        return Err(Error::invalid("location and radius must be nonnegative"));
    }
    Ok((mu - gamma).powi(2))
}

pub fn weber_garo(q: f64) -> Result<WeberSolution> {
    let inst = HalfLineWeber::new(q)?;
    if q == 2.0 {
        return Ok(WeberSolution {
            mu_lo: 0.0,
            mu_hi: 1.0,
            alpha: 1.0,
        });
    }
    // μ²(1 + μ)^{q−2} = 4(q − 2)^{q−2}/q^q, in logs.
    let rhs = 4f64.ln() + (q - 2.0) * (q - 2.0).ln() - q * q.ln();
    let lhs = |mu: f64| 2.0 * mu.ln() + (q - 2.0) * mu.ln_1p();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while lhs(hi) < rhs {
        hi *= 2.0;
    }
    while hi - lo > 1e-15 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if lhs(mid) < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    Ok(WeberSolution {
        mu_lo: mu,
        mu_hi: mu,
        alpha: inst.ratio(mu),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSolution {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub oracle_values: Vec<f64>,
}

fn check_design(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<()> {
    if a.nrows() != b.len() || a.ncols() == 0 {
        return Err(Error::invalid("design matrix and response have inconsistent shapes"));
    }
    Ok(())
}

/// Variables `x (n)`, `u ≥ ‖Ax − b‖`, `w ≥ ‖x‖`; returns `(program, u, w)`.
fn residual_program(a: &DMatrix<f64>, b: &DVector<f64>) -> (ConicProgram, usize, usize) {
    let n = a.ncols();
    let mut p = ConicProgram::new(n);
    let u = p.add_variable(0.0, f64::INFINITY);
    let w = p.add_variable(0.0, f64::INFINITY);
    let m = p.num_vars();
    let rows = (0..a.nrows())
        .map(|i| {
            let mut r = vec![0.0; m];
            for j in 0..n {
                r[j] = a[(i, j)];
            }
            r
        })
        .collect();
    let mut cu = vec![0.0; m];
    cu[u] = 1.0;
    p.add_soc(rows, (-b).iter().copied().collect(), cu, 0.0);
    let ident = (0..n)
        .map(|i| {
            let mut r = vec![0.0; m];
            r[i] = 1.0;
            r
        })
        .collect();
    let mut cw = vec![0.0; m];
    cw[w] = 1.0;
    p.add_soc(ident, vec![0.0; n], cw, 0.0);
    (p, u, w)
}

/// Worst-case residual `‖Ax − b‖ + γ‖x‖` over spectral-norm perturbations of A.
pub fn regression_worst_case(a: &DMatrix<f64>, b: &DVector<f64>, x: &[f64], gamma: f64) -> f64 {
    let xv = DVector::from_column_slice(x);
    (a * &xv - b).norm() + gamma * xv.norm()
}

/// `min_x ‖Ax − b‖ + λ‖x‖`.
pub fn regularized_regression(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Result<(Vec<f64>, f64)> {
    check_design(a, b)?;
    let (mut p, u, w) = residual_program(a, b);
    p.objective[u] = 1.0;
    p.objective[w] = lambda;
    let out = conic::solve(&p)?.into_result("regularized regression")?;
    let x = out.primal[..a.ncols()].to_vec();
    let value = regression_worst_case(a, b, &x, lambda);
    Ok((x, value))
}

/// Regret-ratio regression over the given radii.
pub fn regression_garo(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    gammas: &[f64],
    rate: &RateFunction,
) -> Result<RegressionSolution> {
    check_design(a, b)?;
    if gammas.is_empty() || gammas.iter().any(|g| !(*g >= 0.0)) {
        return Err(Error::invalid("radii must be nonempty and nonnegative"));
    }
    let n = a.ncols();
    let oracle_values = gammas
        .iter()
        .map(|&g| regularized_regression(a, b, g).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    let rates = gammas.iter().map(|&g| rate.eval(g)).collect::<Result<Vec<_>>>()?;
    let (mut p, u, w) = residual_program(a, b);
    let alpha = p.add_variable(0.0, f64::INFINITY);
    p.objective[alpha] = 1.0;
    for ((&g, &v), &phi) in gammas.iter().zip(&oracle_values).zip(&rates) {
        if phi > 0.0 {
            p.add_sparse(&[(u, 1.0), (w, g), (alpha, -phi)], Relation::Le, v);
        } else {
            p.add_sparse(&[(u, 1.0), (w, g)], Relation::Le, v + 1e-9 * (1.0 + v.abs()));
        }
    }
    let out = conic::solve(&p)?.into_result("regression regret ratio")?;
    let x = out.primal[..n].to_vec();
    let mut certified = 0.0_f64;
    for ((&g, &v), &phi) in gammas.iter().zip(&oracle_values).zip(&rates) {
        if phi > 0.0 {
            certified = certified.max((regression_worst_case(a, b, &x, g) - v) / phi);
        }
    }
    Ok(RegressionSolution {
        x,
        alpha: certified,
        oracle_values,
    })
}

/// Two-radius solve, exact for concave rates because the worst-case
/// residual is affine in γ.
pub fn regression_two_point(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    gamma_max: f64,
    rate: &RateFunction,
) -> Result<RegressionSolution> {
    let interval = crate::uncertainty::GammaInterval::new(0.0, gamma_max)?;
    if !rate.is_concave_on(interval) {
        return Err(Error::invalid("the two-radius solve needs a concave rate"));
    }
    let gammas: &[f64] = if gamma_max > 0.0 { &[0.0, gamma_max] } else { &[0.0] };
    regression_garo(a, b, gammas, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regret_examples() {
        assert_eq!(weber_adversarial_regret(1.5, 1.5).unwrap(), 0.0);
        assert_eq!(weber_adversarial_regret(1.0, 0.0).unwrap(), 1.0);
        assert!((weber_adversarial_regret(0.2071, 2.0).unwrap() - 3.21449041).abs() < 1e-8);
        assert!(weber_adversarial_regret(-1.0, 0.0).is_err());
    }

    #[test]
    fn weber_closed_forms() {
        let two = weber_garo(2.0).unwrap();
        assert_eq!((two.mu_lo, two.mu_hi, two.alpha), (0.0, 1.0, 1.0));
        let four = weber_garo(4.0).unwrap();
        let root = (2f64.sqrt() - 1.0) / 2.0;
        assert!((four.mu_lo - root).abs() < 1e-12);
        assert!((four.mu_lo * (1.0 + four.mu_lo) - 0.25).abs() < 1e-12);
        assert!(weber_garo(1.5).is_err());

        let mus: Vec<f64> = [3.0, 4.0, 6.0, 10.0].iter().map(|&q| weber_garo(q).unwrap().mu_lo).collect();
        assert!(mus.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn weber_four_matches_grid_minimization() {
        let inst = HalfLineWeber::new(4.0).unwrap();
        let gammas: Vec<f64> = (0..=10_000).map(|k| k as f64 * 1e-3).collect();
        let (mut best_mu, mut best) = (0.0, f64::INFINITY);
        for k in 0..=1000 {
            let mu = k as f64 * 1e-3;
            let sup = gammas
                .iter()
                .map(|&g| (mu - g).powi(2) / (1.0 + g).powi(4))
                .fold(0.0, f64::max);
            if sup < best {
                best = sup;
                best_mu = mu;
            }
        }
        let sol = weber_garo(4.0).unwrap();
        assert!((sol.mu_lo - best_mu).abs() < 1e-3);
        assert!((sol.alpha - best).abs() < 1e-5);
        assert!((inst.ratio(sol.mu_lo) - sol.alpha).abs() < 1e-15);
    }

    #[test]
    fn regression_examples() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let sol = regression_two_point(&a, &b, 0.0, &RateFunction::Constant).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-7 && sol.x[1].abs() < 1e-7);
        assert!(sol.alpha < 1e-7);

        // v*(γ) = min(γ, 1) and x = t·b, so the ratio is max(1 − t, t).
        let sol = regression_two_point(&a, &b, 2.0, &RateFunction::Constant).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-6 && sol.x[1].abs() < 1e-6);
        assert!((sol.alpha - 0.5).abs() < 1e-6);

        let small = regression_two_point(&a, &b, 1.0, &RateFunction::Constant).unwrap();
        let grid: Vec<f64> = (0..100).map(|k| k as f64 / 99.0).collect();
        let dense = regression_garo(&a, &b, &grid, &RateFunction::Constant).unwrap();
        assert!((small.alpha - dense.alpha).abs() < 1e-6);
        for &g in &grid {
            let regret = regression_worst_case(&a, &b, &small.x, g) - g.min(1.0);
            assert!(regret <= small.alpha + 1e-6);
        }
    }

    #[test]
    fn regression_matches_a_regularized_fit() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.2, 1.0, 0.3, 0.1]);
        let b = DVector::from_vec(vec![1.0, 2.0, 0.5]);
        let sol = regression_two_point(&a, &b, 1e6, &RateFunction::Power(0.5)).unwrap();
        let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = norm(&sol.x);
        let ls = regularized_regression(&a, &b, 0.0).unwrap().0;
        assert!(target <= norm(&ls) + 1e-6);
        // Bisection on λ for a regularized fit with the same norm.
        let (mut lo, mut hi) = (0.0, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm(&regularized_regression(&a, &b, mid).unwrap().0) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let fit = regularized_regression(&a, &b, 0.5 * (lo + hi)).unwrap().0;
        assert!(fit.iter().zip(&sol.x).all(|(u, v)| (u - v).abs() < 1e-4), "{fit:?} {:?}", sol.x);
    }

    proptest! {
        #[test]
        fn weber_solution_is_feasible(q in 2.0..12.0f64, g in 0.0..1000.0f64) {
            let sol = weber_garo(q).unwrap();
            for mu in [sol.mu_lo, sol.mu_hi] {
                let lhs = (mu - g).powi(2);
                prop_assert!(lhs <= sol.alpha * (1.0 + g).powf(q) * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
