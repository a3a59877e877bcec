//! Globalized adversarial regret optimization for linear decision problems
//! with parametrized cost uncertainty.

pub mod adaptive;
pub mod analytic;
pub mod baselines;
pub mod conic;
pub mod error;
pub mod experiment;
pub mod garo;
pub mod robust;
pub mod tol;
pub mod uncertainty;

pub use error::{Error, Result};
pub use garo::{GaroMethod, GaroSolution, RateFunction};
pub use robust::{LinearDecisionProblem, OracleSolution, RobustOracle};
pub use uncertainty::{
    DiscreteScenarios, Ellipsoid, GammaInterval, KlBall, Norm, NormBall, UncertaintyModel,
};
