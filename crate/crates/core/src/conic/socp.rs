//! Programs with cone rows go to clarabel's interior-point method.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus,
    SupportedConeT, ZeroConeT,
};

use super::program::{ConicProgram, Relation};
use super::{SolveStatus, SolverOptions};

pub(crate) struct SocpResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub iterations: usize,
}

#[derive(Default)]
struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    fn push(&mut self, coeffs: impl IntoIterator<Item = (usize, f64)>, rhs: f64) {
        let row = self.b.len();
        for (j, a) in coeffs {
            if a != 0.0 {
                self.i.push(row);
                self.j.push(j);
                self.v.push(a);
            }
        }
        self.b.push(rhs);
    }
}

/// Stacks the program as `A·v + s = b`, `s ∈ K` with zero rows first, then
/// nonnegative rows, then one block per cone.
pub(crate) fn solve_socp(prog: &ConicProgram, opts: &SolverOptions) -> SocpResult {
    let n = prog.num_vars();
    let mut rows = Rows::default();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

    let eq: Vec<_> = prog.linear.iter().filter(|r| r.relation == Relation::Eq).collect();
    for r in &eq {
        rows.push(r.coeffs.iter().copied().enumerate(), r.rhs);
    }
    if !eq.is_empty() {
        cones.push(ZeroConeT(eq.len()));
    }

    let start = rows.b.len();
    for r in &prog.linear {
        match r.relation {
            Relation::Le => rows.push(r.coeffs.iter().copied().enumerate(), r.rhs),
            Relation::Ge => rows.push(r.coeffs.iter().map(|a| -a).enumerate(), -r.rhs),
            Relation::Eq => {}
        }
    }
    for (j, &(lo, hi)) in prog.bounds.iter().enumerate() {
        if lo.is_finite() {
            rows.push([(j, -1.0)], -lo);
        }
        if hi.is_finite() {
            rows.push([(j, 1.0)], hi);
        }
    }
    if rows.b.len() > start {
        cones.push(NonnegativeConeT(rows.b.len() - start));
    }

    for cone in &prog.soc {
        rows.push(cone.scalar_row.iter().map(|a| -a).enumerate(), cone.scalar_offset);
        for (row, &off) in cone.rows.iter().zip(&cone.offset) {
            rows.push(row.iter().map(|a| -a).enumerate(), off);
        }
        cones.push(SecondOrderConeT(cone.rows.len() + 1));
    }

    let m = rows.b.len();
    let a = CscMatrix::new_from_triplets(m, n, rows.i, rows.j, rows.v);
    let p = CscMatrix::<f64>::zeros((n, n));
    let settings = DefaultSettings {
        max_iter: opts.max_iter.min(u32::MAX as usize) as u32,
        verbose: false,
        tol_gap_abs: 1e-10,
        tol_gap_rel: 1e-10,
        tol_feas: 1e-10,
        ..DefaultSettings::default()
    };
    let failed = |status| SocpResult {
        status,
        x: vec![f64::NAN; n],
        iterations: 0,
    };
    let mut solver = match DefaultSolver::new(&p, &prog.objective, &a, &rows.b, &cones, settings) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("clarabel rejected the program: {e}");
            return failed(SolveStatus::NumericalFailure);
        }
    };
    solver.solve();
    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        other => {
            log::debug!("clarabel stopped with {other:?}");
            SolveStatus::NumericalFailure
        }
    };
    if status != SolveStatus::Optimal {
        return SocpResult {
            iterations: sol.iterations as usize,
            ..failed(status)
        };
    }
    let x = sol
        .x
        .iter()
        .zip(&prog.bounds)
        .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
        .collect();
    SocpResult {
        status,
        x,
        iterations: sol.iterations as usize,
    }
}
