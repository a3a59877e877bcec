//! Linear and second-order-cone programming.
//!
//! Pure LPs are solved by a dense simplex so that optima are vertices; any
//! program with a cone row goes to an interior-point solver.

mod program;
mod simplex;
mod socp;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use program::{ConicProgram, LinearConstraint, Relation, SocConstraint};

use crate::error::{Error, Result};
use crate::tol::{BREAKPOINT_MERGE, DEFAULT_MAX_ITER, TOL_FEAS};
use simplex::LpStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub objective_value: f64,
    /// Scaled max primal violation, see [`ConicProgram::max_violation`].
    pub residuals: f64,
    pub iterations: usize,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Converts a non-optimal outcome into an error carrying `context`.
    pub fn into_result(self, context: &str) -> Result<Self> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            SolveStatus::Infeasible => Err(Error::Infeasible(context.to_string())),
            SolveStatus::Unbounded => Err(Error::Unbounded(context.to_string())),
            SolveStatus::NumericalFailure => Err(Error::NumericalFailure(format!(
                "{context} (residual {:.3e} after {} iterations)",
                self.residuals, self.iterations
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// When set, every solved program is written here in text form.
    pub dump_path: Option<PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            dump_path: None,
        }
    }
}

pub fn solve(prog: &ConicProgram) -> Result<SolveOutcome> {
    solve_with(prog, &SolverOptions::default())
}

/// Solves `prog`. `Err` is returned only for malformed programs; solver
/// trouble is reported through [`SolveOutcome::status`].
pub fn solve_with(prog: &ConicProgram, opts: &SolverOptions) -> Result<SolveOutcome> {
    prog.validate()?;
    if let Some(path) = &opts.dump_path {
        std::fs::write(path, prog.to_string()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    let (status, primal, iterations) = if prog.is_lp() {
        let r = simplex::solve_lp(prog, opts.max_iter);
        let status = match r.status {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::Infeasible => SolveStatus::Infeasible,
            LpStatus::Unbounded => SolveStatus::Unbounded,
            LpStatus::IterationLimit => SolveStatus::NumericalFailure,
        };
        (status, r.x, r.iterations)
    } else {
        let r = socp::solve_socp(prog, opts);
        (r.status, r.x, r.iterations)
    };
    if status != SolveStatus::Optimal {
        return Ok(SolveOutcome {
            status,
            primal,
            objective_value: f64::NAN,
            residuals: f64::INFINITY,
            iterations,
        });
    }
    let residuals = prog.max_violation(&primal);
    let status = if residuals <= TOL_FEAS {
        status
    } else {
        log::warn!("solver returned a point with residual {residuals:.3e}");
        SolveStatus::NumericalFailure
    };
    Ok(SolveOutcome {
        status,
        objective_value: prog.objective_value(&primal),
        primal,
        residuals,
        iterations,
    })
}

/// One piece of the optimal value of `min (base + γ·direction)ᵀv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricSegment {
    pub start: f64,
    pub end: f64,
    pub vertex: Vec<f64>,
    /// Value of the segment's line at γ = 0.
    pub intercept: f64,
    pub slope: f64,
}

impl ParametricSegment {
    pub fn value_at(&self, gamma: f64) -> f64 {
        self.intercept + self.slope * gamma
    }
}

const PARAMETRIC_DEPTH: usize = 60;

struct Endpoint {
    gamma: f64,
    vertex: Vec<f64>,
    value: f64,
}

struct Tracer<'a> {
    prog: ConicProgram,
    base: &'a [f64],
    direction: &'a [f64],
}

impl Tracer<'_> {
    fn solve_at(&mut self, gamma: f64) -> Result<Endpoint> {
        self.prog.objective = self
            .base
            .iter()
            .zip(self.direction)
            .map(|(b, d)| b + gamma * d)
            .collect();
        let out = solve(&self.prog)?.into_result(&format!("parametric solve at γ={gamma}"))?;
        Ok(Endpoint {
            gamma,
            value: out.objective_value,
            vertex: out.primal,
        })
    }

    fn line(&self, v: &[f64]) -> (f64, f64) {
        (program::dot(self.base, v), program::dot(self.direction, v))
    }

    fn segment(&self, start: f64, end: f64, vertex: &[f64]) -> ParametricSegment {
        let (intercept, slope) = self.line(vertex);
        ParametricSegment {
            start,
            end,
            vertex: vertex.to_vec(),
            intercept,
            slope,
        }
    }

    fn trace(
        &mut self,
        lo: &Endpoint,
        hi: &Endpoint,
        depth: usize,
        out: &mut Vec<ParametricSegment>,
    ) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        let same_vertex = lo
            .vertex
            .iter()
            .zip(&hi.vertex)
            .all(|(a, b)| close(*a, *b));
        let (i1, s1) = self.line(&lo.vertex);
        let (i2, s2) = self.line(&hi.vertex);
        // A vertex optimal at both ends is optimal throughout by concavity.
        if same_vertex || close(i1 + s1 * hi.gamma, hi.value) {
            out.push(self.segment(lo.gamma, hi.gamma, &lo.vertex));
            return Ok(());
        }
        if close(i2 + s2 * lo.gamma, lo.value) {
            out.push(self.segment(lo.gamma, hi.gamma, &hi.vertex));
            return Ok(());
        }
        let mid = if s1 - s2 > 1e-14 {
            ((i2 - i1) / (s1 - s2)).clamp(lo.gamma, hi.gamma)
        } else {
            0.5 * (lo.gamma + hi.gamma)
        };
        if depth >= PARAMETRIC_DEPTH || hi.gamma - lo.gamma <= BREAKPOINT_MERGE {
            out.push(self.segment(lo.gamma, mid, &lo.vertex));
            out.push(self.segment(mid, hi.gamma, &hi.vertex));
            return Ok(());
        }
        let m = self.solve_at(mid)?;
        if close(m.value, i1 + s1 * mid) && close(m.value, i2 + s2 * mid) {
            out.push(self.segment(lo.gamma, mid, &lo.vertex));
            out.push(self.segment(mid, hi.gamma, &hi.vertex));
            return Ok(());
        }
        self.trace(lo, &m, depth + 1, out)?;
        self.trace(&m, hi, depth + 1, out)
    }
}

/// Traces the optimal value of `min (prog.objective + γ·direction)ᵀv` over
/// `[lo, hi]` as a list of affine pieces with an optimal vertex each.
pub fn solve_lp_parametric(
    prog: &ConicProgram,
    direction: &[f64],
    range: (f64, f64),
) -> Result<Vec<ParametricSegment>> {
    prog.validate()?;
    if !prog.is_lp() {
        return Err(Error::Unsupported(
            "parametric solve needs a program without cone rows".into(),
        ));
    }
    if direction.len() != prog.num_vars() {
        return Err(Error::MalformedProgram("direction has wrong length".into()));
    }
    let (lo, hi) = range;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("bad parameter range [{lo}, {hi}]")));
    }
    let mut tracer = Tracer {
        prog: prog.clone(),
        base: &prog.objective,
        direction,
    };
    let a = tracer.solve_at(lo)?;
    if hi - lo <= BREAKPOINT_MERGE {
        return Ok(vec![tracer.segment(lo, hi, &a.vertex)]);
    }
    let b = tracer.solve_at(hi)?;
    let mut raw = Vec::new();
    tracer.trace(&a, &b, 0, &mut raw)?;
    Ok(merge_segments(raw))
}

fn merge_segments(raw: Vec<ParametricSegment>) -> Vec<ParametricSegment> {
    let mut out: Vec<ParametricSegment> = Vec::with_capacity(raw.len());
    for seg in raw {
        if let Some(last) = out.last_mut() {
            let same_line = (last.slope - seg.slope).abs() <= BREAKPOINT_MERGE * (1.0 + last.slope.abs())
                && (last.intercept - seg.intercept).abs()
                    <= BREAKPOINT_MERGE * (1.0 + last.intercept.abs());
            if same_line || seg.end - seg.start <= BREAKPOINT_MERGE {
                last.end = seg.end;
                continue;
            }
            if last.end - last.start <= BREAKPOINT_MERGE {
                let start = last.start;
                *last = seg;
                last.start = start;
                continue;
            }
        }
        out.push(seg);
    }
    out
}
