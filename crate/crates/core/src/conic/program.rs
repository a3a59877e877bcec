use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relation of a linear row to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `‖A·v + b‖₂ ≤ cᵀv + d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocConstraint {
    pub rows: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
    pub scalar_row: Vec<f64>,
    pub scalar_offset: f64,
}

impl SocConstraint {
    /// Signed violation `‖A·v + b‖ − (cᵀv + d)`; positive means violated.
    pub fn violation(&self, v: &[f64]) -> f64 {
        let norm = self
            .rows
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| {
                let r = dot(row, v) + b;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        norm - (dot(&self.scalar_row, v) + self.scalar_offset)
    }
}

/// Linear objective over linear and second-order-cone constraints with
/// per-variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    num_vars: usize,
    pub objective: Vec<f64>,
    pub linear: Vec<LinearConstraint>,
    pub soc: Vec<SocConstraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl ConicProgram {
    /// A program with `num_vars` free variables and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            linear: Vec::new(),
            soc: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_lp(&self) -> bool {
        self.soc.is_empty()
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    /// Appends a variable with zero coefficients everywhere and returns its index.
    pub fn add_variable(&mut self, lo: f64, hi: f64) -> usize {
        self.objective.push(0.0);
        self.bounds.push((lo, hi));
        for row in &mut self.linear {
            row.coeffs.push(0.0);
        }
        for cone in &mut self.soc {
            cone.scalar_row.push(0.0);
            cone.rows.iter_mut().for_each(|r| r.push(0.0));
        }
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_linear(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.linear.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Adds a linear row given as sparse `(index, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> &mut Self {
        let mut coeffs = vec![0.0; self.num_vars];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_linear(coeffs, relation, rhs)
    }

    pub fn add_soc(
        &mut self,
        rows: Vec<Vec<f64>>,
        offset: Vec<f64>,
        scalar_row: Vec<f64>,
        scalar_offset: f64,
    ) -> &mut Self {
        self.soc.push(SocConstraint {
            rows,
            offset,
            scalar_row,
            scalar_offset,
        });
        self
    }

    /// Checks row lengths and bound ordering.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if self.objective.len() != n {
            return Err(Error::MalformedProgram(format!(
                "objective has length {} but program has {n} variables",
                self.objective.len()
            )));
        }
        if self.bounds.len() != n {
            return Err(Error::MalformedProgram("bounds length mismatch".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::MalformedProgram(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        for (i, row) in self.linear.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::MalformedProgram(format!(
                    "linear row {i} has length {}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedProgram(format!("linear row {i} is not finite")));
            }
        }
        for (i, cone) in self.soc.iter().enumerate() {
            if cone.rows.len() != cone.offset.len()
                || cone.scalar_row.len() != n
                || cone.rows.iter().any(|r| r.len() != n)
            {
                return Err(Error::MalformedProgram(format!("cone {i} has inconsistent shape")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProgram("objective is not finite".into()));
        }
        Ok(())
    }

    /// Largest constraint violation of `v`, each row scaled by
    /// `1 + |rhs| + ‖row‖∞·‖v‖∞` so that the figure is comparable across
    /// problems of different magnitude.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut worst = 0.0_f64;
        for row in &self.linear {
            let lhs = dot(&row.coeffs, v);
            let raw = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            let amax = row.coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
            worst = worst.max(raw / (1.0 + row.rhs.abs() + amax * vmax));
        }
        for cone in &self.soc {
            let amax = cone
                .rows
                .iter()
                .flatten()
                .chain(&cone.scalar_row)
                .fold(0.0_f64, |m, a| m.max(a.abs()));
            let scale = 1.0 + cone.scalar_offset.abs() + amax * vmax;
            worst = worst.max(cone.violation(v) / scale);
        }
        for (&x, &(lo, hi)) in v.iter().zip(&self.bounds) {
            worst = worst.max((lo - x) / (1.0 + lo.abs().min(1e300)));
            worst = worst.max((x - hi) / (1.0 + hi.abs().min(1e300)));
        }
        worst.max(0.0)
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        dot(&self.objective, v)
    }
}

/// Plain-text dump, one item per line, for bug reports.
impl fmt::Display for ConicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.num_vars)?;
        writeln!(f, "min {}", join(&self.objective))?;
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_finite() || hi.is_finite() {
                writeln!(f, "bound {j} {lo:e} {hi:e}")?;
            }
        }
        for row in &self.linear {
            writeln!(f, "lin {} {} {:e}", join(&row.coeffs), row.relation, row.rhs)?;
        }
        for cone in &self.soc {
            let rows: Vec<String> = cone.rows.iter().map(|r| join(r)).collect();
            writeln!(
                f,
                "soc [{}] [{}] [{}] {:e}",
                rows.join(" ; "),
                join(&cone.offset),
                join(&cone.scalar_row),
                cone.scalar_offset
            )?;
        }
        Ok(())
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_bad_rows_and_bounds() {
        let mut p = ConicProgram::new(2);
        p.add_linear(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(p.validate(), Err(Error::MalformedProgram(_))));

        let mut p = ConicProgram::new(1);
        p.set_bounds(0, 2.0, 1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn dump_has_one_line_per_constraint() {
        let mut p = ConicProgram::new(2);
        p.set_objective(vec![1.0, 1.0]);
        p.add_linear(vec![1.0, 1.0], Relation::Ge, 1.0);
        p.add_soc(vec![vec![1.0, 0.0]], vec![0.0], vec![0.0, 1.0], 0.0);
        let text = p.to_string();
        assert_eq!(text.lines().filter(|l| l.starts_with("lin ")).count(), 1);
        assert_eq!(text.lines().filter(|l| l.starts_with("soc ")).count(), 1);
    }
}
