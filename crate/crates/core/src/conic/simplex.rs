//! Dense two-phase tableau simplex for programs without cone rows.
//!
//! Returns exact vertices, which the parametric tracer relies on when it
//! compares optima at interval endpoints.

use super::program::{ConicProgram, Relation};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

pub(crate) struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// `x_j = offset_j + Σ coef·y_col` over the nonnegative standard-form columns.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    cost_value: f64,
    basis: Vec<usize>,
    blocked: Vec<bool>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.at(r, c);
        for j in 0..cols {
            self.a[r * cols + j] /= p;
        }
        self.rhs[r] /= p;
        self.a[r * cols + c] = 1.0;
        let (pivot_row, pivot_rhs) = (self.a[r * cols..(r + 1) * cols].to_vec(), self.rhs[r]);
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
            if self.rhs[i].abs() < 1e-14 {
                self.rhs[i] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
            self.cost_value -= f * pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Loads a cost vector over all columns and prices out the basis.
    fn set_cost(&mut self, c: &[f64]) {
        self.cost = c.to_vec();
        self.cost_value = 0.0;
        for i in 0..self.rows {
            let b = self.basis[i];
            let f = self.cost[b];
            if f != 0.0 {
                for j in 0..self.cols {
                    self.cost[j] -= f * self.a[i * self.cols + j];
                }
                self.cost_value -= f * self.rhs[i];
            }
        }
    }

    /// Runs primal simplex iterations on the current cost row.
    fn optimize(&mut self, budget: &mut usize, iterations: &mut usize) -> LpStatus {
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if *budget == 0 {
                return LpStatus::IterationLimit;
            }
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..self.cols {
                if self.blocked[j] {
                    continue;
                }
                let d = self.cost[j];
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = entering else {
                return LpStatus::Optimal;
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((r, best_ratio, best_a)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                a > best_a
                            }
                        } else {
                            ratio < best_ratio
                        };
                        if better {
                            Some((i, ratio, a))
                        } else {
                            Some((r, best_ratio, best_a))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                return LpStatus::Unbounded;
            };
            if ratio == 0.0 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            *budget -= 1;
            *iterations += 1;
        }
    }
}

/// Solves the LP in `prog` (cone rows are ignored).
pub(crate) fn solve_lp(prog: &ConicProgram, max_iter: usize) -> LpResult {
    let n = prog.num_vars();

    // Map each variable onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut rows: Vec<Row> = Vec::new();
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &prog.bounds {
        if lo.is_finite() {
            maps.push(VarMap {
                offset: lo,
                terms: vec![(ncols, 1.0)],
            });
            if hi.is_finite() {
                upper_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap {
                offset: hi,
                terms: vec![(ncols, -1.0)],
            });
            ncols += 1;
        } else {
            maps.push(VarMap {
                offset: 0.0,
                terms: vec![(ncols, 1.0), (ncols + 1, -1.0)],
            });
            ncols += 2;
        }
    }
    let structural = ncols;

    for con in &prog.linear {
        let mut coeffs = vec![0.0; structural];
        let mut rhs = con.rhs;
        for (j, &a) in con.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            rhs -= a * maps[j].offset;
            for &(col, s) in &maps[j].terms {
                coeffs[col] += a * s;
            }
        }
        rows.push(Row {
            coeffs,
            relation: con.relation,
            rhs,
        });
    }
    for &(col, ub) in &upper_rows {
        let mut coeffs = vec![0.0; structural];
        coeffs[col] = 1.0;
        rows.push(Row {
            coeffs,
            relation: Relation::Le,
            rhs: ub,
        });
    }

    // Equilibrate rows and make every rhs nonnegative.
    for row in &mut rows {
        let scale = row.coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if scale > 0.0 {
            row.coeffs.iter_mut().for_each(|a| *a /= scale);
            row.rhs /= scale;
        }
        if row.rhs < 0.0 {
            row.coeffs.iter_mut().for_each(|a| *a = -*a);
            row.rhs = -row.rhs;
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let m = rows.len();
    let num_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let num_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
    let cols = structural + num_slack + num_art;
    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * cols],
        rhs: vec![0.0; m],
        cost: vec![0.0; cols],
        cost_value: 0.0,
        basis: vec![0; m],
        blocked: vec![false; cols],
    };
    let (mut next_slack, mut next_art) = (structural, structural + num_slack);
    let mut is_art = vec![false; cols];
    for (i, row) in rows.iter().enumerate() {
        t.a[i * cols..i * cols + structural].copy_from_slice(&row.coeffs);
        t.rhs[i] = row.rhs;
        match row.relation {
            Relation::Le => {
                t.a[i * cols + next_slack] = 1.0;
                t.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.a[i * cols + next_slack] = -1.0;
                next_slack += 1;
                t.a[i * cols + next_art] = 1.0;
                t.basis[i] = next_art;
                is_art[next_art] = true;
                next_art += 1;
            }
            Relation::Eq => {
                t.a[i * cols + next_art] = 1.0;
                t.basis[i] = next_art;
                is_art[next_art] = true;
                next_art += 1;
            }
        }
    }

    let mut budget = max_iter;
    let mut iterations = 0usize;
    let fail = |status, iterations| LpResult {
        status,
        x: vec![f64::NAN; n],
        iterations,
    };

    if num_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if is_art[j] { 1.0 } else { 0.0 }).collect();
        t.set_cost(&phase1);
        match t.optimize(&mut budget, &mut iterations) {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => return fail(LpStatus::IterationLimit, iterations),
            // Phase 1 is bounded below by zero.
            LpStatus::Unbounded | LpStatus::Infeasible => {
                return fail(LpStatus::Infeasible, iterations)
            }
        }
        let rhs_scale = 1.0 + t.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if -t.cost_value > 1e-9 * rhs_scale {
            return fail(LpStatus::Infeasible, iterations);
        }
        // Drive zero-level artificials out of the basis.
        for i in 0..m {
            if !is_art[t.basis[i]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..cols {
                if is_art[j] {
                    continue;
                }
                let a = t.at(i, j).abs();
                if a > 1e-9 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                t.pivot(i, j);
            }
        }
        for j in 0..cols {
            t.blocked[j] = is_art[j];
        }
    }

    let mut phase2 = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        let c = prog.objective[j];
        for &(col, s) in &map.terms {
            phase2[col] += c * s;
        }
    }
    t.set_cost(&phase2);
    match t.optimize(&mut budget, &mut iterations) {
        LpStatus::Optimal => {}
        other => return fail(other, iterations),
    }

    let mut y = vec![0.0; cols];
    for i in 0..m {
        y[t.basis[i]] = t.rhs[i].max(0.0);
    }
    let x = maps
        .iter()
        .zip(&prog.bounds)
        .map(|(map, &(lo, hi))| {
            let v = map.offset + map.terms.iter().map(|&(col, s)| s * y[col]).sum::<f64>();
            v.clamp(lo, hi)
        })
        .collect();
    LpResult {
        status: LpStatus::Optimal,
        x,
        iterations,
    }
}
