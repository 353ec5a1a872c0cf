//! Dense two-phase primal simplex.
//!
//! Problems are maximizations over variables that are either non-negative or
//! free; free variables are split into a difference of two non-negative
//! columns. Rows are normalized to a non-negative right-hand side, `<=` rows get
//! a slack, `>=` rows a surplus and an artificial, `=` rows an artificial.
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable among ratio ties), so the method terminates on
//! degenerate problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective . x` subject to `rows`, with per-variable `bounds`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<VarBound>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, bound: VarBound, objective: f64) -> usize {
        self.objective.push(objective);
        self.bounds.push(bound);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.len() != self.objective.len() {
            return Err(Error::MalformedLp(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                self.objective.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp("non-finite objective coefficient".into()));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::MalformedLp(format!("row {r} has non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.num_vars() || !a.is_finite() {
                    return Err(Error::MalformedLp(format!("row {r} has bad entry ({j}, {a})")));
                }
            }
        }
        Ok(())
    }

    /// Largest constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if *b == VarBound::NonNegative {
                worst = worst.max(-x[j]);
            }
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Primal values (empty unless optimal).
    pub values: Vec<f64>,
    pub max_residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Reduced-cost (optimality) tolerance.
    pub tolerance: f64,
    /// Smallest admissible pivot element. Kept well above `tolerance`: pivoting
    /// on near-zero entries amplifies round-off until spurious directions of
    /// unboundedness appear.
    pub pivot_tolerance: f64,
    /// Phase-one infeasibility threshold.
    pub feasibility: f64,
    /// Acceptable constraint violation of the returned point.
    pub residual: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            pivot_tolerance: 1e-7,
            feasibility: 1e-9,
            residual: 1e-7,
            max_iterations: 1_000_000,
        }
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(problem, SimplexOptions::default())
}

struct Tableau {
    rows: usize,
    width: usize, // columns plus rhs
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.data[pr * w + pc];
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.data[r * w + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
                if v.abs() < 1e-14 {
                    *v = 0.0;
                }
            }
            row[pc] = 0.0;
        }
        let factor = self.obj[pc];
        if factor != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.iterations += 1;
    }

    /// Runs Bland-rule pivots on the current objective row. Entries of `obj`
    /// are `z_j - c_j`; the phase is optimal when none is below `-tol` among
    /// `allowed` columns.
    fn run(&mut self, allowed: &[bool], opts: &SimplexOptions) -> Result<PhaseEnd> {
        loop {
            if self.iterations >= opts.max_iterations {
                return Err(Error::IterationLimit(self.iterations));
            }
            let Some(pc) = (0..self.width - 1).find(|&c| allowed[c] && self.obj[c] < -opts.tolerance)
            else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= opts.pivot_tolerance {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (!tie && ratio < best) || (tie && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, best))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(PhaseEnd::Unbounded),
                Some((pr, _)) => self.pivot(pr, pc),
            }
        }
    }

    fn drop_row(&mut self, r: usize) {
        let w = self.width;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

pub fn solve_lp_with(problem: &LpProblem, opts: SimplexOptions) -> Result<LpSolution> {
    problem.validate()?;

    // column layout: structural (split free vars), then one slack/surplus per
    // inequality row, then artificials
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(problem.num_vars());
    let mut ncols = 0;
    for b in &problem.bounds {
        match b {
            VarBound::NonNegative => {
                col_of.push((ncols, None));
                ncols += 1;
            }
            VarBound::Free => {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
    }

    let m = problem.rows.len();
    let mut senses = Vec::with_capacity(m);
    let mut signs = Vec::with_capacity(m);
    for row in &problem.rows {
        let flip = row.rhs < 0.0;
        let sense = match (row.sense, flip) {
            (Sense::Le, true) => Sense::Ge,
            (Sense::Ge, true) => Sense::Le,
            // zero-rhs >= rows become <= rows with a feasible slack
            (Sense::Ge, false) if row.rhs == 0.0 => Sense::Le,
            (s, _) => s,
        };
        let sign = if flip || (row.sense == Sense::Ge && row.rhs == 0.0) {
            -1.0
        } else {
            1.0
        };
        senses.push(sense);
        signs.push(sign);
    }
    let mut slack_col = vec![None; m];
    for r in 0..m {
        if senses[r] != Sense::Eq {
            slack_col[r] = Some(ncols);
            ncols += 1;
        }
    }
    let art_start = ncols;
    let mut art_col = vec![None; m];
    for r in 0..m {
        if senses[r] != Sense::Le {
            art_col[r] = Some(ncols);
            ncols += 1;
        }
    }
    let width = ncols + 1;

    let mut t = Tableau {
        rows: m,
        width,
        data: vec![0.0; m * width],
        obj: vec![0.0; width],
        basis: vec![0; m],
        iterations: 0,
    };
    for (r, row) in problem.rows.iter().enumerate() {
        let sign = signs[r];
        let base = r * width;
        for &(j, a) in &row.coeffs {
            let (pos, neg) = col_of[j];
            t.data[base + pos] += sign * a;
            if let Some(neg) = neg {
                t.data[base + neg] -= sign * a;
            }
        }
        t.data[base + width - 1] = sign * row.rhs;
        match senses[r] {
            Sense::Le => {
                let s = slack_col[r].unwrap();
                t.data[base + s] = 1.0;
                t.basis[r] = s;
            }
            Sense::Ge => {
                t.data[base + slack_col[r].unwrap()] = -1.0;
                let a = art_col[r].unwrap();
                t.data[base + a] = 1.0;
                t.basis[r] = a;
            }
            Sense::Eq => {
                let a = art_col[r].unwrap();
                t.data[base + a] = 1.0;
                t.basis[r] = a;
            }
        }
    }

    // phase one: maximize -sum(artificials)
    let is_art = |c: usize| c >= art_start && c < width - 1;
    if art_start < width - 1 {
        for c in art_start..width - 1 {
            t.obj[c] = 1.0;
        }
        for r in 0..t.rows {
            if is_art(t.basis[r]) {
                for c in 0..width {
                    t.obj[c] -= t.data[r * width + c];
                }
            }
        }
        let allowed = vec![true; width - 1];
        t.run(&allowed, &opts)?;
        let infeasibility = -t.obj[width - 1];
        let scale = problem
            .rows
            .iter()
            .map(|r| r.rhs.abs())
            .fold(1.0_f64, f64::max);
        if infeasibility > opts.feasibility * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                values: Vec::new(),
                max_residual: f64::NAN,
                iterations: t.iterations,
            });
        }
        // drive remaining artificials out of the basis or drop redundant rows
        let mut r = 0;
        while r < t.rows {
            if !is_art(t.basis[r]) {
                r += 1;
                continue;
            }
            let pc = (0..art_start)
                .filter(|&c| t.at(r, c).abs() > opts.pivot_tolerance)
                .fold(None, |best: Option<usize>, c| match best {
                    Some(b) if t.at(r, b).abs() >= t.at(r, c).abs() => Some(b),
                    _ => Some(c),
                });
            match pc {
                Some(pc) => {
                    t.pivot(r, pc);
                    r += 1;
                }
                None => t.drop_row(r),
            }
        }
    }

    // phase two
    t.obj = vec![0.0; width];
    for (j, &c) in problem.objective.iter().enumerate() {
        let (pos, neg) = col_of[j];
        t.obj[pos] = -c;
        if let Some(neg) = neg {
            t.obj[neg] = c;
        }
    }
    for r in 0..t.rows {
        let cb = -t.obj[t.basis[r]];
        if cb != 0.0 {
            for c in 0..width {
                t.obj[c] += cb * t.data[r * width + c];
            }
        }
    }
    let allowed: Vec<bool> = (0..width - 1).map(|c| !is_art(c)).collect();
    let end = t.run(&allowed, &opts)?;
    if let PhaseEnd::Unbounded = end {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective: f64::INFINITY,
            values: Vec::new(),
            max_residual: f64::NAN,
            iterations: t.iterations,
        });
    }

    let mut cols = vec![0.0; width - 1];
    for r in 0..t.rows {
        cols[t.basis[r]] = t.rhs(r).max(0.0);
    }
    let values: Vec<f64> = col_of
        .iter()
        .map(|&(pos, neg)| cols[pos] - neg.map_or(0.0, |n| cols[n]))
        .collect();
    let max_residual = problem.max_violation(&values);
    if max_residual > opts.residual {
        return Err(Error::ResidualCheckFailed(max_residual));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: problem.objective_value(&values),
        values,
        max_residual,
        iterations: t.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_bound() {
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::NonNegative, 1.0);
        p.add_row(vec![(x, 1.0)], Sense::Le, 1.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible() {
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::NonNegative, 1.0);
        p.add_row(vec![(x, 1.0)], Sense::Ge, 2.0);
        p.add_row(vec![(x, 1.0)], Sense::Le, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::NonNegative, 1.0);
        let y = p.add_var(VarBound::NonNegative, 0.0);
        p.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // max -|x - 3| style: max -t, t >= x - 3, t >= 3 - x, x free, x = 1 + y, y <= 1
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::Free, 0.0);
        let t = p.add_var(VarBound::NonNegative, -1.0);
        let y = p.add_var(VarBound::NonNegative, 0.0);
        p.add_row(vec![(t, 1.0), (x, -1.0)], Sense::Ge, -3.0);
        p.add_row(vec![(t, 1.0), (x, 1.0)], Sense::Ge, 3.0);
        p.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0);
        p.add_row(vec![(y, 1.0)], Sense::Le, 1.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-9, "{}", s.objective);
        assert!((s.values[x] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_free_solution() {
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::Free, -1.0);
        p.add_row(vec![(x, 1.0)], Sense::Ge, -5.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.values[x] + 5.0).abs() < 1e-12);
        assert!((s.objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::NonNegative, 1.0);
        let y = p.add_var(VarBound::NonNegative, 2.0);
        p.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 1.0);
        p.add_row(vec![(x, 2.0), (y, 2.0)], Sense::Eq, 2.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed() {
        let mut p = LpProblem::new();
        p.add_var(VarBound::NonNegative, 1.0);
        p.add_row(vec![(3, 1.0)], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&p), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn dump_format() {
        let mut p = LpProblem::new();
        let x = p.add_var(VarBound::Free, 1.0);
        p.add_row(vec![(x, 2.0)], Sense::Le, 1.0);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"objective":[1.0],"rows":[{"coeffs":[[0,2.0]],"sense":"<=","rhs":1.0}],"bounds":["free"]}"#
        );
    }
}
