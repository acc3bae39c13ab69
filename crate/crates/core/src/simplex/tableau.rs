//! Dense two-phase tableau simplex, generic over the arithmetic.
//!
//! The bounded problem `l <= x <= u` is shifted to `x' = x - l >= 0`; finite
//! upper bounds become ordinary `<=` rows appended after the user rows.

use super::field::Field;
use super::{LpProblem, LpStatus, Relation};
use crate::error::{Error, Result};

/// Consecutive degenerate pivots before switching to Bland's leaving rule.
const BLAND_AFTER_DEGENERATE: usize = 50;

pub(crate) struct Outcome<F> {
    pub status: LpStatus,
    pub primal: Vec<F>,
    /// One multiplier per user constraint.
    pub duals: Vec<F>,
    /// Multiplier of each finite upper bound (`None` when unbounded above).
    pub upper_duals: Vec<Option<F>>,
    pub pivots: usize,
}

impl<F> Outcome<F> {
    fn without_solution(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            primal: Vec::new(),
            duals: Vec::new(),
            upper_duals: Vec::new(),
            pivots,
        }
    }
}

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    /// Reduced costs; the last entry holds minus the current objective.
    objective: Vec<F>,
    basis: Vec<usize>,
    artificial_start: usize,
    pivots: usize,
    max_pivots: usize,
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

impl<F: Field> Tableau<F> {
    fn width(&self) -> usize {
        self.objective.len() - 1
    }

    fn rhs(&self) -> usize {
        self.width()
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.artificial_start
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.max_pivots {
            return Err(Error::SolverStalled(self.max_pivots));
        }
        let inv = F::one().div(&self.rows[row][col]);
        for v in self.rows[row].iter_mut() {
            *v = v.mul(&inv).clean();
        }
        self.rows[row][col] = F::one();
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col] == F::zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if *p != F::zero() {
                    *v = v.sub(&factor.mul(p)).clean();
                }
            }
            r[col] = F::zero();
        }
        let factor = self.objective[col].clone();
        if factor != F::zero() {
            for (v, p) in self.objective.iter_mut().zip(&pivot_row) {
                if *p != F::zero() {
                    *v = v.sub(&factor.mul(p)).clean();
                }
            }
            self.objective[col] = F::zero();
        }
        self.basis[row] = col;
        Ok(())
    }

    /// Lowest-index improving column, then minimum ratio with ties broken by
    /// pivot size.
    fn run(&mut self, allow_artificial: bool) -> Result<LoopEnd> {
        let rhs = self.rhs();
        let mut degenerate_run = 0;
        loop {
            let entering = (0..self.width())
                .find(|&j| (allow_artificial || !self.is_artificial(j)) && self.objective[j].is_negative());
            let Some(col) = entering else {
                return Ok(LoopEnd::Optimal);
            };
            let ratios: Vec<(usize, F)> = self
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col].is_positive())
                .map(|(i, r)| (i, r[rhs].div(&r[col])))
                .collect();
            let Some(min) = ratios
                .iter()
                .map(|(_, q)| q)
                .min_by(|a, b| a.partial_cmp(b).expect("finite ratios"))
                .cloned()
            else {
                return Ok(LoopEnd::Unbounded);
            };
            degenerate_run = if min.is_zero() { degenerate_run + 1 } else { 0 };
            let ties = ratios.iter().filter(|(_, q)| q.approx_le(&min));
            // Largest pivot among ties keeps tiny elements out of the basis;
            // long degenerate runs fall back to Bland's leaving rule.
            let row = if degenerate_run > BLAND_AFTER_DEGENERATE {
                ties.min_by_key(|(i, _)| self.basis[*i]).map(|(i, _)| *i)
            } else {
                ties.max_by(|(a, _), (b, _)| {
                    self.rows[*a][col]
                        .partial_cmp(&self.rows[*b][col])
                        .expect("finite pivots")
                        .then(self.basis[*b].cmp(&self.basis[*a]))
                })
                .map(|(i, _)| *i)
            }
            .expect("minimum exists");
            self.pivot(row, col)?;
        }
    }

    /// Sets reduced costs for `costs` (indexed by column) under the current basis.
    fn price(&mut self, costs: &[F]) {
        let rhs = self.rhs();
        let mut objective: Vec<F> = costs.to_vec();
        objective.push(F::zero());
        for (r, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if *cb == F::zero() {
                continue;
            }
            for (j, v) in objective.iter_mut().enumerate() {
                if r[j] != F::zero() {
                    *v = v.sub(&cb.mul(&r[j]));
                }
            }
        }
        // r[rhs] accumulates -sum c_B x_B
        debug_assert_eq!(objective.len(), rhs + 1);
        self.objective = objective;
    }
}

pub(crate) fn solve<F: Field>(problem: &LpProblem, max_pivots: usize) -> Result<Outcome<F>> {
    problem.validate()?;
    let n = problem.num_vars();
    let conv = |v: f64| F::from_f64(v).ok_or_else(|| Error::MalformedProblem(format!("non-finite value {v}")));
    let lower: Vec<F> = problem.lower.iter().map(|&v| conv(v)).collect::<Result<_>>()?;
    let upper: Vec<Option<F>> = problem
        .upper
        .iter()
        .map(|u| u.map(conv).transpose())
        .collect::<Result<_>>()?;
    let objective: Vec<F> = problem.objective.iter().map(|&v| conv(v)).collect::<Result<_>>()?;

    if lower.iter().zip(&upper).any(|(l, u)| u.as_ref().is_some_and(|u| u < l)) {
        return Ok(Outcome::without_solution(LpStatus::Infeasible, 0));
    }

    // Internal rows: (coefficients over x', relation, rhs, sign applied).
    let mut rows: Vec<(Vec<F>, Relation, F)> = Vec::new();
    for c in &problem.constraints {
        let coeffs: Vec<F> = c.coefficients.iter().map(|&v| conv(v)).collect::<Result<_>>()?;
        let mut rhs = conv(c.rhs)?;
        for (a, l) in coeffs.iter().zip(&lower) {
            if *a != F::zero() && *l != F::zero() {
                rhs = rhs.sub(&a.mul(l));
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    let mut upper_row = vec![None; n];
    for (j, u) in upper.iter().enumerate() {
        if let Some(u) = u {
            let mut coeffs = vec![F::zero(); n];
            coeffs[j] = F::one();
            upper_row[j] = Some(rows.len());
            rows.push((coeffs, Relation::Le, u.sub(&lower[j])));
        }
    }

    let m = rows.len();
    let mut signs = vec![false; m];
    for (i, (coeffs, rel, rhs)) in rows.iter_mut().enumerate() {
        if rhs.is_negative() {
            for v in coeffs.iter_mut() {
                *v = v.neg();
            }
            *rhs = rhs.neg();
            *rel = rel.flipped();
            signs[i] = true;
        }
        if *rhs < F::zero() {
            // numerically-zero negative rhs
            *rhs = F::zero();
        }
    }

    let num_slack = rows.iter().filter(|(_, rel, _)| !matches!(rel, Relation::Eq)).count();
    let num_artificial = rows.iter().filter(|(_, rel, _)| !matches!(rel, Relation::Le)).count();
    let artificial_start = n + num_slack;
    let width = artificial_start + num_artificial;

    let mut tab_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut identity_col = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n, artificial_start);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(width + 1, F::zero());
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = F::one();
                basis.push(next_slack);
                identity_col.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = F::one().neg();
                row[next_art] = F::one();
                basis.push(next_art);
                identity_col.push(next_art);
                next_slack += 1;
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = F::one();
                basis.push(next_art);
                identity_col.push(next_art);
                next_art += 1;
            }
        }
        tab_rows.push(row);
    }

    let mut tab = Tableau {
        rows: tab_rows,
        objective: vec![F::zero(); width + 1],
        basis,
        artificial_start,
        pivots: 0,
        max_pivots,
    };

    if num_artificial > 0 {
        let costs: Vec<F> = (0..width)
            .map(|j| if j >= artificial_start { F::one() } else { F::zero() })
            .collect();
        tab.price(&costs);
        tab.run(true)?;
        let infeasibility = tab.objective[width].neg();
        let scale = tab.rows.iter().map(|r| r[width].to_f64().abs()).fold(1.0, f64::max);
        if infeasibility.exceeds_feasibility_tolerance(scale) {
            return Ok(Outcome::without_solution(LpStatus::Infeasible, tab.pivots));
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if tab.is_artificial(tab.basis[r]) {
                if let Some(col) = (0..artificial_start).find(|&j| !tab.rows[r][j].is_zero()) {
                    tab.pivot(r, col)?;
                }
            }
        }
    }

    let mut costs = vec![F::zero(); width];
    costs[..n].clone_from_slice(&objective);
    tab.price(&costs);
    if let LoopEnd::Unbounded = tab.run(false)? {
        return Ok(Outcome::without_solution(LpStatus::Unbounded, tab.pivots));
    }

    let mut primal = lower.clone();
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            primal[b] = lower[b].add(&tab.rows[r][width]);
        }
    }
    let row_duals: Vec<F> = identity_col
        .iter()
        .zip(&signs)
        .map(|(&col, &flipped)| {
            let d = tab.objective[col].neg();
            if flipped {
                d.neg()
            } else {
                d
            }
        })
        .collect();
    let num_user = problem.constraints.len();
    let upper_duals = upper_row.iter().map(|r| r.map(|i| row_duals[i].clone())).collect();
    Ok(Outcome {
        status: LpStatus::Optimal,
        primal,
        duals: row_duals[..num_user].to_vec(),
        upper_duals,
        pivots: tab.pivots,
    })
}
