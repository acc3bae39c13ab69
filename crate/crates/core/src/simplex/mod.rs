//! Dense two-phase primal simplex.
//!
//! [`solve`] runs in `f64` with a `1e-10` pivot tolerance; [`solve_exact`]
//! runs the identical algorithm over arbitrary-precision rationals and serves
//! as a ground truth in tests. Both use Bland's rule throughout, so they
//! terminate on degenerate problems and are deterministic.

mod field;
mod tableau;

use num_rational::BigRational;

pub use field::PIVOT_TOLERANCE;

use crate::error::{Error, Result};
use field::Field;

/// Pivot budget; Bland's rule can be slow but always terminates in exact
/// arithmetic, so hitting this means numerical trouble.
pub const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Self::Le => Self::Ge,
            Self::Ge => Self::Le,
            Self::Eq => Self::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c'x` subject to linear rows and `lower <= x <= upper`.
///
/// Lower bounds must be finite; upper bounds may be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
}

impl LpProblem {
    /// `num_vars` variables with zero cost, bounds `[0, inf)` and no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[Option<f64>] {
        &self.upper
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) -> &mut Self {
        self.objective[var] = cost;
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: Option<f64>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn add_constraint(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self
    }

    /// Adds a row from sparse `(variable, coefficient)` pairs.
    pub fn add_sparse_constraint(
        &mut self,
        terms: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> &mut Self {
        let mut coefficients = vec![0.0; self.num_vars()];
        for (j, a) in terms {
            coefficients[j] += a;
        }
        self.add_constraint(coefficients, relation, rhs)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::MalformedProblem(format!(
                "bounds have {}/{} entries for {n} variables",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedProblem(format!("objective[{j}] is not finite")));
        }
        if let Some(j) = self.lower.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedProblem(format!("lower bound {j} is not finite")));
        }
        if let Some(j) = self.upper.iter().position(|v| v.is_some_and(|u| !u.is_finite())) {
            return Err(Error::MalformedProblem(format!("upper bound {j} is not finite")));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i} has {} coefficients for {n} variables",
                    c.coefficients.len()
                )));
            }
            if !c.rhs.is_finite() || c.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i} has non-finite entries"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; empty unless optimal.
    pub primal: Vec<f64>,
    /// Multiplier per constraint (`>= 0` for `Ge`, `<= 0` for `Le` rows).
    pub duals: Vec<f64>,
    /// Multiplier per finite upper bound (`<= 0`), zero elsewhere.
    pub upper_duals: Vec<f64>,
    /// `c - A'y - upper_duals`, the multipliers of the lower bounds.
    pub reduced_costs: Vec<f64>,
    /// `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// Dual objective `b'y + u'upper_duals + l'reduced_costs`.
    pub dual_objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}

/// Solves in `f64`.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let outcome = tableau::solve::<f64>(problem, MAX_PIVOTS)?;
    Ok(finish(problem, outcome))
}

/// Solves over exact rationals; every `f64` input converts exactly.
pub fn solve_exact(problem: &LpProblem) -> Result<LpSolution> {
    let outcome = tableau::solve::<BigRational>(problem, MAX_PIVOTS)?;
    Ok(finish(problem, outcome))
}

/// Objective value of `solve_exact` as an exact rational, for tests that need
/// equality rather than a tolerance.
pub fn solve_exact_objective(problem: &LpProblem) -> Result<Option<BigRational>> {
    let outcome = tableau::solve::<BigRational>(problem, MAX_PIVOTS)?;
    if outcome.status != LpStatus::Optimal {
        return Ok(None);
    }
    let mut total = <BigRational as Field>::zero();
    for (c, x) in problem.objective.iter().zip(&outcome.primal) {
        let c = <BigRational as Field>::from_f64(*c).expect("validated finite");
        total = total.add(&c.mul(x));
    }
    Ok(Some(total))
}

fn finish<F: Field>(problem: &LpProblem, outcome: tableau::Outcome<F>) -> LpSolution {
    let n = problem.num_vars();
    match outcome.status {
        LpStatus::Optimal => {}
        status => {
            return LpSolution {
                status,
                primal: Vec::new(),
                duals: Vec::new(),
                upper_duals: Vec::new(),
                reduced_costs: Vec::new(),
                objective: if status == LpStatus::Infeasible {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
                dual_objective: f64::NAN,
                pivots: outcome.pivots,
            }
        }
    }
    let conv = |v: f64| F::from_f64(v).expect("validated finite");

    let mut objective = F::zero();
    for (c, x) in problem.objective.iter().zip(&outcome.primal) {
        objective = objective.add(&conv(*c).mul(x));
    }

    let upper_duals: Vec<F> = outcome
        .upper_duals
        .iter()
        .map(|d| d.clone().unwrap_or_else(F::zero))
        .collect();
    let mut reduced: Vec<F> = problem.objective.iter().map(|&c| conv(c)).collect();
    for (c, y) in problem.constraints.iter().zip(&outcome.duals) {
        for (j, &a) in c.coefficients.iter().enumerate() {
            if a != 0.0 {
                reduced[j] = reduced[j].sub(&conv(a).mul(y));
            }
        }
    }
    for (r, mu) in reduced.iter_mut().zip(&upper_duals) {
        *r = r.sub(mu);
    }

    let mut dual_objective = F::zero();
    for (c, y) in problem.constraints.iter().zip(&outcome.duals) {
        dual_objective = dual_objective.add(&conv(c.rhs).mul(y));
    }
    for j in 0..n {
        if let Some(u) = problem.upper[j] {
            dual_objective = dual_objective.add(&conv(u).mul(&upper_duals[j]));
        }
        dual_objective = dual_objective.add(&conv(problem.lower[j]).mul(&reduced[j]));
    }

    let to_f64 = |v: &[F]| v.iter().map(Field::to_f64).collect::<Vec<_>>();
    LpSolution {
        status: LpStatus::Optimal,
        primal: to_f64(&outcome.primal),
        duals: to_f64(&outcome.duals),
        upper_duals: to_f64(&upper_duals),
        reduced_costs: to_f64(&reduced),
        objective: objective.to_f64(),
        dual_objective: dual_objective.to_f64(),
        pivots: outcome.pivots,
    }
}

/// Optimality certificate residuals of a solution, measured against the
/// original (unshifted, unnormalized) problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub duality_gap: f64,
    pub complementary_slackness: f64,
}

impl Certificate {
    pub fn holds(&self, tolerance: f64, objective: f64) -> bool {
        self.primal_infeasibility <= tolerance
            && self.dual_infeasibility <= tolerance
            && self.complementary_slackness <= tolerance
            && self.duality_gap <= 1e-8 * (1.0 + objective.abs())
    }
}

/// Recomputes primal feasibility, dual sign conditions, the duality gap and
/// complementary slackness of an optimal `solution` from scratch.
pub fn certificate(problem: &LpProblem, solution: &LpSolution) -> Certificate {
    let x = &solution.primal;
    let mut primal_inf: f64 = 0.0;
    let mut dual_inf: f64 = 0.0;
    let mut slack: f64 = 0.0;
    let mut primal_obj = 0.0;
    let mut dual_obj = 0.0;
    for (c, xj) in problem.objective.iter().zip(x) {
        primal_obj += c * xj;
    }
    let mut reduced = problem.objective.clone();
    for (c, &y) in problem.constraints.iter().zip(&solution.duals) {
        let lhs: f64 = c.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
        let violation = match c.relation {
            Relation::Le => (lhs - c.rhs).max(0.0),
            Relation::Ge => (c.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - c.rhs).abs(),
        };
        primal_inf = primal_inf.max(violation);
        let sign_violation = match c.relation {
            Relation::Le => y.max(0.0),
            Relation::Ge => (-y).max(0.0),
            Relation::Eq => 0.0,
        };
        dual_inf = dual_inf.max(sign_violation);
        slack = slack.max((y * (lhs - c.rhs)).abs());
        dual_obj += y * c.rhs;
        for (r, a) in reduced.iter_mut().zip(&c.coefficients) {
            *r -= a * y;
        }
    }
    for j in 0..problem.num_vars() {
        let lo = problem.lower[j];
        primal_inf = primal_inf.max((lo - x[j]).max(0.0));
        let mu = solution.upper_duals.get(j).copied().unwrap_or(0.0);
        if let Some(u) = problem.upper[j] {
            primal_inf = primal_inf.max((x[j] - u).max(0.0));
            dual_inf = dual_inf.max(mu.max(0.0));
            slack = slack.max((mu * (x[j] - u)).abs());
            dual_obj += mu * u;
        }
        let r = reduced[j] - mu;
        dual_inf = dual_inf.max((-r).max(0.0));
        slack = slack.max((r * (x[j] - lo)).abs());
        dual_obj += r * lo;
    }
    Certificate {
        primal_infeasibility: primal_inf,
        dual_infeasibility: dual_inf,
        duality_gap: (primal_obj - dual_obj).abs(),
        complementary_slackness: slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(objective: f64) -> LpProblem {
        let mut p = LpProblem::new(1);
        p.set_cost(0, objective);
        p
    }

    #[test]
    fn bounded_maximization() {
        let mut p = single(-1.0);
        p.add_constraint(vec![1.0], Relation::Le, 1.0);
        for sol in [solve(&p).unwrap(), solve_exact(&p).unwrap()] {
            assert_eq!(sol.status, LpStatus::Optimal);
            assert_eq!(sol.primal, vec![1.0]);
            assert_eq!(sol.objective, -1.0);
            assert_eq!(sol.duals, vec![-1.0]);
            assert!(certificate(&p, &sol).holds(1e-9, sol.objective));
        }
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut p = single(0.0);
        p.add_constraint(vec![1.0], Relation::Ge, 1.0);
        p.add_constraint(vec![1.0], Relation::Le, 0.0);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
        assert_eq!(solve_exact(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let p = single(-1.0);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
        assert_eq!(solve_exact(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn dimension_mismatch_is_malformed() {
        let mut p = LpProblem::new(2);
        p.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve(&p), Err(Error::MalformedProblem(_))));
        let mut p = LpProblem::new(1);
        p.set_cost(0, f64::NAN);
        assert!(matches!(solve(&p), Err(Error::MalformedProblem(_))));
    }

    #[test]
    fn crossed_bounds_are_infeasible() {
        let mut p = single(1.0);
        p.set_bounds(0, 2.0, Some(1.0));
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn shifted_bounds_and_equalities() {
        // min x + 2y  s.t. x + y = 3, x in [1, 2], y in [0.5, inf)
        let mut p = LpProblem::new(2);
        p.set_objective(vec![1.0, 2.0]);
        p.set_bounds(0, 1.0, Some(2.0));
        p.set_bounds(1, 0.5, None);
        p.add_constraint(vec![1.0, 1.0], Relation::Eq, 3.0);
        for sol in [solve(&p).unwrap(), solve_exact(&p).unwrap()] {
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!((sol.primal[0] - 2.0).abs() < 1e-12);
            assert!((sol.primal[1] - 1.0).abs() < 1e-12);
            assert!((sol.objective - 4.0).abs() < 1e-12);
            let cert = certificate(&p, &sol);
            assert!(cert.holds(1e-9, sol.objective), "{cert:?}");
        }
    }

    #[test]
    fn degenerate_redundant_equalities_terminate() {
        // x1 + x2 + x3 = 1 stated three times, plus a scaled copy.
        let mut p = LpProblem::new(3);
        p.set_objective(vec![-1.0, -1.0, 0.0]);
        for scale in [1.0, 1.0, 2.0] {
            p.add_constraint(vec![scale; 3], Relation::Eq, scale);
        }
        p.add_constraint(vec![1.0, -1.0, 0.0], Relation::Le, 0.0);
        p.add_constraint(vec![-1.0, 1.0, 0.0], Relation::Le, 0.0);
        let exact = solve_exact(&p).unwrap();
        assert_eq!(exact.status, LpStatus::Optimal);
        assert_eq!(exact.objective, -1.0);
        let approx = solve(&p).unwrap();
        assert_eq!(approx.status, LpStatus::Optimal);
        assert!((approx.objective + 1.0).abs() < 1e-9);
        assert!(certificate(&p, &approx).holds(1e-9, approx.objective));
    }

    #[test]
    fn deterministic_output() {
        let mut p = LpProblem::new(3);
        p.set_objective(vec![-3.0, -2.0, -4.0]);
        p.add_constraint(vec![1.0, 1.0, 2.0], Relation::Le, 4.0);
        p.add_constraint(vec![2.0, 0.0, 3.0], Relation::Le, 5.0);
        p.add_constraint(vec![2.0, 1.0, 3.0], Relation::Le, 7.0);
        assert_eq!(solve(&p).unwrap(), solve(&p).unwrap());
    }

    #[test]
    fn exact_objective_is_rational() {
        // min z s.t. z >= x, z >= y, x + y >= 1 -> 1/2
        let mut p = LpProblem::new(3);
        p.set_cost(2, 1.0);
        p.add_constraint(vec![1.0, 0.0, -1.0], Relation::Le, 0.0);
        p.add_constraint(vec![0.0, 1.0, -1.0], Relation::Le, 0.0);
        p.add_constraint(vec![1.0, 1.0, 0.0], Relation::Ge, 1.0);
        let v = solve_exact_objective(&p).unwrap().unwrap();
        assert_eq!(v, BigRational::new(1.into(), 2.into()));
    }
}
