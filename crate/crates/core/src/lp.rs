//! Dense two-phase simplex for the small linear programs that arise in
//! obedience and best-response computations (tens of variables at most).
//!
//! Pivoting uses Dantzig pricing with a Harris ratio test and falls back to
//! Bland's rule on degenerate stalls, so it terminates without perturbation.
//! Every returned point is checked against the original constraints.

use serde::Serialize;

/// Reduced costs above `-COST_EPS` count as optimal.
const COST_EPS: f64 = 1e-10;
/// Entries at or below `PIVOT_EPS` are rounding noise and never pivot.
const PIVOT_EPS: f64 = 1e-9;
const RATIO_EPS: f64 = 1e-11;
/// Primal infeasibility tolerated by the ratio test and the final check.
const FEAS_EPS: f64 = 1e-9;
const DEGENERATE_LIMIT: usize = 50;
const MAX_ITERATIONS: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The final point violates a constraint beyond rounding tolerance.
    Numerical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Bound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug)]
struct Constraint {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// `max / min c·x` subject to linear constraints; variables are nonnegative
/// unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    minimize: bool,
    bounds: Vec<Bound>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            minimize: false,
            bounds: vec![Bound::NonNegative; n],
            constraints: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram {
            minimize: true,
            ..LinearProgram::maximize(objective)
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = Bound::Free;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> Result<LpSolution, LpStatus> {
        let mut tableau = Tableau::build(self);
        tableau.phase_one()?;
        tableau.phase_two(self)?;
        let x = tableau.primal(self);
        if !self.satisfied_by(&x) {
            return Err(LpStatus::Numerical);
        }
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective })
    }
}

impl LinearProgram {
    fn satisfied_by(&self, x: &[f64]) -> bool {
        let bounds_ok = self.bounds.iter().zip(x).all(|(b, &v)| *b == Bound::Free || v >= -1e-7);
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                let scale: f64 = 1.0 + c.rhs.abs() + c.coeffs.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
                let gap = lhs - c.rhs;
                let tol = 1e-7 * scale;
                match c.relation {
                    Relation::Le => gap <= tol,
                    Relation::Ge => gap >= -tol,
                    Relation::Eq => gap.abs() <= tol,
                }
            })
    }
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the
    /// right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Structural columns (free variables take two).
    n_struct: usize,
    /// Column index of the first artificial; artificials run to the end.
    first_artificial: usize,
    /// `column_of[j]` = (positive column, optional negative column) of var j.
    column_of: Vec<(usize, Option<usize>)>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut column_of = Vec::with_capacity(lp.num_vars());
        let mut n_struct = 0;
        for b in &lp.bounds {
            match b {
                Bound::NonNegative => {
                    column_of.push((n_struct, None));
                    n_struct += 1;
                }
                Bound::Free => {
                    column_of.push((n_struct, Some(n_struct + 1)));
                    n_struct += 2;
                }
            }
        }
        let m = lp.constraints.len();
        // normalise to nonnegative right-hand sides
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                let mut coeffs = vec![0.0; n_struct];
                for (j, &a) in c.coeffs.iter().enumerate() {
                    let (pos, neg) = column_of[j];
                    coeffs[pos] = a;
                    if let Some(neg) = neg {
                        coeffs[neg] = -a;
                    }
                }
                if c.rhs < 0.0 {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (coeffs.iter().map(|a| -a).collect(), flipped, -c.rhs)
                } else {
                    (coeffs, c.relation, c.rhs)
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n_struct + n_slack;
        let width = first_artificial + n_art + 1;
        let mut t = vec![vec![0.0; width]; m + 1];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (n_struct, first_artificial);
        for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            t[i][..n_struct].copy_from_slice(&coeffs);
            t[i][width - 1] = rhs;
            match rel {
                Relation::Le => {
                    t[i][slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    t[i][slack] = -1.0;
                    slack += 1;
                    t[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    t[i][art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            t,
            basis,
            n_struct,
            first_artificial,
            column_of,
        }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn rhs(&self) -> usize {
        self.t[0].len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.t[0].len();
        let p = self.t[row][col];
        for j in 0..width {
            self.t[row][j] /= p;
        }
        for i in 0..self.t.len() {
            if i == row {
                continue;
            }
            let f = self.t[i][col];
            if f != 0.0 {
                for j in 0..width {
                    let delta = f * self.t[row][j];
                    self.t[i][j] -= delta;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Sets the objective row to reduced costs `c_B B⁻¹ A - c` for a
    /// maximization with cost vector `cost` over tableau columns.
    fn price(&mut self, cost: &[f64]) {
        let m = self.m();
        let width = self.t[0].len();
        for j in 0..width {
            let mut r: f64 = (0..m).map(|i| cost[self.basis[i]] * self.t[i][j]).sum();
            if j < cost.len() {
                r -= cost[j];
            }
            self.t[m][j] = r;
        }
    }

    /// Runs simplex iterations on the current objective row. Columns at or
    /// beyond `limit` never enter.
    ///
    /// Pricing is Dantzig's rule with a Harris ratio test, which keeps pivots
    /// large. After a run of degenerate pivots the method switches to Bland's
    /// rule for the rest of the phase, which guarantees termination.
    fn iterate(&mut self, limit: usize) -> Result<(), LpStatus> {
        let m = self.m();
        let rhs = self.rhs();
        let mut degenerate_run = 0;
        let mut bland = false;
        for _ in 0..MAX_ITERATIONS {
            let entering = if bland {
                (0..limit).find(|&j| self.t[m][j] < -COST_EPS)
            } else {
                (0..limit)
                    .filter(|&j| self.t[m][j] < -COST_EPS)
                    .min_by(|&a, &b| self.t[m][a].total_cmp(&self.t[m][b]))
            };
            let Some(col) = entering else {
                return Ok(());
            };
            let candidates = (0..m).filter(|&i| self.t[i][col] > PIVOT_EPS);
            let bound = candidates
                .clone()
                .map(|i| (self.t[i][rhs].max(0.0) + FEAS_EPS) / self.t[i][col])
                .fold(f64::INFINITY, f64::min);
            if bound == f64::INFINITY {
                return Err(LpStatus::Unbounded);
            }
            let eligible = candidates.filter(|&i| self.t[i][rhs].max(0.0) / self.t[i][col] <= bound);
            let row = if bland {
                let min_ratio = eligible
                    .clone()
                    .map(|i| self.t[i][rhs].max(0.0) / self.t[i][col])
                    .fold(f64::INFINITY, f64::min);
                eligible
                    .filter(|&i| self.t[i][rhs].max(0.0) / self.t[i][col] <= min_ratio + RATIO_EPS)
                    .min_by_key(|&i| self.basis[i])
            } else {
                eligible.max_by(|&a, &b| self.t[a][col].total_cmp(&self.t[b][col]))
            }
            .expect("the row attaining the bound is eligible");
            if self.t[row][rhs] / self.t[row][col] <= RATIO_EPS {
                degenerate_run += 1;
                bland |= degenerate_run > DEGENERATE_LIMIT;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
            for r in &mut self.t[..m] {
                if r[rhs] < 0.0 && r[rhs] > -FEAS_EPS {
                    r[rhs] = 0.0;
                }
            }
        }
        Err(LpStatus::IterationLimit)
    }

    fn phase_one(&mut self) -> Result<(), LpStatus> {
        let width = self.rhs();
        if self.first_artificial == width {
            return Ok(());
        }
        let mut cost = vec![0.0; width];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = -1.0;
        }
        self.price(&cost);
        // the phase-one objective is bounded by zero, so an unbounded ray can
        // only be rounding noise; the residual check below decides
        match self.iterate(width) {
            Ok(()) | Err(LpStatus::Unbounded) => {}
            Err(s) => return Err(s),
        }
        let m = self.m();
        let scale = 1.0 + self.t[..m].iter().map(|r| r[width].abs()).fold(0.0, f64::max);
        if self.t[m][width] < -1e-9 * scale {
            return Err(LpStatus::Infeasible);
        }
        // drive remaining zero-level artificials out of the basis
        for i in 0..m {
            if self.basis[i] >= self.first_artificial {
                if let Some(col) = (0..self.first_artificial).find(|&j| self.t[i][j].abs() > 1e-9) {
                    self.pivot(i, col);
                }
            }
        }
        Ok(())
    }

    fn phase_two(&mut self, lp: &LinearProgram) -> Result<(), LpStatus> {
        let width = self.rhs();
        let mut cost = vec![0.0; width];
        let sign = if lp.minimize { -1.0 } else { 1.0 };
        for (j, &c) in lp.objective.iter().enumerate() {
            let (pos, neg) = self.column_of[j];
            cost[pos] = sign * c;
            if let Some(neg) = neg {
                cost[neg] = -sign * c;
            }
        }
        self.price(&cost);
        self.iterate(self.first_artificial)
    }

    fn primal(&self, lp: &LinearProgram) -> Vec<f64> {
        let rhs = self.rhs();
        let mut cols = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                cols[b] = self.t[i][rhs];
            }
        }
        (0..lp.num_vars())
            .map(|j| {
                let (pos, neg) = self.column_of[j];
                cols[pos] - neg.map_or(0.0, |n| cols[n])
            })
            .collect()
    }
}
