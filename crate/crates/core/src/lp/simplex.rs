//! Exact-rational simplex.
//!
//! The programs solved here have few variables (`n + 1`) and many
//! inequality rows that arrive over time. The solver therefore runs a
//! revised primal simplex on the *dual* problem: primal rows become dual
//! columns, so adding a cut only appends a column and the current basis stays
//! feasible. Dual optimality is primal feasibility, and the primal point is
//! read off the simplex multipliers.
//!
//! Pivoting uses Bland's smallest-index rule; with exact arithmetic it cannot
//! cycle.

use num_traits::{One, Signed, Zero};

use crate::game::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `Σ coeffs · y  (≤ | ≥ | =)  rhs`, coefficients given sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearRow {
    pub fn new(coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        LinearRow {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, y: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (i, c)| acc + c * &y[*i])
    }

    pub fn holds(&self, y: &[Rational]) -> bool {
        let lhs = self.lhs(y);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the caller's sense (zero unless optimal).
    pub objective: Rational,
    /// Primal point (empty unless optimal).
    pub primal: Vec<Rational>,
    /// One multiplier per row, non-negative for `≤`/`≥` rows, with
    /// `Σ_{≤,=} d_r a_r − Σ_{≥} d_r a_r = c` for maximization and
    /// `Σ_{≥} d_r a_r − Σ_{≤} d_r a_r (+ Σ_= d_r a_r) = c` for minimization.
    pub duals: Vec<Rational>,
}

/// Coefficient with fast paths for ±1.
#[derive(Debug, Clone)]
enum Coef {
    One,
    MinusOne,
    Other(Rational),
}

impl Coef {
    fn from(r: Rational) -> Self {
        if r.is_one() {
            Coef::One
        } else if (-&r).is_one() {
            Coef::MinusOne
        } else {
            Coef::Other(r)
        }
    }

    fn add_times(&self, acc: &mut Rational, v: &Rational) {
        match self {
            Coef::One => *acc += v,
            Coef::MinusOne => *acc -= v,
            Coef::Other(c) => *acc += c * v,
        }
    }
}

#[derive(Debug, Clone)]
struct Column {
    row: usize,
    /// `+1` or `−1`: the column is `sign · a_row` (before the dual-row flips).
    sign: i8,
    entries: Vec<(usize, Coef)>,
    cost: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basic {
    Art(usize),
    Col(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Fresh,
    Dirty,
    Optimal,
    /// Dual unbounded: the primal is infeasible.
    PrimalInfeasible,
    /// Dual infeasible: the primal is unbounded or infeasible.
    DualInfeasible,
}

/// Incremental exact LP over free variables `y ∈ ℚ^d`.
#[derive(Debug, Clone)]
pub struct ExactLp {
    vars: usize,
    sense: Sense,
    /// Objective in maximization form.
    c: Vec<Rational>,
    rows: Vec<LinearRow>,
    cols: Vec<Column>,
    /// `flip[i]`: dual row `i` is negated so its right-hand side is ≥ 0.
    flip: Vec<bool>,
    basis: Vec<Basic>,
    binv: Vec<Vec<Rational>>,
    beta: Vec<Rational>,
    state: State,
    pivots: usize,
}

impl ExactLp {
    pub fn new(vars: usize, objective: &[Rational], sense: Sense) -> Self {
        assert_eq!(objective.len(), vars, "objective length");
        let c: Vec<Rational> = match sense {
            Sense::Maximize => objective.to_vec(),
            Sense::Minimize => objective.iter().map(|v| -v).collect(),
        };
        let flip = c.iter().map(|v| v.is_negative()).collect();
        ExactLp {
            vars,
            sense,
            c,
            rows: Vec::new(),
            cols: Vec::new(),
            flip,
            basis: Vec::new(),
            binv: Vec::new(),
            beta: Vec::new(),
            state: State::Fresh,
            pivots: 0,
        }
    }

    pub fn rows(&self) -> &[LinearRow] {
        &self.rows
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Appends a row; returns its index.
    pub fn add_row(&mut self, row: LinearRow) -> usize {
        for (i, _) in &row.coeffs {
            assert!(*i < self.vars, "coefficient index out of range");
        }
        let r = self.rows.len();
        match row.relation {
            Relation::Le => self.push_column(r, 1, &row),
            Relation::Ge => self.push_column(r, -1, &row),
            Relation::Eq => {
                self.push_column(r, 1, &row);
                self.push_column(r, -1, &row);
            }
        }
        self.rows.push(row);
        self.state = match self.state {
            State::Optimal => State::Dirty,
            State::DualInfeasible => State::Fresh,
            s => s,
        };
        r
    }

    fn push_column(&mut self, row: usize, sign: i8, data: &LinearRow) {
        let entries = data
            .coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let flipped = (sign < 0) != self.flip[*i];
                (*i, Coef::from(if flipped { -c } else { c.clone() }))
            })
            .collect();
        let cost = if sign < 0 { -&data.rhs } else { data.rhs.clone() };
        self.cols.push(Column {
            row,
            sign,
            entries,
            cost,
        });
    }

    fn rhs(&self) -> Vec<Rational> {
        self.c.iter().map(|v| v.abs()).collect()
    }

    fn basic_cost(&self, b: Basic, phase1: bool) -> Rational {
        match (b, phase1) {
            (Basic::Art(_), true) => Rational::one(),
            (Basic::Art(_), false) => Rational::zero(),
            (Basic::Col(_), true) => Rational::zero(),
            (Basic::Col(j), false) => self.cols[j].cost.clone(),
        }
    }

    fn multipliers(&self, phase1: bool) -> Vec<Rational> {
        let mut pi = vec![Rational::zero(); self.vars];
        for (r, &b) in self.basis.iter().enumerate() {
            let cost = self.basic_cost(b, phase1);
            if cost.is_zero() {
                continue;
            }
            for (p, v) in pi.iter_mut().zip(&self.binv[r]) {
                if !v.is_zero() {
                    *p += &cost * v;
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[Rational], phase1: bool) -> Rational {
        let col = &self.cols[j];
        let mut rc = if phase1 { Rational::zero() } else { col.cost.clone() };
        for (i, c) in &col.entries {
            if !pi[*i].is_zero() {
                c.add_times(&mut rc, &-&pi[*i]);
            }
        }
        rc
    }

    /// `B⁻¹ a_j`.
    fn direction(&self, j: usize) -> Vec<Rational> {
        let col = &self.cols[j];
        self.binv
            .iter()
            .map(|row| {
                let mut acc = Rational::zero();
                for (i, c) in &col.entries {
                    if !row[*i].is_zero() {
                        c.add_times(&mut acc, &row[*i]);
                    }
                }
                acc
            })
            .collect()
    }

    fn var_index(&self, b: Basic) -> usize {
        match b {
            Basic::Art(i) => i,
            Basic::Col(j) => self.vars + j,
        }
    }

    fn pivot(&mut self, r: usize, j: usize, alpha: &[Rational]) {
        let piv = alpha[r].clone();
        for v in self.binv[r].iter_mut() {
            if !v.is_zero() {
                *v /= &piv;
            }
        }
        self.beta[r] /= &piv;
        let pivot_row = self.binv[r].clone();
        let pivot_beta = self.beta[r].clone();
        for (i, a) in alpha.iter().enumerate() {
            if i == r || a.is_zero() {
                continue;
            }
            for (v, pv) in self.binv[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= a * pv;
                }
            }
            self.beta[i] -= a * &pivot_beta;
        }
        self.basis[r] = Basic::Col(j);
        self.pivots += 1;
    }

    /// Runs simplex iterations; `false` means the (dual) objective is
    /// unbounded below.
    fn iterate(&mut self, phase1: bool) -> bool {
        loop {
            let pi = self.multipliers(phase1);
            let entering = (0..self.cols.len()).find(|&j| {
                !self.basis.contains(&Basic::Col(j)) && self.reduced_cost(j, &pi, phase1).is_negative()
            });
            let Some(j) = entering else {
                return true;
            };
            let alpha = self.direction(j);
            // Basic artificials at level zero leave first, whatever the sign.
            let stuck_art = (0..self.vars)
                .filter(|&r| {
                    !phase1
                        && matches!(self.basis[r], Basic::Art(_))
                        && self.beta[r].is_zero()
                        && !alpha[r].is_zero()
                })
                .min_by_key(|&r| self.var_index(self.basis[r]));
            let leaving = stuck_art.or_else(|| {
                let mut best: Option<(Rational, usize)> = None;
                for r in 0..self.vars {
                    if !alpha[r].is_positive() {
                        continue;
                    }
                    let ratio = &self.beta[r] / &alpha[r];
                    let better = match &best {
                        None => true,
                        Some((b, br)) => {
                            ratio < *b
                                || (ratio == *b
                                    && self.var_index(self.basis[r]) < self.var_index(self.basis[*br]))
                        }
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
                best.map(|(_, r)| r)
            });
            match leaving {
                Some(r) => self.pivot(r, j, &alpha),
                None => return false,
            }
        }
    }

    fn phase1(&mut self) -> bool {
        self.basis = (0..self.vars).map(Basic::Art).collect();
        self.binv = (0..self.vars)
            .map(|i| (0..self.vars).map(|k| if i == k { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        self.beta = self.rhs();
        let bounded = self.iterate(true);
        debug_assert!(bounded, "phase 1 is bounded below by zero");
        let infeasibility: Rational = self
            .basis
            .iter()
            .zip(&self.beta)
            .filter(|(b, _)| matches!(b, Basic::Art(_)))
            .map(|(_, v)| v.clone())
            .sum();
        if infeasibility.is_positive() {
            return false;
        }
        // Drive zero-level artificials out where some column allows it.
        for r in 0..self.vars {
            if !matches!(self.basis[r], Basic::Art(_)) {
                continue;
            }
            let replacement = (0..self.cols.len()).find(|&j| {
                !self.basis.contains(&Basic::Col(j)) && {
                    let col = &self.cols[j];
                    let mut acc = Rational::zero();
                    for (i, c) in &col.entries {
                        c.add_times(&mut acc, &self.binv[r][*i]);
                    }
                    !acc.is_zero()
                }
            });
            if let Some(j) = replacement {
                let alpha = self.direction(j);
                self.pivot(r, j, &alpha);
            }
        }
        true
    }

    pub fn solve(&mut self) -> LpSolution {
        loop {
            match self.state {
                State::Fresh => {
                    self.state = if self.phase1() {
                        State::Dirty
                    } else {
                        State::DualInfeasible
                    };
                }
                State::Dirty => {
                    self.state = if self.iterate(false) {
                        State::Optimal
                    } else {
                        State::PrimalInfeasible
                    };
                }
                State::Optimal => return self.optimal_solution(),
                State::PrimalInfeasible => return self.empty_solution(LpStatus::Infeasible),
                State::DualInfeasible => {
                    // Unbounded or infeasible; a zero objective decides.
                    let mut probe = ExactLp::new(self.vars, &vec![Rational::zero(); self.vars], Sense::Maximize);
                    for row in &self.rows {
                        probe.add_row(row.clone());
                    }
                    let status = match probe.solve().status {
                        LpStatus::Optimal => LpStatus::Unbounded,
                        s => s,
                    };
                    return self.empty_solution(status);
                }
            }
        }
    }

    fn empty_solution(&self, status: LpStatus) -> LpSolution {
        LpSolution {
            status,
            objective: Rational::zero(),
            primal: Vec::new(),
            duals: Vec::new(),
        }
    }

    fn optimal_solution(&self) -> LpSolution {
        let pi = self.multipliers(false);
        let primal: Vec<Rational> = pi
            .into_iter()
            .zip(&self.flip)
            .map(|(v, &f)| if f { -v } else { v })
            .collect();
        let mut duals = vec![Rational::zero(); self.rows.len()];
        for (r, b) in self.basis.iter().enumerate() {
            if let Basic::Col(j) = *b {
                let col = &self.cols[j];
                let signed = match self.rows[col.row].relation {
                    Relation::Eq if col.sign < 0 => -&self.beta[r],
                    _ => self.beta[r].clone(),
                };
                duals[col.row] += signed;
            }
        }
        let internal: Rational = self
            .c
            .iter()
            .zip(&primal)
            .map(|(c, y)| c * y)
            .sum();
        let objective = match self.sense {
            Sense::Maximize => internal,
            Sense::Minimize => -internal,
        };
        LpSolution {
            status: LpStatus::Optimal,
            objective,
            primal,
            duals,
        }
    }

    /// Exact optimality certificate: primal feasibility, dual feasibility and
    /// equal objectives.
    pub fn certify(&self, sol: &LpSolution) -> bool {
        if sol.status != LpStatus::Optimal {
            return false;
        }
        if !self.rows.iter().all(|r| r.holds(&sol.primal)) {
            return false;
        }
        let mut combo = vec![Rational::zero(); self.vars];
        let mut dual_obj = Rational::zero();
        for (row, d) in self.rows.iter().zip(&sol.duals) {
            if row.relation != Relation::Eq && d.is_negative() {
                return false;
            }
            let signed = if row.relation == Relation::Ge { -d } else { d.clone() };
            for (i, c) in &row.coeffs {
                combo[*i] += &signed * c;
            }
            dual_obj += &signed * &row.rhs;
        }
        let primal_obj: Rational = self.c.iter().zip(&sol.primal).map(|(c, y)| c * y).sum();
        combo == self.c && dual_obj == primal_obj
    }
}

/// One-shot exact solve of a finite system.
pub fn exact_lp_solve(vars: usize, rows: &[LinearRow], objective: &[Rational], sense: Sense) -> LpSolution {
    let mut lp = ExactLp::new(vars, objective, sense);
    for row in rows {
        lp.add_row(row.clone());
    }
    lp.solve()
}
