//! Constraint generation: an exact master LP over `(x, ε)` that grows one
//! oracle cut at a time until the oracle accepts the master optimum.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{int, Coalition, Instance, Rational};
use crate::lp::simplex::{ExactLp, LinearRow, LpSolution, LpStatus, Relation, Sense};
use crate::separation::{CoalitionCut, Family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    /// `x(S) − σ·ε ≥ rhs`.
    Coalition,
    /// `x_i ≥ 0`; the coalition is `{i}`.
    Nonneg,
    /// `x(N) = ν(N)`.
    Efficiency,
    /// `x(S) = rhs` for a coalition fixed at an earlier level.
    Pinned,
}

/// One row of a master LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRecord {
    pub kind: RecordKind,
    pub coalition: Coalition,
    /// Level of the family the row belongs to (0 for base rows).
    pub level: usize,
    /// `true` when the row carries the live `ε`; `false` when `ε` is folded
    /// into `rhs`.
    pub sigma: bool,
    pub rhs: Rational,
    /// Master iteration that produced the row (0 for rows given up front).
    pub origin: usize,
}

impl ConstraintRecord {
    /// `x(S) − ε ≥ ν(S)`.
    pub fn live(instance: &Instance, s: Coalition, level: usize, origin: usize) -> Self {
        let rhs = int(instance.value(&s).into());
        ConstraintRecord {
            kind: RecordKind::Coalition,
            coalition: s,
            level,
            sigma: true,
            rhs,
            origin,
        }
    }

    /// `x(S) ≥ ν(S) + eps`.
    pub fn frozen(instance: &Instance, s: Coalition, level: usize, eps: &Rational, origin: usize) -> Self {
        let rhs = int(instance.value(&s).into()) + eps;
        ConstraintRecord {
            kind: RecordKind::Coalition,
            coalition: s,
            level,
            sigma: false,
            rhs,
            origin,
        }
    }

    /// `x(S) = ν(S) + eps`.
    pub fn pinned(instance: &Instance, s: Coalition, level: usize, eps: &Rational) -> Self {
        let rhs = int(instance.value(&s).into()) + eps;
        ConstraintRecord {
            kind: RecordKind::Pinned,
            coalition: s,
            level,
            sigma: false,
            rhs,
            origin: 0,
        }
    }

    pub fn from_cut(instance: &Instance, cut: &CoalitionCut, origin: usize) -> Self {
        if cut.frozen {
            Self::frozen(instance, cut.coalition.clone(), cut.level, &cut.threshold, origin)
        } else {
            Self::live(instance, cut.coalition.clone(), cut.level, origin)
        }
    }

    fn base(instance: &Instance) -> Vec<Self> {
        let n = instance.n();
        let mut rows: Vec<Self> = (0..n)
            .map(|i| ConstraintRecord {
                kind: RecordKind::Nonneg,
                coalition: Coalition::from_members([i]),
                level: 0,
                sigma: false,
                rhs: Rational::zero(),
                origin: 0,
            })
            .collect();
        rows.push(ConstraintRecord {
            kind: RecordKind::Efficiency,
            coalition: instance.grand_coalition(),
            level: 0,
            sigma: false,
            rhs: int(instance.grand_value().into()),
            origin: 0,
        });
        rows
    }

    fn key(&self) -> (RecordKind, Coalition, usize, bool) {
        (self.kind, self.coalition.clone(), self.level, self.sigma)
    }

    fn row(&self, n: usize) -> LinearRow {
        let mut coeffs: Vec<(usize, Rational)> = self.coalition.members().map(|i| (i, Rational::one())).collect();
        if self.sigma {
            coeffs.push((n, -Rational::one()));
        }
        let relation = match self.kind {
            RecordKind::Coalition | RecordKind::Nonneg => Relation::Ge,
            RecordKind::Efficiency | RecordKind::Pinned => Relation::Eq,
        };
        LinearRow::new(coeffs, relation, self.rhs.clone())
    }

    /// Left-hand side minus right-hand side at `(x, eps)`.
    pub fn slack(&self, x: &[Rational], eps: &Rational) -> Rational {
        let mut lhs = self.coalition.sum_of(x);
        if self.sigma {
            lhs -= eps;
        }
        lhs - &self.rhs
    }
}

/// Separation callback of a constraint-generation run: a violated cut at
/// `(x, eps)`, or `None` when the point satisfies the whole family.
pub trait SeparationOracle {
    fn separate(&mut self, x: &[Rational], eps: &Rational) -> Option<CoalitionCut>;
}

impl<F> SeparationOracle for F
where
    F: FnMut(&[Rational], &Rational) -> Option<CoalitionCut>,
{
    fn separate(&mut self, x: &[Rational], eps: &Rational) -> Option<CoalitionCut> {
        self(x, eps)
    }
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub max_iterations: usize,
    pub trace: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_iterations: 200_000,
            trace: false,
        }
    }
}

/// One master iteration: the master's `ε`, and the cut the oracle returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub iteration: usize,
    pub eps: Rational,
    pub level: Option<usize>,
    pub family: Option<Family>,
    pub witness: Option<Coalition>,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iter={} eps={}", self.iteration, self.eps)?;
        match (&self.witness, self.level) {
            (Some(s), Some(level)) => {
                write!(f, " level={level} family=")?;
                match self.family {
                    Some(fam) => write!(f, "{fam}")?,
                    None => write!(f, "-")?,
                }
                write!(f, " witness={s}")
            }
            _ => write!(f, " witness=none"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: Rational,
    pub x: Vec<Rational>,
    pub eps: Rational,
    /// Every row of the final master, base rows first, then the warm start,
    /// then generated cuts.
    pub records: Vec<ConstraintRecord>,
    /// Aligned with `records`; non-negative except on equality rows.
    pub duals: Vec<Rational>,
    /// Multiplier of the `ε ≤ 1` guard (maximization runs only).
    pub guard_dual: Rational,
    /// Index in `records` of the first generated cut.
    pub first_generated: usize,
    pub oracle_calls: usize,
    pub pivots: usize,
    pub trace: Vec<TraceLine>,
}

impl LpResult {
    pub fn generated(&self) -> &[ConstraintRecord] {
        &self.records[self.first_generated..]
    }

    /// Live coalition rows of `level` with a positive multiplier.
    pub fn dual_support(&self, level: usize) -> impl Iterator<Item = &ConstraintRecord> + '_ {
        self.records
            .iter()
            .zip(&self.duals)
            .filter(move |(r, d)| r.kind == RecordKind::Coalition && r.sigma && r.level == level && d.is_positive())
            .map(|(r, _)| r)
    }
}

enum Goal<'a> {
    MaxEps,
    Linear {
        objective: &'a [Rational],
        sense: Sense,
        eps: &'a Rational,
    },
}

fn run(
    instance: &Instance,
    goal: Goal<'_>,
    oracle: &mut dyn SeparationOracle,
    warm_start: &[ConstraintRecord],
    options: &EngineOptions,
) -> Result<LpResult> {
    let n = instance.n();
    let (objective, sense, guard) = match &goal {
        Goal::MaxEps => {
            let mut c = vec![Rational::zero(); n + 1];
            c[n] = Rational::one();
            (c, Sense::Maximize, LinearRow::new(vec![(n, Rational::one())], Relation::Le, Rational::one()))
        }
        Goal::Linear { objective, sense, eps } => {
            assert_eq!(objective.len(), n, "objective length");
            let mut c = objective.to_vec();
            c.push(Rational::zero());
            (c, *sense, LinearRow::new(vec![(n, Rational::one())], Relation::Eq, (*eps).clone()))
        }
    };
    let mut lp = ExactLp::new(n + 1, &objective, sense);
    lp.add_row(guard);
    let mut records = ConstraintRecord::base(instance);
    let mut seen: HashSet<_> = records.iter().map(|r| r.key()).collect();
    for r in warm_start {
        if matches!(r.kind, RecordKind::Coalition | RecordKind::Pinned) && seen.insert(r.key()) {
            records.push(r.clone());
        }
    }
    for r in &records {
        lp.add_row(r.row(n));
    }
    let first_generated = records.len();

    let mut trace = Vec::new();
    let mut oracle_calls = 0;
    let mut iteration = 0;
    let sol: LpSolution = loop {
        let sol = lp.solve();
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Err(Error::Infeasible(format!(
                    "master with {} rows after {iteration} cuts",
                    records.len()
                )))
            }
            LpStatus::Unbounded => return Err(Error::Internal("master LP is unbounded".into())),
        }
        let (x, eps) = sol.primal.split_at(n);
        let eps = &eps[0];
        oracle_calls += 1;
        let cut = oracle.separate(x, eps);
        if options.trace {
            trace.push(TraceLine {
                iteration,
                eps: eps.clone(),
                level: cut.as_ref().map(|c| c.level),
                family: cut.as_ref().and_then(|c| c.family),
                witness: cut.as_ref().map(|c| c.coalition.clone()),
            });
        }
        let Some(cut) = cut else {
            break sol;
        };
        iteration += 1;
        if iteration > options.max_iterations {
            return Err(Error::IterationLimit {
                limit: options.max_iterations,
                context: format!("master eps = {eps}, last witness {}", cut.coalition),
            });
        }
        let record = ConstraintRecord::from_cut(instance, &cut, iteration);
        if !record.slack(x, eps).is_negative() {
            return Err(Error::Internal(format!(
                "oracle returned {} which is not violated at eps = {eps}",
                cut.coalition
            )));
        }
        if !seen.insert(record.key()) {
            return Err(Error::Internal(format!(
                "oracle repeated {} at level {}",
                cut.coalition, cut.level
            )));
        }
        lp.add_row(record.row(n));
        records.push(record);
    };

    if !lp.certify(&sol) {
        return Err(Error::Internal("optimality certificate failed".into()));
    }
    let mut primal = sol.primal;
    let eps = primal.pop().expect("eps column");
    if matches!(goal, Goal::MaxEps) && eps >= Rational::one() {
        return Err(Error::Internal("the eps <= 1 guard binds at the optimum".into()));
    }
    let guard_dual = sol.duals[0].clone();
    Ok(LpResult {
        status: LpStatus::Optimal,
        objective: sol.objective,
        x: primal,
        eps,
        records,
        duals: sol.duals[1..].to_vec(),
        guard_dual,
        first_generated,
        oracle_calls,
        pivots: lp.pivots(),
        trace,
    })
}

/// `max ε` over the rows generated by `oracle`, seeded with `warm_start`.
pub fn solve_max_eps(
    instance: &Instance,
    oracle: &mut dyn SeparationOracle,
    warm_start: &[ConstraintRecord],
    options: &EngineOptions,
) -> Result<LpResult> {
    run(instance, Goal::MaxEps, oracle, warm_start, options)
}

/// Optimize `objective · x` with `ε` held at `eps`.
pub fn optimize_linear(
    instance: &Instance,
    objective: &[Rational],
    sense: Sense,
    eps: &Rational,
    oracle: &mut dyn SeparationOracle,
    warm_start: &[ConstraintRecord],
    options: &EngineOptions,
) -> Result<LpResult> {
    run(
        instance,
        Goal::Linear { objective, sense, eps },
        oracle,
        warm_start,
        options,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rat;
    use crate::separation::scan_level;

    fn inst(w: &[u64], q: u64) -> Instance {
        Instance::new(w.to_vec(), q).unwrap()
    }

    fn level1(instance: &Instance) -> impl FnMut(&[Rational], &Rational) -> Option<CoalitionCut> + '_ {
        move |x, eps| scan_level(instance, x, eps, None, false)
    }

    /// Separation by listing every coalition.
    fn explicit(instance: &Instance) -> impl FnMut(&[Rational], &Rational) -> Option<CoalitionCut> + '_ {
        move |x, eps| {
            (0u64..1 << instance.n())
                .map(Coalition::from_mask)
                .find(|s| s.sum_of(x) < int(instance.value(s).into()) + eps)
                .map(|s| CoalitionCut {
                    value: instance.value(&s),
                    coalition: s,
                    level: 1,
                    threshold: eps.clone(),
                    frozen: false,
                    family: None,
                })
        }
    }

    #[test]
    fn majority_level1() {
        let g = inst(&[1, 1, 1], 2);
        let mut oracle = level1(&g);
        let res = solve_max_eps(&g, &mut oracle, &[], &EngineOptions::default()).unwrap();
        assert_eq!(res.eps, rat(-1, 3));
        assert_eq!(res.x, vec![rat(1, 3); 3]);
        assert!(res.dual_support(1).count() >= 1);
        let again = solve_max_eps(&g, &mut explicit(&g), &[], &EngineOptions::default()).unwrap();
        assert_eq!(again.eps, rat(-1, 3));
    }

    #[test]
    fn dictator_level1_caps_at_zero() {
        let g = inst(&[3, 1, 1], 3);
        let res = solve_max_eps(&g, &mut level1(&g), &[], &EngineOptions::default()).unwrap();
        assert_eq!(res.eps, rat(0, 1));
    }

    #[test]
    fn pair_level_two() {
        let g = inst(&[1, 1], 2);
        // Level-2 family of (1,1;2): the singletons.
        let mut oracle = |x: &[Rational], eps: &Rational| {
            (0..2)
                .map(|i| Coalition::from_members([i]))
                .find(|s| s.sum_of(x) < *eps)
                .map(|s| CoalitionCut {
                    value: 0,
                    coalition: s,
                    level: 2,
                    threshold: eps.clone(),
                    frozen: false,
                    family: None,
                })
        };
        let res = solve_max_eps(&g, &mut oracle, &[], &EngineOptions::default()).unwrap();
        assert_eq!(res.eps, rat(1, 2));
        assert_eq!(res.x, vec![rat(1, 2), rat(1, 2)]);

        let warm = vec![
            ConstraintRecord::live(&g, Coalition::from_members([0]), 2, 0),
            ConstraintRecord::live(&g, Coalition::from_members([1]), 2, 0),
        ];
        let one = vec![rat(1, 1), rat(0, 1)];
        let mut none = |_: &[Rational], _: &Rational| None;
        let max = optimize_linear(&g, &one, Sense::Maximize, &rat(1, 2), &mut none, &warm, &EngineOptions::default()).unwrap();
        let min = optimize_linear(&g, &one, Sense::Minimize, &rat(1, 2), &mut none, &warm, &EngineOptions::default()).unwrap();
        assert_eq!(max.objective, rat(1, 2));
        assert_eq!(min.objective, rat(1, 2));
    }

    #[test]
    fn simplex_region_bounds() {
        let g = inst(&[1, 1], 2);
        let one = vec![rat(1, 1), rat(0, 1)];
        let opts = EngineOptions::default();
        let max = optimize_linear(&g, &one, Sense::Maximize, &rat(0, 1), &mut level1(&g), &[], &opts).unwrap();
        let min = optimize_linear(&g, &one, Sense::Minimize, &rat(0, 1), &mut level1(&g), &[], &opts).unwrap();
        assert_eq!(max.objective, rat(1, 1));
        assert_eq!(min.objective, rat(0, 1));
        let all = vec![rat(1, 1); 2];
        let total = optimize_linear(&g, &all, Sense::Maximize, &rat(0, 1), &mut level1(&g), &[], &opts).unwrap();
        assert_eq!(total.objective, rat(1, 1));
    }

    #[test]
    fn bad_oracles_are_reported() {
        let g = inst(&[1, 1, 1], 2);
        let mut liar = |_: &[Rational], eps: &Rational| {
            Some(CoalitionCut {
                value: 0,
                coalition: Coalition::from_members([0]),
                level: 1,
                threshold: eps.clone(),
                frozen: false,
                family: None,
            })
        };
        let err = solve_max_eps(&g, &mut liar, &[], &EngineOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Internal(_)), "{err}");
    }

    #[test]
    fn trace_lines() {
        let g = inst(&[1, 1, 1], 2);
        let opts = EngineOptions {
            trace: true,
            ..EngineOptions::default()
        };
        let res = solve_max_eps(&g, &mut level1(&g), &[], &opts).unwrap();
        assert_eq!(res.trace.len(), res.oracle_calls);
        assert_eq!(res.trace[0].eps, rat(1, 1));
        assert!(res.trace.last().unwrap().to_string().ends_with("witness=none"));
        assert!(res.trace[0].to_string().starts_with("iter=0 eps=1 level=1 family=- witness={"));
    }

    #[test]
    fn no_cut_repeats_and_duals_certify() {
        let g = inst(&[4, 3, 2, 1, 1], 6);
        let res = solve_max_eps(&g, &mut level1(&g), &[], &EngineOptions::default()).unwrap();
        let keys: HashSet<_> = res.records.iter().map(|r| r.key()).collect();
        assert_eq!(keys.len(), res.records.len());
        for (r, d) in res.records.iter().zip(&res.duals) {
            assert!(!r.slack(&res.x, &res.eps).is_negative());
            if r.kind == RecordKind::Coalition && d.is_positive() {
                assert!(r.slack(&res.x, &res.eps).is_zero());
            }
        }
        let brute = solve_max_eps(&g, &mut explicit(&g), &[], &EngineOptions::default()).unwrap();
        assert_eq!(res.eps, brute.eps);
    }
}
