//! The level-by-level nucleolus driver.
//!
//! Level `j` maximizes `ε` over the coalitions whose characteristic vectors
//! leave the span `𝓛_{j−1}` of the coalitions fixed so far, with every
//! earlier level's `ε_i` held. One coalition `S_j` that the level pins down
//! is then added to the span. After `n` levels the span is everything and
//! the optimal set is a single point, the nucleolus.
//!
//! By default each level's master carries the equalities
//! `x(S_k) = ν(S_k) + ε_k` for the coalitions fixed so far and queries only
//! the newest family. Every earlier-level row is then implied, so the
//! feasible set is the same as the literal program's, where every family is
//! scanned with its own frozen `ε_i`. [`SolverOptions::literal`] selects the
//! literal form.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::game::{int, Allocation, Coalition, Instance, Rational};
use crate::lp::{optimize_linear, solve_max_eps, ConstraintRecord, EngineOptions, LpResult, RecordKind, SeparationOracle, Sense};
use crate::modlinalg::{independent_over_some_prime, rational_rank, BasisFamily, RationalSpan};
use crate::primes::{prime_set, PrimeSet};
use crate::separation::{full_separate, scan_level, violated_coalitions, CoalitionCut, Family};

/// What the driver knows after level `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelState {
    pub level: usize,
    /// `ε_j`.
    pub eps: Rational,
    /// `z^j_1, ..., z^j_j`; `z^j_1` is all ones.
    pub z_vectors: Vec<Vec<u8>>,
    /// Orthogonal bases of the span, per prime. `None` at level `n`.
    pub basis: Option<BasisFamily>,
    /// `S_j` (levels `j ≥ 2`).
    pub chosen: Option<Coalition>,
    /// Cuts generated while solving this level (confirmation solves included).
    pub cuts: usize,
}

impl LevelState {
    /// A level built straight from its z-vectors.
    pub fn for_test(level: usize, eps: Rational, z_vectors: Vec<Vec<u8>>, primes: &PrimeSet, n: usize) -> Self {
        let basis = (z_vectors.len() < n).then(|| BasisFamily::build(&z_vectors, n, primes));
        let chosen = (level >= 2).then(|| Coalition::from_characteristic(&z_vectors[level - 1]));
        LevelState {
            level,
            eps,
            z_vectors,
            basis,
            chosen,
            cuts: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub lp_solves: usize,
    pub oracle_calls: usize,
    pub cuts: usize,
    pub pivots: usize,
    pub wall_time: Duration,
}

impl SolveStats {
    fn absorb(&mut self, lp: &LpResult) {
        self.lp_solves += 1;
        self.oracle_calls += lp.oracle_calls;
        self.cuts += lp.generated().len();
        self.pivots += lp.pivots;
    }
}

#[derive(Debug, Clone)]
pub struct NucleolusResult {
    pub allocation: Allocation,
    /// One entry per level; empty when `w(N) < W`.
    pub levels: Vec<LevelState>,
    pub stats: SolveStats,
    /// Master iterations, when tracing is on.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SolverOptions {
    pub trace: bool,
    /// Scan every family at its own `ε_i` instead of pinning fixed
    /// coalitions.
    pub literal: bool,
    /// Master iteration cap per LP; `None` keeps the engine default.
    pub max_iterations: Option<usize>,
}

impl SolverOptions {
    fn engine(&self) -> EngineOptions {
        let mut e = EngineOptions {
            trace: self.trace,
            ..EngineOptions::default()
        };
        if let Some(m) = self.max_iterations {
            e.max_iterations = m;
        }
        e
    }
}

/// Separation for the level-`level` program described by `history`.
struct LevelOracle<'a> {
    instance: &'a Instance,
    history: &'a [LevelState],
    level: usize,
    literal: bool,
    /// `𝓛_{level−1}` over ℚ, for the enumeration shortcut.
    span: Option<RationalSpan>,
    accepted: Option<(Vec<Rational>, Rational)>,
}

/// Above this many violated coalitions the oracle falls back to the
/// residue-indexed tables.
const ENUMERATION_LIMIT: usize = 2048;

impl<'a> LevelOracle<'a> {
    fn new(instance: &'a Instance, history: &'a [LevelState], level: usize, literal: bool) -> Self {
        let span = (!literal && level >= 2).then(|| RationalSpan::new(&history[level - 2].z_vectors));
        LevelOracle {
            instance,
            history,
            level,
            literal,
            span,
            accepted: None,
        }
    }

    /// Family basis of `level`, i.e. the complement of `𝓛_{level−1}`.
    fn basis(&self, level: usize) -> Option<&'a BasisFamily> {
        (level >= 2).then(|| {
            self.history[level - 2]
                .basis
                .as_ref()
                .expect("levels below n carry a basis")
        })
    }

    /// Lists the violated coalitions directly when there are few of them.
    /// Members of the rational span are never in the family; for the rest
    /// the family test itself decides. `None` means "too many to list".
    fn by_enumeration(&self, x: &[Rational], eps: &Rational) -> Option<Option<CoalitionCut>> {
        let span = self.span.as_ref()?;
        let basis = self.basis(self.level).expect("level >= 2");
        let n = self.instance.n();
        let violated = violated_coalitions(self.instance, x, eps, ENUMERATION_LIMIT)?;
        Some(violated.into_iter().find_map(|s| {
            let chi = s.characteristic_vector(n);
            if span.contains(&chi) {
                return None;
            }
            basis.separating_family(&chi).map(|(prime, index)| CoalitionCut {
                value: self.instance.value(&s),
                coalition: s,
                level: self.level,
                threshold: eps.clone(),
                frozen: false,
                family: Some(Family { prime, index }),
            })
        }))
    }
}

impl SeparationOracle for LevelOracle<'_> {
    fn separate(&mut self, x: &[Rational], eps: &Rational) -> Option<CoalitionCut> {
        if let Some((ax, ae)) = &self.accepted {
            if ax.as_slice() == x && ae == eps {
                return None;
            }
        }
        let cut = if self.literal {
            let verdict = full_separate(self.instance, x, eps, self.history, self.level);
            match verdict.cut() {
                Some(c) => Some(c.clone()),
                None => {
                    assert!(verdict.is_feasible(), "master point violates a base row: {verdict:?}");
                    None
                }
            }
        } else if let Some(found) = self.by_enumeration(x, eps) {
            found
        } else {
            scan_level(self.instance, x, eps, self.basis(self.level), false)
        };
        if cut.is_none() {
            self.accepted = Some((x.to_vec(), eps.clone()));
        }
        cut
    }
}

/// Largest level `i ≤ level` whose family contains `chi`.
fn last_family(history: &[LevelState], chi: &[u8], level: usize) -> usize {
    (2..=level)
        .rev()
        .find(|&i| {
            history[i - 2]
                .basis
                .as_ref()
                .is_some_and(|b| b.separates(chi))
        })
        .unwrap_or(1)
}

/// Rows that describe the level-`level` program before any oracle call.
fn warm_start(
    instance: &Instance,
    history: &[LevelState],
    level: usize,
    pool: &[Coalition],
    literal: bool,
) -> Vec<ConstraintRecord> {
    let n = instance.n();
    let mut rows = Vec::new();
    if !literal {
        for k in 2..level {
            let s = Coalition::from_characteristic(&history[k - 1].z_vectors[k - 1]);
            rows.push(ConstraintRecord::pinned(instance, s, k, &history[k - 1].eps));
        }
    }
    for s in pool {
        let chi = s.characteristic_vector(n);
        let i = last_family(history, &chi, level);
        if i == level {
            rows.push(ConstraintRecord::live(instance, s.clone(), level, 0));
        } else if literal {
            rows.push(ConstraintRecord::frozen(instance, s.clone(), i, &history[i - 1].eps, 0));
        }
    }
    rows
}

/// Optimize `objective · x` over `P_j(ε_j)`, `j = history.len()`.
fn optimize_over(
    instance: &Instance,
    objective: &[Rational],
    sense: Sense,
    history: &[LevelState],
    pool: &[Coalition],
    options: &SolverOptions,
) -> Result<LpResult> {
    let level = history.len();
    assert!(level >= 1, "empty history");
    let mut oracle = LevelOracle::new(instance, history, level, options.literal);
    let warm = warm_start(instance, history, level, pool, options.literal);
    optimize_linear(
        instance,
        objective,
        sense,
        &history[level - 1].eps,
        &mut oracle,
        &warm,
        &options.engine(),
    )
}

fn indicator(n: usize, s: &Coalition) -> Vec<Rational> {
    (0..n)
        .map(|i| if s.contains(i) { Rational::one() } else { Rational::zero() })
        .collect()
}

/// Whether `x(s)` is constant over `P_j(ε_j)`, `j = history.len()`.
pub fn is_fixed(instance: &Instance, s: &Coalition, history: &[LevelState]) -> Result<bool> {
    is_fixed_with(instance, s, history, &SolverOptions::default())
}

pub fn is_fixed_with(instance: &Instance, s: &Coalition, history: &[LevelState], options: &SolverOptions) -> Result<bool> {
    let c = indicator(instance.n(), s);
    let max = optimize_over(instance, &c, Sense::Maximize, history, &[], options)?;
    let min = optimize_over(instance, &c, Sense::Minimize, history, &[], options)?;
    Ok(max.objective == min.objective)
}

/// Per-coordinate `(min, max)` of `x` over `P_j(ε_j)`.
pub fn coordinate_ranges(
    instance: &Instance,
    history: &[LevelState],
    options: &SolverOptions,
) -> Result<Vec<(Rational, Rational)>> {
    let n = instance.n();
    (0..n)
        .map(|i| {
            let c = indicator(n, &Coalition::from_members([i]));
            let max = optimize_over(instance, &c, Sense::Maximize, history, &[], options)?;
            let min = optimize_over(instance, &c, Sense::Minimize, history, &[], options)?;
            Ok((min.objective, max.objective))
        })
        .collect()
}

struct Driver<'a> {
    instance: &'a Instance,
    primes: PrimeSet,
    options: SolverOptions,
    pool: Vec<Coalition>,
    pooled: HashSet<Coalition>,
    levels: Vec<LevelState>,
    stats: SolveStats,
    trace: Vec<String>,
}

impl<'a> Driver<'a> {
    fn absorb(&mut self, lp: &LpResult, label: &str) -> usize {
        self.stats.absorb(lp);
        if self.options.trace {
            self.trace.extend(lp.trace.iter().map(|t| format!("{label} {t}")));
        }
        for r in lp.generated() {
            if r.kind == RecordKind::Coalition && self.pooled.insert(r.coalition.clone()) {
                self.pool.push(r.coalition.clone());
            }
        }
        lp.generated().len()
    }

    fn solve_level(&mut self, level: usize) -> Result<LpResult> {
        let mut oracle = LevelOracle::new(self.instance, &self.levels, level, self.options.literal);
        let warm = warm_start(self.instance, &self.levels, level, &self.pool, self.options.literal);
        let lp = solve_max_eps(self.instance, &mut oracle, &warm, &self.options.engine())?;
        Ok(lp)
    }

    /// `S_j`: positive-multiplier rows first, then any tight row, each
    /// confirmed by maximizing `x(S)` over `P_j(ε_j)`.
    fn extract(&mut self, level: usize, lp: &LpResult) -> Result<(Coalition, usize)> {
        let mut candidates: Vec<Coalition> = lp.dual_support(level).map(|r| r.coalition.clone()).collect();
        for r in &lp.records {
            if r.kind == RecordKind::Coalition
                && r.sigma
                && r.level == level
                && r.slack(&lp.x, &lp.eps).is_zero()
                && !candidates.contains(&r.coalition)
            {
                candidates.push(r.coalition.clone());
            }
        }
        let mut cuts = 0;
        let mut tried = HashSet::new();
        let mut k = 0;
        while k < candidates.len() {
            let s = candidates[k].clone();
            k += 1;
            if !tried.insert(s.clone()) {
                continue;
            }
            let target = int(self.instance.value(&s).into()) + &lp.eps;
            let c = indicator(self.instance.n(), &s);
            let pool = self.pool.clone();
            let max = optimize_over(self.instance, &c, Sense::Maximize, &self.levels, &pool, &self.options)?;
            cuts += self.absorb(&max, &format!("level={level} confirm={s}"));
            if max.objective == target {
                return Ok((s, cuts));
            }
            for r in max.generated() {
                if r.kind == RecordKind::Coalition && r.sigma && r.level == level && !candidates.contains(&r.coalition) {
                    candidates.push(r.coalition.clone());
                }
            }
        }
        Err(Error::Internal(format!(
            "no fixed coalition found at level {level} among {} candidates",
            candidates.len()
        )))
    }

    fn run(mut self) -> Result<NucleolusResult> {
        let start = Instant::now();
        let n = self.instance.n();
        let mut z: Vec<Vec<u8>> = vec![vec![1; n]];
        for level in 1..=n {
            let lp = self.solve_level(level)?;
            let mut cuts = self.absorb(&lp, &format!("level={level}"));
            if let Some(prev) = self.levels.last() {
                if lp.eps < prev.eps {
                    return Err(Error::Internal(format!(
                        "eps decreased from {} to {} at level {level}",
                        prev.eps, lp.eps
                    )));
                }
            }
            self.levels.push(LevelState {
                level,
                eps: lp.eps.clone(),
                z_vectors: z.clone(),
                basis: None,
                chosen: None,
                cuts: 0,
            });
            if level >= 2 {
                let (s, extra) = self.extract(level, &lp)?;
                cuts += extra;
                z.push(s.characteristic_vector(n));
                if !independent_over_some_prime(&z, &self.primes) || rational_rank(&z) != level {
                    return Err(Error::Internal(format!("S_{level} = {s} does not extend the span")));
                }
                let state = self.levels.last_mut().expect("just pushed");
                state.z_vectors = z.clone();
                state.chosen = Some(s);
            }
            let state = self.levels.last_mut().expect("just pushed");
            state.cuts = cuts;
            if level < n {
                state.basis = Some(BasisFamily::build(&z, n, &self.primes));
            }
        }

        let point = self.final_point()?;
        self.stats.wall_time = start.elapsed();
        Ok(NucleolusResult {
            allocation: Allocation::new(self.instance, point)?,
            levels: self.levels,
            stats: self.stats,
            trace: self.trace,
        })
    }

    /// The single point of `P_n(ε_n)`, checked coordinate by coordinate.
    fn final_point(&mut self) -> Result<Vec<Rational>> {
        let n = self.instance.n();
        let mut point = Vec::with_capacity(n);
        let pool = self.pool.clone();
        for i in 0..n {
            let c = indicator(n, &Coalition::from_members([i]));
            let max = optimize_over(self.instance, &c, Sense::Maximize, &self.levels, &pool, &self.options)?;
            self.absorb(&max, "final");
            let min = optimize_over(self.instance, &c, Sense::Minimize, &self.levels, &pool, &self.options)?;
            self.absorb(&min, "final");
            if max.objective != min.objective {
                return Err(Error::Internal(format!(
                    "P_n(eps_n) is not a point: x_{} ranges over [{}, {}]",
                    i + 1,
                    min.objective,
                    max.objective
                )));
            }
            point.push(max.objective);
        }
        Ok(point)
    }
}

pub fn solve_nucleolus(instance: &Instance) -> Result<NucleolusResult> {
    solve_nucleolus_with(instance, &SolverOptions::default())
}

pub fn solve_nucleolus_with(instance: &Instance, options: &SolverOptions) -> Result<NucleolusResult> {
    if instance.total_weight() < instance.quota() {
        let n = instance.n();
        return Ok(NucleolusResult {
            allocation: Allocation::new(instance, vec![Rational::zero(); n])?,
            levels: Vec::new(),
            stats: SolveStats::default(),
            trace: Vec::new(),
        });
    }
    Driver {
        instance,
        primes: prime_set(instance.n()),
        options: options.clone(),
        pool: Vec::new(),
        pooled: HashSet::new(),
        levels: Vec::new(),
        stats: SolveStats::default(),
        trace: Vec::new(),
    }
    .run()
}
