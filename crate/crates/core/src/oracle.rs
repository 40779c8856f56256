//! Brute-force reference implementations for small games.
//!
//! Everything here enumerates all `2^n` coalitions. The nucleolus routine
//! runs the level scheme with the full constraint list and tracks spans over
//! ℚ directly; it shares only the simplex with the fast solver.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::game::{int, Allocation, Coalition, Instance, Rational, DEFAULT_ENUMERATION_LIMIT};
use crate::lp::{ExactLp, LinearRow, LpStatus, Relation, Sense};
use crate::modlinalg::ModVector;
use crate::scheme::LevelState;
use crate::separation::{check_base, CoalitionCut, DpTable, SeparationVerdict, TableKind, Violation};

/// An instance with its characteristic function tabulated.
#[derive(Debug, Clone)]
pub struct ExplicitGame {
    instance: Instance,
    values: Vec<u8>,
    weights: Vec<u64>,
}

impl ExplicitGame {
    pub fn new(instance: &Instance) -> Result<Self> {
        Self::with_limit(instance, DEFAULT_ENUMERATION_LIMIT)
    }

    pub fn with_limit(instance: &Instance, limit: usize) -> Result<Self> {
        let n = instance.n();
        if n > limit || n >= 64 {
            return Err(Error::SizeLimit { n, limit });
        }
        let size = 1usize << n;
        let mut weights = vec![0u64; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            weights[mask] = weights[mask & (mask - 1)] + instance.weights()[low];
        }
        let values = weights.iter().map(|&w| u8::from(w >= instance.quota())).collect();
        Ok(ExplicitGame {
            instance: instance.clone(),
            values,
            weights,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    /// `ν` of the coalition with bit mask `mask`.
    pub fn value(&self, mask: usize) -> u8 {
        self.values[mask]
    }

    pub fn weight(&self, mask: usize) -> u64 {
        self.weights[mask]
    }
}

/// Span of 0/1 vectors over ℚ, kept in reduced row echelon form.
struct RationalSpan {
    n: usize,
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
    /// Rows scaled to a common denominator, for fast membership tests.
    scaled: Vec<Vec<i128>>,
    denom: i128,
}

impl RationalSpan {
    fn new(n: usize) -> Self {
        RationalSpan {
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
            scaled: Vec::new(),
            denom: 1,
        }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mask: usize) -> Vec<Rational> {
        let mut v: Vec<Rational> = (0..self.n).map(|i| int(((mask >> i) & 1) as u64)).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if v[pc].is_zero() {
                continue;
            }
            let f = v[pc].clone();
            for (a, b) in v.iter_mut().zip(row) {
                *a -= &f * b;
            }
        }
        v
    }

    /// Adds `mask`; `false` if it was already in the span.
    fn insert(&mut self, mask: usize) -> bool {
        let mut v = self.reduce(mask);
        let Some(pc) = v.iter().position(|a| !a.is_zero()) else {
            return false;
        };
        let f = v[pc].clone();
        for a in v.iter_mut() {
            *a /= &f;
        }
        for row in self.rows.iter_mut() {
            if row[pc].is_zero() {
                continue;
            }
            let g = row[pc].clone();
            for (a, b) in row.iter_mut().zip(&v) {
                *a -= &g * b;
            }
        }
        self.rows.push(v);
        self.pivots.push(pc);
        let denom = self
            .rows
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, a| num_integer::lcm(acc, a.denom().clone()));
        self.denom = denom.to_i128().expect("span denominators fit in i128");
        self.scaled = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|a| (a.numer() * (&denom / a.denom())).to_i128().expect("span entries fit in i128"))
                    .collect()
            })
            .collect();
        true
    }

    /// In reduced form a vector of the span is the sum of the rows whose
    /// pivot coordinate it has set.
    fn contains(&self, mask: usize) -> bool {
        let mut acc = vec![0i128; self.n];
        for (row, &pc) in self.scaled.iter().zip(&self.pivots) {
            if (mask >> pc) & 1 == 1 {
                for (a, b) in acc.iter_mut().zip(row) {
                    *a += b;
                }
            }
        }
        acc.iter()
            .enumerate()
            .all(|(i, &a)| a == if (mask >> i) & 1 == 1 { self.denom } else { 0 })
    }
}

/// Lazily activated explicit program over `(x, ε)`.
///
/// Row for coalition `S`: `x(S) − ε ≥ ν(S)` when `live[S]`, otherwise
/// `x(S) ≥ ν(S) + thresholds[S]`. All rows are considered; only violated
/// ones are handed to the simplex.
struct ExplicitProgram<'a> {
    game: &'a ExplicitGame,
    live: &'a [bool],
    thresholds: &'a [Option<Rational>],
}

struct ProgramSolution {
    x: Vec<Rational>,
    eps: Rational,
    objective: Rational,
    /// `(mask, multiplier)` for every active live row.
    live_duals: Vec<(usize, Rational)>,
}

const BATCH: usize = 16;

impl ExplicitProgram<'_> {
    fn row(&self, mask: usize) -> LinearRow {
        let n = self.game.n();
        let mut coeffs: Vec<(usize, Rational)> =
            (0..n).filter(|i| (mask >> i) & 1 == 1).map(|i| (i, Rational::one())).collect();
        let mut rhs = int(self.game.value(mask).into());
        if self.live[mask] {
            coeffs.push((n, -Rational::one()));
        } else {
            rhs += self.thresholds[mask].as_ref().expect("frozen row has a threshold");
        }
        LinearRow::new(coeffs, Relation::Ge, rhs)
    }

    /// Up to `BATCH` most violated rows at `(x, eps)`.
    fn violated(&self, x: &[Rational], eps: &Rational) -> Vec<usize> {
        let n = self.game.n();
        let denom = x
            .iter()
            .chain(std::iter::once(eps))
            .chain(self.thresholds.iter().flatten())
            .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
        let scale = |v: &Rational| v.numer() * (&denom / v.denom());
        let a: Vec<BigInt> = x.iter().map(scale).collect();
        let e = scale(eps);
        let size = 1usize << n;
        let mut sums = vec![BigInt::zero(); size];
        let mut out: Vec<(BigInt, usize)> = Vec::new();
        for mask in 0..size {
            if mask > 0 {
                let low = mask.trailing_zeros() as usize;
                sums[mask] = &sums[mask & (mask - 1)] + &a[low];
            }
            let mut bound = &denom * BigInt::from(self.game.value(mask));
            bound += if self.live[mask] {
                e.clone()
            } else {
                scale(self.thresholds[mask].as_ref().expect("frozen row has a threshold"))
            };
            if sums[mask] < bound {
                out.push((&sums[mask] - bound, mask));
            }
        }
        out.sort();
        out.into_iter().take(BATCH).map(|(_, m)| m).collect()
    }

    /// `max ε` (when `fixed_eps` is `None`) or `objective · x` at `ε = fixed_eps`.
    fn solve(&self, objective: Option<(&[Rational], Sense)>, fixed_eps: Option<&Rational>) -> Result<ProgramSolution> {
        let n = self.game.n();
        let (c, sense) = match objective {
            Some((c, sense)) => {
                let mut c = c.to_vec();
                c.push(Rational::zero());
                (c, sense)
            }
            None => {
                let mut c = vec![Rational::zero(); n + 1];
                c[n] = Rational::one();
                (c, Sense::Maximize)
            }
        };
        let mut lp = ExactLp::new(n + 1, &c, sense);
        match fixed_eps {
            Some(e) => lp.add_row(LinearRow::new(vec![(n, Rational::one())], Relation::Eq, e.clone())),
            None => lp.add_row(LinearRow::new(vec![(n, Rational::one())], Relation::Le, Rational::one())),
        };
        for i in 0..n {
            lp.add_row(LinearRow::new(vec![(i, Rational::one())], Relation::Ge, Rational::zero()));
        }
        let all: Vec<(usize, Rational)> = (0..n).map(|i| (i, Rational::one())).collect();
        lp.add_row(LinearRow::new(all, Relation::Eq, int(self.instance_value_n().into())));
        let base_rows = n + 2;
        let mut active: Vec<usize> = Vec::new();
        loop {
            let sol = lp.solve();
            if sol.status != LpStatus::Optimal {
                return Err(Error::Infeasible(format!("explicit program is {:?}", sol.status)));
            }
            let (x, e) = sol.primal.split_at(n);
            let fresh = self.violated(x, &e[0]);
            if fresh.is_empty() {
                let live_duals = active
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| self.live[m])
                    .map(|(k, &m)| (m, sol.duals[base_rows + k].clone()))
                    .collect();
                return Ok(ProgramSolution {
                    x: x.to_vec(),
                    eps: e[0].clone(),
                    objective: sol.objective,
                    live_duals,
                });
            }
            for m in fresh {
                lp.add_row(self.row(m));
                active.push(m);
            }
        }
    }

    fn instance_value_n(&self) -> u8 {
        self.game.value((1usize << self.game.n()) - 1)
    }
}

/// Level values and fixed coalitions of a brute-force run.
#[derive(Debug, Clone)]
pub struct BruteRun {
    pub allocation: Allocation,
    pub eps: Vec<Rational>,
    pub chosen: Vec<Coalition>,
}

pub fn brute_nucleolus(game: &ExplicitGame) -> Result<Allocation> {
    Ok(brute_nucleolus_run(game)?.allocation)
}

pub fn brute_nucleolus_run(game: &ExplicitGame) -> Result<BruteRun> {
    let n = game.n();
    let size = 1usize << n;
    let full = size - 1;
    let instance = game.instance();
    if game.value(full) == 0 {
        return Ok(BruteRun {
            allocation: Allocation::new(instance, vec![Rational::zero(); n])?,
            eps: Vec::new(),
            chosen: Vec::new(),
        });
    }
    let mut span = RationalSpan::new(n);
    span.insert(full);
    // depth[S]: the level whose span first contains χ(S).
    let mut depth: Vec<Option<usize>> = (0..size).map(|m| (m == 0 || m == full).then_some(1)).collect();
    let mut eps_levels: Vec<Rational> = Vec::new();
    let mut chosen = Vec::new();
    let mut last_x = Vec::new();

    for level in 1..=n {
        let live: Vec<bool> = depth.iter().map(|d| d.is_none_or(|d| d >= level)).collect();
        let thresholds: Vec<Option<Rational>> = depth
            .iter()
            .map(|d| d.filter(|&d| d < level).map(|d| eps_levels[d - 1].clone()))
            .collect();
        let program = ExplicitProgram {
            game,
            live: &live,
            thresholds: &thresholds,
        };
        let sol = program.solve(None, None)?;
        eps_levels.push(sol.eps.clone());
        last_x = sol.x.clone();
        if level == 1 {
            continue;
        }
        // Candidates: positive multipliers, then every tight live row.
        let mut candidates: Vec<usize> = sol
            .live_duals
            .iter()
            .filter(|(_, d)| d.is_positive())
            .map(|(m, _)| *m)
            .collect();
        for m in 0..size {
            if live[m] && !candidates.contains(&m) {
                let xs: Rational = (0..n).filter(|i| (m >> i) & 1 == 1).map(|i| &sol.x[i]).sum();
                if xs == int(game.value(m).into()) + &sol.eps {
                    candidates.push(m);
                }
            }
        }
        let mut fixed = None;
        for m in candidates {
            let c: Vec<Rational> = (0..n).map(|i| int(((m >> i) & 1) as u64)).collect();
            let hi = program.solve(Some((&c, Sense::Maximize)), Some(&sol.eps))?;
            let lo = program.solve(Some((&c, Sense::Minimize)), Some(&sol.eps))?;
            if hi.objective == lo.objective {
                fixed = Some(m);
                break;
            }
        }
        let m = fixed.ok_or_else(|| Error::Internal(format!("no fixed coalition at level {level}")))?;
        if !span.insert(m) {
            return Err(Error::Internal("fixed coalition already in the span".into()));
        }
        chosen.push(Coalition::from_mask(m as u64));
        for (mask, d) in depth.iter_mut().enumerate() {
            if d.is_none() && span.contains(mask) {
                *d = Some(level);
            }
        }
    }
    debug_assert_eq!(span.dim(), n);

    // P_n(ε_n) must be the single point found at the last level.
    let live: Vec<bool> = depth.iter().map(|d| d.is_none_or(|d| d >= n)).collect();
    let thresholds: Vec<Option<Rational>> = depth
        .iter()
        .map(|d| d.filter(|&d| d < n).map(|d| eps_levels[d - 1].clone()))
        .collect();
    let program = ExplicitProgram {
        game,
        live: &live,
        thresholds: &thresholds,
    };
    let eps_n = eps_levels.last().expect("n >= 1").clone();
    for i in 0..n {
        let mut c = vec![Rational::zero(); n];
        c[i] = Rational::one();
        let hi = program.solve(Some((&c, Sense::Maximize)), Some(&eps_n))?;
        let lo = program.solve(Some((&c, Sense::Minimize)), Some(&eps_n))?;
        if hi.objective != lo.objective || hi.objective != last_x[i] {
            return Err(Error::Internal(format!("explicit P_n is not a point in coordinate {}", i + 1)));
        }
    }
    Ok(BruteRun {
        allocation: Allocation::new(instance, last_x)?,
        eps: eps_levels,
        chosen,
    })
}

/// Every `γ` cell by enumerating the subsets of each prefix.
pub fn brute_gamma(instance: &Instance, x: &[Rational], v: Option<&ModVector>) -> Result<DpTable> {
    let n = instance.n();
    if n > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    let kind = match v {
        None => TableKind::Plain,
        Some(v) => TableKind::Modular {
            p: v.modulus(),
            v: v.clone(),
        },
    };
    let mut table = DpTable::empty(kind, instance, x);
    let size = 1usize << n;
    let p = v.map_or(1, |v| v.modulus());
    let mut sums = vec![Rational::zero(); size];
    let mut weights = vec![0usize; size];
    let mut residues = vec![0u64; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        sums[mask] = &sums[rest] + &x[low];
        weights[mask] = weights[rest] + instance.weights()[low] as usize;
        residues[mask] = (residues[rest] + v.map_or(0, |v| v.entries()[low])) % p;
    }
    for k in 0..=n {
        for mask in 0..1usize << k {
            let (g, u) = (residues[mask] as usize, weights[mask]);
            let better = table.get(k, g, u).is_none_or(|c| sums[mask] < *c);
            if better {
                table.set(k, g, u, Some(sums[mask].clone()));
            }
        }
    }
    Ok(table)
}

/// Membership of `(x, eps)` in the level-`level` program by listing every
/// coalition. Earlier families use their frozen `ε_i` from `history`.
pub fn brute_separate(
    instance: &Instance,
    x: &[Rational],
    eps: &Rational,
    level: usize,
    history: &[LevelState],
) -> Result<SeparationVerdict> {
    let n = instance.n();
    if n > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    assert!(level >= 1 && history.len() + 1 >= level, "history too short");
    if let Some(v) = check_base(instance, x) {
        return Ok(SeparationVerdict::Infeasible(v));
    }
    for mask in 0u64..1 << n {
        let s = Coalition::from_mask(mask);
        let chi = s.characteristic_vector(n);
        let xs = s.sum_of(x);
        let nu = int(instance.value(&s).into());
        for i in 1..=level {
            let in_family = i == 1
                || history[i - 2]
                    .basis
                    .as_ref()
                    .is_some_and(|b| b.separates(&chi));
            if !in_family {
                break;
            }
            let threshold = if i < level { &history[i - 1].eps } else { eps };
            if xs < &nu + threshold {
                return Ok(SeparationVerdict::Infeasible(Violation::Coalition(CoalitionCut {
                    value: instance.value(&s),
                    coalition: s,
                    level: i,
                    threshold: threshold.clone(),
                    frozen: i < level,
                    family: None,
                })));
            }
        }
    }
    Ok(SeparationVerdict::Feasible)
}
