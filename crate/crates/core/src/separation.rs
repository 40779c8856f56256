//! Pseudo-polynomial separation for the scheme's constraint families.
//!
//! A coalition constraint reads `x(S) ≥ ν(S) + ε`. Since `ν` only depends on
//! `w(S)`, it is enough to know, for every weight `U`, the cheapest coalition
//! of weight `U`; a knapsack-style table indexed by (prefix, weight) gives
//! that. Families of level `j ≥ 2` restrict to coalitions with
//! `⟨v, χ(S)⟩ ≢ 0 (mod p)`, which adds a residue axis to the table.
//!
//! Two implementations live here. [`DpTable`] is the literal exact-rational
//! table over the full weight range; it backs the public table API and
//! cross-checks. The solver's oracle scans the same recurrence over scaled
//! integers with the weight axis capped at the quota (only `w(S) ≥ W`
//! matters, not the exact surplus), which is far cheaper.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::game::{int, Coalition, Instance, Rational};
use crate::modlinalg::{BasisFamily, ModVector};
use crate::scheme::LevelState;

/// Which of the two table shapes a [`DpTable`] has.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableKind {
    /// `γ_{k,U}`.
    Plain,
    /// `γ_{k,g,U}` for the weighting `v` over `𝔽_p`.
    Modular { p: u64, v: ModVector },
}

/// `γ` cells over `k = 0..=n`, `g = 0..p` (one residue for plain tables) and
/// `U = 0..=w(N)`; `None` is `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpTable {
    kind: TableKind,
    n: usize,
    residues: usize,
    width: usize,
    weights: Vec<u64>,
    x: Vec<Rational>,
    cells: Vec<Option<Rational>>,
}

impl DpTable {
    pub(crate) fn empty(kind: TableKind, instance: &Instance, x: &[Rational]) -> Self {
        let residues = match &kind {
            TableKind::Plain => 1,
            TableKind::Modular { p, .. } => *p as usize,
        };
        let n = instance.n();
        let width = instance.total_weight() as usize + 1;
        DpTable {
            kind,
            n,
            residues,
            width,
            weights: instance.weights().to_vec(),
            x: x.to_vec(),
            cells: vec![None; (n + 1) * residues * width],
        }
    }

    pub fn kind(&self) -> &TableKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of residue classes (1 for plain tables, `p` otherwise).
    pub fn residues(&self) -> usize {
        self.residues
    }

    /// `w(N)`.
    pub fn max_weight(&self) -> usize {
        self.width - 1
    }

    fn idx(&self, k: usize, g: usize, u: usize) -> usize {
        assert!(k <= self.n && g < self.residues && u < self.width, "cell out of range");
        (k * self.residues + g) * self.width + u
    }

    /// Plain tables use `g = 0`.
    pub fn get(&self, k: usize, g: usize, u: usize) -> Option<&Rational> {
        self.cells[self.idx(k, g, u)].as_ref()
    }

    pub(crate) fn set(&mut self, k: usize, g: usize, u: usize, value: Option<Rational>) {
        let i = self.idx(k, g, u);
        self.cells[i] = value;
    }

    fn shift(&self, k: usize) -> usize {
        match &self.kind {
            TableKind::Plain => 0,
            TableKind::Modular { v, .. } => v.entries()[k] as usize,
        }
    }
}

fn min_opt(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn fill(mut table: DpTable) -> DpTable {
    table.set(0, 0, 0, Some(Rational::zero()));
    for k in 1..=table.n {
        let w = table.weights[k - 1] as usize;
        let shift = table.shift(k - 1);
        for g in 0..table.residues {
            let g_prev = (g + table.residues - shift) % table.residues;
            for u in 0..table.width {
                let skip = table.get(k - 1, g, u).cloned();
                let take = if u >= w {
                    table.get(k - 1, g_prev, u - w).map(|c| c + &table.x[k - 1])
                } else {
                    None
                };
                table.set(k, g, u, min_opt(skip, take));
            }
        }
    }
    table
}

/// `γ_{k,U} = min{ x(S) : S ⊆ {1..k}, w(S) = U }`.
pub fn dp_min_table(instance: &Instance, x: &[Rational]) -> DpTable {
    fill(DpTable::empty(TableKind::Plain, instance, x))
}

/// `γ_{k,g,U} = min{ x(S) : S ⊆ {1..k}, v(S) ≡ g (mod p), w(S) = U }`.
pub fn dp_min_table_mod(instance: &Instance, x: &[Rational], v: &ModVector) -> DpTable {
    assert_eq!(v.len(), instance.n(), "weighting has the wrong length");
    let kind = TableKind::Modular {
        p: v.modulus(),
        v: v.clone(),
    };
    fill(DpTable::empty(kind, instance, x))
}

/// A coalition attaining the final-row cell `(g, u)`.
pub fn backtrace_witness(table: &DpTable, g: usize, u: usize) -> Result<Coalition> {
    backtrace_from(table, table.n, g, u)
}

/// A coalition `S ⊆ {1..k}` attaining cell `(k, g, u)`. When both branches of
/// the recurrence tie, player `k` is left out.
pub fn backtrace_from(table: &DpTable, k: usize, g: usize, u: usize) -> Result<Coalition> {
    let (mut g, mut u) = (g, u);
    let mut current = table
        .get(k, g, u)
        .cloned()
        .ok_or_else(|| Error::InfiniteCell(format!("(k={k}, g={g}, U={u})")))?;
    let mut s = Coalition::empty();
    for k in (1..=k).rev() {
        if table.get(k - 1, g, u) == Some(&current) {
            continue;
        }
        let w = table.weights[k - 1] as usize;
        g = (g + table.residues - table.shift(k - 1)) % table.residues;
        u -= w;
        current -= &table.x[k - 1];
        debug_assert_eq!(table.get(k - 1, g, u), Some(&current));
        s.insert(k - 1);
    }
    Ok(s)
}

/// `(p, t)` index of a level-`j ≥ 2` constraint family; `t` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Family {
    pub prime: u64,
    pub index: usize,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prime, self.index)
    }
}

/// A violated coalition inequality `x(S) ≥ ν(S) + threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionCut {
    pub coalition: Coalition,
    /// Level of the constraint family the coalition was drawn from.
    pub level: usize,
    /// `ν(S)`.
    pub value: u8,
    /// The `ε` the inequality was checked against.
    pub threshold: Rational,
    /// `true` when `threshold` is a fixed earlier-level `ε_i` rather than the
    /// queried value.
    pub frozen: bool,
    /// `None` for the level-1 family.
    pub family: Option<Family>,
}

impl CoalitionCut {
    pub fn rhs(&self) -> Rational {
        int(self.value.into()) + &self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `x_i < 0` (0-based player).
    Negative { player: usize },
    /// `x(N) ≠ ν(N)`.
    Efficiency,
    Coalition(CoalitionCut),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationVerdict {
    Feasible,
    Infeasible(Violation),
}

impl SeparationVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SeparationVerdict::Feasible)
    }

    pub fn cut(&self) -> Option<&CoalitionCut> {
        match self {
            SeparationVerdict::Infeasible(Violation::Coalition(c)) => Some(c),
            _ => None,
        }
    }
}

impl From<Option<CoalitionCut>> for SeparationVerdict {
    fn from(cut: Option<CoalitionCut>) -> Self {
        match cut {
            Some(c) => SeparationVerdict::Infeasible(Violation::Coalition(c)),
            None => SeparationVerdict::Feasible,
        }
    }
}

// ---------------------------------------------------------------------------
// Scaled-integer scan used by the solver.

pub(crate) trait DpCost: Clone + Ord {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
}

impl DpCost for i32 {
    fn zero() -> Self {
        0
    }
    #[inline]
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
}

impl DpCost for i64 {
    fn zero() -> Self {
        0
    }
    #[inline]
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
}

impl DpCost for i128 {
    fn zero() -> Self {
        0
    }
    #[inline]
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
}

impl DpCost for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
}

/// `x` and the two bounds multiplied by a common denominator.
///
/// `inf` stands for `+∞`; any value `≥ big` is treated as infinite. With
/// `M = Σ|a_i| + |win| + |lose| + 1`, `big = 2M` and `inf = 4M`, so finite
/// sums stay below `M` and sums seeded from `inf` stay above `3M`.
pub(crate) struct Scaled<T> {
    a: Vec<T>,
    lose: T,
    win: T,
    inf: T,
}

pub(crate) enum AnyScaled {
    Tiny(Scaled<i32>),
    Small(Scaled<i64>),
    Wide(Scaled<i128>),
    Big(Scaled<BigInt>),
}

pub(crate) fn scale(x: &[Rational], threshold: &Rational) -> AnyScaled {
    let denom = x
        .iter()
        .chain(std::iter::once(threshold))
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let a: Vec<BigInt> = x.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
    let lose = threshold.numer() * (&denom / threshold.denom());
    let win = &lose + &denom;
    let m: BigInt = a.iter().map(|v| v.abs()).sum::<BigInt>() + win.abs() + lose.abs() + 1;
    let inf: BigInt = &m * 4;
    let limit: BigInt = &m * 5;
    if limit.to_i32().is_some() {
        let cv = |v: &BigInt| v.to_i32().unwrap();
        AnyScaled::Tiny(Scaled {
            a: a.iter().map(cv).collect(),
            lose: cv(&lose),
            win: cv(&win),
            inf: cv(&inf),
        })
    } else if limit.to_i64().is_some() {
        let cv = |v: &BigInt| v.to_i64().unwrap();
        AnyScaled::Small(Scaled {
            a: a.iter().map(cv).collect(),
            lose: cv(&lose),
            win: cv(&win),
            inf: cv(&inf),
        })
    } else if limit.to_i128().is_some() {
        let cv = |v: &BigInt| v.to_i128().unwrap();
        AnyScaled::Wide(Scaled {
            a: a.iter().map(cv).collect(),
            lose: cv(&lose),
            win: cv(&win),
            inf: cv(&inf),
        })
    } else {
        AnyScaled::Big(Scaled { a, lose, win, inf })
    }
}

/// Shape of a capped table: states `u = min(w(S), cap)` with
/// `cap = min(W, w(N))`, so state `cap` stands for "at least `W`" whenever
/// `W ≤ w(N)`.
#[derive(Clone, Copy)]
pub(crate) struct CappedShape {
    residues: usize,
    width: usize,
    quota: u64,
}

impl CappedShape {
    pub(crate) fn new(instance: &Instance, residues: usize) -> Self {
        let cap = instance.quota().min(instance.total_weight()) as usize;
        CappedShape {
            residues,
            width: cap + 1,
            quota: instance.quota(),
        }
    }

    fn cap(&self) -> usize {
        self.width - 1
    }

    fn cells(&self) -> usize {
        self.residues * self.width
    }
}

/// One 0/1-knapsack step: fold player with weight `w`, residue shift
/// `shift` and cost `a` into `old`, writing `new`.
fn step<T: DpCost>(shape: CappedShape, old: &[T], new: &mut [T], w: u64, shift: usize, a: &T) {
    let width = shape.width;
    let cap = shape.cap();
    let w = w.min(cap as u64 + 1) as usize;
    let p = shape.residues;
    for g2 in 0..p {
        let g = (g2 + p - shift % p) % p;
        let keep = &old[g2 * width..(g2 + 1) * width];
        let src = &old[g * width..(g + 1) * width];
        let dst = &mut new[g2 * width..(g2 + 1) * width];
        // Uncapped part: u + w < cap.
        let split = w.min(cap);
        dst[..split].clone_from_slice(&keep[..split]);
        for ((d, k), s) in dst[split..cap].iter_mut().zip(&keep[split..cap]).zip(&src[..cap - split]) {
            *d = k.clone().min(s.plus(a));
        }
        // Everything with u + w ≥ cap lands in the cap state.
        let from = cap.saturating_sub(w);
        let best = src[from..].iter().min().expect("nonempty row").plus(a);
        dst[cap] = keep[cap].clone().min(best);
    }
}

fn initial<T: DpCost>(shape: CappedShape, sc: &Scaled<T>) -> Vec<T> {
    let mut layer = vec![sc.inf.clone(); shape.cells()];
    layer[0] = T::zero();
    layer
}

/// The most violated final-layer cell `(g, u)`, if any. Only `g ≠ 0` counts
/// for modular scans.
fn worst_cell<T: DpCost>(shape: CappedShape, sc: &Scaled<T>, layer: &[T], modular: bool) -> Option<(usize, usize)> {
    let mut worst: Option<(T, usize, usize)> = None;
    for u in 0..shape.width {
        let bound = if u as u64 >= shape.quota { &sc.win } else { &sc.lose };
        for g in usize::from(modular)..shape.residues {
            let cell = &layer[g * shape.width + u];
            if cell < bound {
                let slack = cell.minus(bound);
                if worst.as_ref().is_none_or(|(s, _, _)| slack < *s) {
                    worst = Some((slack, g, u));
                }
            }
        }
    }
    worst.map(|(_, g, u)| (g, u))
}

fn shifts(instance: &Instance, v: Option<&ModVector>) -> Vec<usize> {
    match v {
        Some(v) => v.entries().iter().map(|&e| e as usize).collect(),
        None => vec![0; instance.n()],
    }
}

/// Final layer only (rolling buffers).
fn scan<T: DpCost>(instance: &Instance, sc: &Scaled<T>, v: Option<&ModVector>) -> Option<(usize, usize)> {
    let shape = CappedShape::new(instance, v.map_or(1, |v| v.modulus() as usize));
    let shift = shifts(instance, v);
    let mut old = initial(shape, sc);
    let mut new = old.clone();
    for k in 0..instance.n() {
        step(shape, &old, &mut new, instance.weights()[k], shift[k], &sc.a[k]);
        std::mem::swap(&mut old, &mut new);
    }
    worst_cell(shape, sc, &old, v.is_some())
}

/// Rebuild every layer and backtrace the coalition for `(g, u)`.
fn witness<T: DpCost>(instance: &Instance, sc: &Scaled<T>, v: Option<&ModVector>, g: usize, u: usize) -> Coalition {
    let shape = CappedShape::new(instance, v.map_or(1, |v| v.modulus() as usize));
    let shift = shifts(instance, v);
    let n = instance.n();
    let mut layers = Vec::with_capacity(n + 1);
    layers.push(initial(shape, sc));
    for k in 0..n {
        let mut next = layers[k].clone();
        step(shape, &layers[k], &mut next, instance.weights()[k], shift[k], &sc.a[k]);
        layers.push(next);
    }
    let width = shape.width;
    let cap = shape.cap();
    let (mut g, mut u) = (g, u);
    let mut s = Coalition::empty();
    for k in (1..=n).rev() {
        let here = &layers[k][g * width + u];
        if *here == layers[k - 1][g * width + u] {
            continue;
        }
        let w = instance.weights()[k - 1].min(cap as u64 + 1) as usize;
        let g_prev = (g + shape.residues - shift[k - 1]) % shape.residues;
        let row = &layers[k - 1][g_prev * width..(g_prev + 1) * width];
        let u_prev = (0..width)
            .find(|&up| (up + w).min(cap) == u && row[up].plus(&sc.a[k - 1]) == *here)
            .expect("table cell has no predecessor");
        s.insert(k - 1);
        g = g_prev;
        u = u_prev;
    }
    debug_assert_eq!((g, u), (0, 0));
    s
}

fn scan_any(instance: &Instance, scaled: &AnyScaled, v: Option<&ModVector>) -> Option<Coalition> {
    match scaled {
        AnyScaled::Tiny(sc) => scan(instance, sc, v).map(|(g, u)| witness(instance, sc, v, g, u)),
        AnyScaled::Small(sc) => scan(instance, sc, v).map(|(g, u)| witness(instance, sc, v, g, u)),
        AnyScaled::Wide(sc) => scan(instance, sc, v).map(|(g, u)| witness(instance, sc, v, g, u)),
        AnyScaled::Big(sc) => scan(instance, sc, v).map(|(g, u)| witness(instance, sc, v, g, u)),
    }
}

/// Every coalition with `x(S) < ν(S) + threshold`, most violated first, or
/// `None` if there are more than `limit` of them.
///
/// A backward table `G_k[u]`, the least slack any completion of a prefix
/// state can reach, prunes a depth-first enumeration so that every visited
/// node leads to an output.
pub(crate) fn violated_coalitions(
    instance: &Instance,
    x: &[Rational],
    threshold: &Rational,
    limit: usize,
) -> Option<Vec<Coalition>> {
    match scale(x, threshold) {
        AnyScaled::Tiny(sc) => enumerate(instance, &sc, limit),
        AnyScaled::Small(sc) => enumerate(instance, &sc, limit),
        AnyScaled::Wide(sc) => enumerate(instance, &sc, limit),
        AnyScaled::Big(sc) => enumerate(instance, &sc, limit),
    }
}

struct Enumeration<'a, T> {
    weights: &'a [u64],
    a: &'a [T],
    /// `g[k * width + u]`.
    g: Vec<T>,
    width: usize,
    cap: usize,
    limit: usize,
    found: Vec<(T, Coalition)>,
    overflow: bool,
}

impl<T: DpCost> Enumeration<'_, T> {
    fn next_state(&self, k: usize, u: usize) -> usize {
        (u as u64 + self.weights[k]).min(self.cap as u64) as usize
    }

    fn visit(&mut self, k: usize, u: usize, cost: T, chosen: &mut Vec<usize>) {
        if self.overflow || cost.plus(&self.g[k * self.width + u]) >= T::zero() {
            return;
        }
        if k == self.weights.len() {
            if self.found.len() == self.limit {
                self.overflow = true;
                return;
            }
            let slack = cost.plus(&self.g[k * self.width + u]);
            self.found.push((slack, Coalition::from_members(chosen.iter().copied())));
            return;
        }
        self.visit(k + 1, u, cost.clone(), chosen);
        chosen.push(k);
        let next = self.next_state(k, u);
        self.visit(k + 1, next, cost.plus(&self.a[k]), chosen);
        chosen.pop();
    }
}

fn enumerate<T: DpCost>(instance: &Instance, sc: &Scaled<T>, limit: usize) -> Option<Vec<Coalition>> {
    let shape = CappedShape::new(instance, 1);
    let (width, cap, n) = (shape.width, shape.cap(), instance.n());
    let mut g = vec![T::zero(); (n + 1) * width];
    for u in 0..width {
        let bound = if u as u64 >= shape.quota { &sc.win } else { &sc.lose };
        g[n * width + u] = T::zero().minus(bound);
    }
    for k in (0..n).rev() {
        for u in 0..width {
            let next = (u as u64 + instance.weights()[k]).min(cap as u64) as usize;
            let skip = g[(k + 1) * width + u].clone();
            let take = sc.a[k].plus(&g[(k + 1) * width + next]);
            g[k * width + u] = skip.min(take);
        }
    }
    let mut e = Enumeration {
        weights: instance.weights(),
        a: &sc.a,
        g,
        width,
        cap,
        limit,
        found: Vec::new(),
        overflow: false,
    };
    e.visit(0, 0, T::zero(), &mut Vec::new());
    if e.overflow {
        return None;
    }
    e.found.sort_by(|p, q| p.0.cmp(&q.0));
    Some(e.found.into_iter().map(|(_, s)| s).collect())
}

/// Scan one family: the level-1 family when `basis` is `None`, otherwise the
/// family of level `basis.level() + 1`. Families are tried in order of
/// increasing `p`, then `t`; within the first violated family the most
/// violated coalition is returned.
pub(crate) fn scan_level(
    instance: &Instance,
    x: &[Rational],
    threshold: &Rational,
    basis: Option<&BasisFamily>,
    frozen: bool,
) -> Option<CoalitionCut> {
    let scaled = scale(x, threshold);
    let make = |coalition: Coalition, level: usize, family: Option<Family>| CoalitionCut {
        value: instance.value(&coalition),
        coalition,
        level,
        threshold: threshold.clone(),
        frozen,
        family,
    };
    match basis {
        None => scan_any(instance, &scaled, None).map(|s| make(s, 1, None)),
        Some(basis) => basis.families().find_map(|(p, t, v)| {
            scan_any(instance, &scaled, Some(v))
                .map(|s| make(s, basis.level() + 1, Some(Family { prime: p, index: t })))
        }),
    }
}

/// Level-1 separation: every coalition, `x(S) ≥ ν(S) + eps`.
///
/// Losing coalitions are checked against `eps` as well as winning ones
/// against `1 + eps`; both bounds come out of the same table.
pub fn separate_level1(instance: &Instance, x: &[Rational], eps: &Rational) -> SeparationVerdict {
    scan_level(instance, x, eps, None, false).into()
}

/// Separation over the level-`j` family, `j = basis.level() + 1`: coalitions
/// with `⟨v, χ(S)⟩ ≢ 0 (mod p)` for some stored `(p, v)`.
pub fn separate_level_j(
    instance: &Instance,
    x: &[Rational],
    eps: &Rational,
    basis: &BasisFamily,
) -> SeparationVerdict {
    scan_level(instance, x, eps, Some(basis), false).into()
}

/// Base constraints `x ≥ 0` and `x(N) = ν(N)`.
pub fn check_base(instance: &Instance, x: &[Rational]) -> Option<Violation> {
    if let Some(player) = x.iter().position(|v| v.is_negative()) {
        return Some(Violation::Negative { player });
    }
    let total: BigRational = x.iter().sum();
    (total != int(instance.grand_value().into())).then_some(Violation::Efficiency)
}

/// Membership of `(x, eps)` in the level-`level` program: the base
/// constraints, then every earlier family `i < level` at its fixed `ε_i`,
/// then the level-`level` family at `eps`.
///
/// `history[i - 1]` describes level `i`; it must cover levels
/// `1..level − 1`.
pub fn full_separate(
    instance: &Instance,
    x: &[Rational],
    eps: &Rational,
    history: &[LevelState],
    level: usize,
) -> SeparationVerdict {
    assert!(level >= 1 && history.len() >= level - 1, "history too short");
    if let Some(v) = check_base(instance, x) {
        return SeparationVerdict::Infeasible(v);
    }
    for i in 1..=level {
        let frozen = i < level;
        let threshold = if frozen { &history[i - 1].eps } else { eps };
        let basis = if i == 1 {
            None
        } else {
            Some(
                history[i - 2]
                    .basis
                    .as_ref()
                    .expect("levels below n carry a basis"),
            )
        };
        if let Some(cut) = scan_level(instance, x, threshold, basis, frozen) {
            return SeparationVerdict::Infeasible(Violation::Coalition(cut));
        }
    }
    SeparationVerdict::Feasible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rat;
    use crate::modlinalg::orth_basis;
    use crate::primes::prime_set;

    fn inst(w: &[u64], q: u64) -> Instance {
        Instance::new(w.to_vec(), q).unwrap()
    }

    /// Enumeration oracle for a single cell.
    fn brute_cell(w: &[u64], x: &[Rational], v: Option<(&[u64], u64)>, k: usize, g: u64, u: u64) -> Option<Rational> {
        (0u64..1 << k)
            .filter(|m| {
                let weight: u64 = (0..k).filter(|i| m >> i & 1 == 1).map(|i| w[i]).sum();
                let res = v.map_or(0, |(v, p)| {
                    (0..k).filter(|i| m >> i & 1 == 1).map(|i| v[i]).sum::<u64>() % p
                });
                weight == u && res == g
            })
            .map(|m| (0..k).filter(|i| m >> i & 1 == 1).map(|i| x[i].clone()).sum())
            .min()
    }

    #[test]
    fn plain_table_examples() {
        let g = inst(&[1, 2], 2);
        let x = vec![rat(1, 4), rat(3, 4)];
        let t = dp_min_table(&g, &x);
        assert_eq!(t.get(2, 0, 3), Some(&rat(1, 1)));
        assert_eq!(t.get(2, 0, 2), Some(&rat(3, 4)));
        assert_eq!(t.get(2, 0, 0), Some(&rat(0, 1)));
        for k in 0..=2 {
            for u in 0..=3 {
                assert_eq!(t.get(k, 0, u).cloned(), brute_cell(&[1, 2], &x, None, k, 0, u as u64));
            }
        }
        assert_eq!(backtrace_witness(&t, 0, 2).unwrap(), Coalition::from_members([1]));
        assert_eq!(backtrace_witness(&t, 0, 0).unwrap(), Coalition::empty());

        let zeros = inst(&[0, 0], 1);
        let t = dp_min_table(&zeros, &[rat(1, 2), rat(1, 2)]);
        assert_eq!(t.get(2, 0, 0), Some(&rat(0, 1)));
    }

    #[test]
    fn full_weight_cell_bounded_by_grand_value() {
        let g = inst(&[3, 0, 2, 0], 4);
        let x = vec![rat(1, 2), rat(1, 6), rat(1, 3), rat(0, 1)];
        let t = dp_min_table(&g, &x);
        assert!(t.get(4, 0, 5).unwrap() <= &rat(1, 1));
    }

    #[test]
    fn modular_table_examples() {
        let g = inst(&[1, 1], 2);
        let x = vec![rat(1, 2), rat(1, 2)];
        let v = ModVector::new(2, vec![1, 0]);
        let t = dp_min_table_mod(&g, &x, &v);
        assert_eq!(t.get(2, 1, 1), Some(&rat(1, 2)));
        assert_eq!(t.get(2, 0, 0), Some(&rat(0, 1)));
        assert_eq!(backtrace_witness(&t, 0, 0).unwrap(), Coalition::empty());
        assert_eq!(backtrace_witness(&t, 1, 1).unwrap(), Coalition::from_members([0]));
        assert!(matches!(backtrace_witness(&t, 1, 0), Err(Error::InfiniteCell(_))));

        let zero = ModVector::zero(3, 2);
        let t = dp_min_table_mod(&g, &x, &zero);
        for k in 0..=2 {
            for gg in 1..3 {
                for u in 0..=2 {
                    assert_eq!(t.get(k, gg, u), None);
                }
            }
        }
    }

    #[test]
    fn empty_prefix_row() {
        let g = inst(&[2, 1, 3], 3);
        let x = vec![rat(1, 3); 3];
        let t = dp_min_table_mod(&g, &x, &ModVector::new(5, vec![1, 2, 3]));
        for gg in 0..5 {
            for u in 0..=6 {
                assert_eq!(t.get(0, gg, u).is_some(), gg == 0 && u == 0);
            }
        }
    }

    #[test]
    fn level1_examples() {
        let maj = inst(&[1, 1, 1], 2);
        let x = vec![rat(1, 3); 3];
        assert!(separate_level1(&maj, &x, &rat(-1, 3)).is_feasible());
        let verdict = separate_level1(&maj, &x, &rat(0, 1));
        let cut = verdict.cut().expect("violated");
        assert_eq!(cut.coalition.len(), 2);
        assert_eq!(cut.value, 1);
        assert!(cut.coalition.sum_of(&x) < cut.rhs());

        let single = inst(&[1], 1);
        assert!(separate_level1(&single, &[rat(1, 1)], &rat(0, 1)).is_feasible());
    }

    #[test]
    fn level_j_examples() {
        let pair = inst(&[1, 1], 2);
        let x = vec![rat(1, 2), rat(1, 2)];
        // The F2 complement of span{(1,1)} is spanned by (1,1).
        let v = orth_basis(&[vec![1, 1]], 2, 2);
        assert_eq!(v, vec![ModVector::new(2, vec![1, 1])]);
        let basis = BasisFamily::from_parts(1, vec![(2, v)]);
        assert!(separate_level_j(&pair, &x, &rat(1, 2), &basis).is_feasible());
        let verdict = separate_level_j(&pair, &x, &rat(3, 5), &basis);
        let cut = verdict.cut().unwrap();
        assert_eq!(cut.coalition.len(), 1);
        assert_eq!(cut.level, 2);
        assert_eq!(cut.family, Some(Family { prime: 2, index: 1 }));

        let degenerate = BasisFamily::from_parts(1, vec![(2, vec![ModVector::zero(2, 2)])]);
        assert!(separate_level_j(&pair, &x, &rat(100, 1), &degenerate).is_feasible());
    }

    #[test]
    fn full_separate_base_violations() {
        let maj = inst(&[1, 1, 1], 2);
        let bad = vec![rat(-1, 3), rat(2, 3), rat(2, 3)];
        assert_eq!(
            full_separate(&maj, &bad, &rat(-1, 1), &[], 1),
            SeparationVerdict::Infeasible(Violation::Negative { player: 0 })
        );
        let short = vec![rat(1, 3), rat(1, 3), rat(0, 1)];
        assert_eq!(
            full_separate(&maj, &short, &rat(-1, 1), &[], 1),
            SeparationVerdict::Infeasible(Violation::Efficiency)
        );
        let x = vec![rat(1, 3); 3];
        for eps in [rat(-1, 3), rat(0, 1), rat(-1, 2)] {
            assert_eq!(
                full_separate(&maj, &x, &eps, &[], 1),
                separate_level1(&maj, &x, &eps)
            );
        }
    }

    #[test]
    fn full_separate_level_two() {
        let pair = inst(&[1, 1], 2);
        let primes = prime_set(2);
        let level1 = LevelState::for_test(1, rat(0, 1), vec![vec![1, 1]], &primes, 2);
        let x = vec![rat(1, 2), rat(1, 2)];
        assert!(full_separate(&pair, &x, &rat(1, 2), &[level1.clone()], 2).is_feasible());
        let v = full_separate(&pair, &x, &rat(3, 5), &[level1], 2);
        assert!(!v.cut().unwrap().frozen);
    }

    #[test]
    fn capped_scan_matches_rational_table() {
        let g = inst(&[3, 1, 4, 1, 5], 7);
        let x = vec![rat(1, 5), rat(0, 1), rat(2, 5), rat(1, 10), rat(3, 10)];
        let eps = rat(-1, 10);
        let table = dp_min_table(&g, &x);
        let by_table = (0..=table.max_weight()).any(|u| {
            let bound = if u as u64 >= g.quota() { rat(9, 10) } else { eps.clone() };
            table.get(5, 0, u).is_some_and(|c| *c < bound)
        });
        assert_eq!(separate_level1(&g, &x, &eps).is_feasible(), !by_table);
    }

    #[test]
    fn enumeration_lists_every_violation() {
        let g = inst(&[3, 1, 4, 1, 5], 7);
        let x = vec![rat(1, 5), rat(0, 1), rat(2, 5), rat(1, 10), rat(3, 10)];
        for eps in [rat(-1, 10), rat(0, 1), rat(1, 10), rat(-1, 1)] {
            let listed = violated_coalitions(&g, &x, &eps, 1 << 10).unwrap();
            let expected: Vec<Coalition> = (0u64..32)
                .map(Coalition::from_mask)
                .filter(|s| s.sum_of(&x) < int(g.value(s).into()) + &eps)
                .collect();
            assert_eq!(listed.len(), expected.len(), "eps = {eps}");
            assert!(expected.iter().all(|s| listed.contains(s)));
            let slack = |s: &Coalition| s.sum_of(&x) - int(g.value(s).into());
            assert!(listed.windows(2).all(|w| slack(&w[0]) <= slack(&w[1])));
        }
        assert!(violated_coalitions(&g, &x, &rat(1, 1), 3).is_none());
    }

    #[test]
    fn scaled_widths() {
        assert!(matches!(scale(&[rat(1, 3)], &rat(0, 1)), AnyScaled::Tiny(_)));
        let mid = Rational::new(BigInt::one(), BigInt::from(1u64 << 40));
        assert!(matches!(scale(&[mid], &rat(0, 1)), AnyScaled::Small(_)));
        let huge = Rational::new(BigInt::one(), BigInt::from(1u128 << 70));
        assert!(matches!(scale(&[huge.clone()], &rat(0, 1)), AnyScaled::Wide(_)));
        let huger = Rational::new(BigInt::one(), BigInt::from(1u128 << 126));
        assert!(matches!(scale(&[huger], &rat(0, 1)), AnyScaled::Big(_)));
    }

    #[test]
    fn wide_and_big_paths_agree() {
        let g = inst(&[2, 3, 1, 4], 5);
        let d = BigInt::from(1u128 << 100) + 7;
        let x: Vec<Rational> = [1, 2, 3, 4]
            .iter()
            .map(|&k| Rational::new(BigInt::from(k), BigInt::from(10)))
            .collect();
        let tiny = Rational::new(BigInt::one(), d);
        let eps = rat(-1, 5) + &tiny;
        let expected = separate_level1(&g, &x, &rat(-1, 5));
        let fancy = separate_level1(&g, &x, &eps);
        // S = {1,2} gives x(S) = 3/10 ≥ 1 − 1/5 is false, so both are violated.
        assert!(!expected.is_feasible() && !fancy.is_feasible());
    }
}
