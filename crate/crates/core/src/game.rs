//! Weighted voting games: instances, coalitions, allocations and excesses.
//!
//! Players are addressed by 0-based index in the API. Serialized forms
//! (instance files, solver reports) list players 1-based.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number used for every payoff and excess.
pub type Rational = BigRational;

/// Largest player count for which the crate enumerates all `2^n` coalitions.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

#[cfg(test)]
pub(crate) fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// A weighted voting game `[W; w_1, ..., w_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    weights: Vec<u64>,
    quota: u64,
    name: Option<String>,
    total_weight: u64,
}

/// On-disk shape of an instance; `n` is redundant and checked against the
/// weight list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: u64,
    weights: Vec<u64>,
    quota: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.n != file.weights.len() as u64 {
            return Err(Error::InvalidInstance(format!(
                "n = {} but {} weights given",
                file.n,
                file.weights.len()
            )));
        }
        let mut inst = Instance::new(file.weights, file.quota)?;
        inst.name = file.name;
        Ok(inst)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            n: inst.weights.len() as u64,
            weights: inst.weights,
            quota: inst.quota,
            name: inst.name,
        }
    }
}

impl Instance {
    pub fn new(weights: Vec<u64>, quota: u64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInstance("a game needs at least one player".into()));
        }
        let total_weight = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or_else(|| Error::InvalidInstance("total weight overflows u64".into()))?;
        Ok(Instance {
            weights,
            quota,
            name: None,
            total_weight,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn quota(&self) -> u64 {
        self.quota
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::full(self.n())
    }

    pub fn weight_of(&self, s: &Coalition) -> u64 {
        s.members().map(|i| self.weights[i]).sum()
    }

    /// The characteristic function: 1 if `s` meets the quota, else 0.
    pub fn value(&self, s: &Coalition) -> u8 {
        u8::from(self.weight_of(s) >= self.quota)
    }

    /// `ν(N)`.
    pub fn grand_value(&self) -> u8 {
        u8::from(self.total_weight >= self.quota)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

/// `value(instance, s)` as a free function.
pub fn value(instance: &Instance, s: &Coalition) -> u8 {
    instance.value(s)
}

/// A set of players, stored as a bit set.
///
/// One `u64` word covers 64 players; larger games use additional words.
/// Trailing zero words are trimmed so that equal sets compare equal
/// regardless of how they were built.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition {
    words: Vec<u64>,
}

impl Coalition {
    pub fn empty() -> Self {
        Coalition::default()
    }

    /// `{0, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n / 64];
        if n % 64 != 0 {
            words.push((1u64 << (n % 64)) - 1);
        }
        Coalition { words }
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut c = Coalition { words: vec![mask] };
        c.trim();
        c
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut c = Coalition::empty();
        for i in members {
            c.insert(i);
        }
        c
    }

    /// Inverse of [`Coalition::characteristic_vector`].
    pub fn from_characteristic(chi: &[u8]) -> Self {
        Coalition::from_members(chi.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i))
    }

    /// Low 64 bits; exact whenever every member index is below 64.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn insert(&mut self, i: usize) {
        let w = i / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if let Some(word) = self.words.get_mut(i / 64) {
            *word &= !(1 << (i % 64));
        }
        self.trim();
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|word| word & (1 << (i % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Members in increasing order.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// `χ(S) ∈ {0,1}^n`.
    pub fn characteristic_vector(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| u8::from(self.contains(i))).collect()
    }

    /// 1-based player labels, as used in serialized output.
    pub fn labels(&self) -> Vec<usize> {
        self.members().map(|i| i + 1).collect()
    }

    /// `x(S)`.
    pub fn sum_of(&self, x: &[Rational]) -> Rational {
        self.members().fold(Rational::zero(), |acc, i| acc + &x[i])
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// A payoff vector with `x ≥ 0` and `x(N) = ν(N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    values: Vec<Rational>,
}

impl Allocation {
    pub fn new(instance: &Instance, values: Vec<Rational>) -> Result<Self> {
        if values.len() != instance.n() {
            return Err(Error::LengthMismatch {
                expected: instance.n(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return Err(Error::InvalidAllocation(format!(
                "x_{} = {} is negative",
                i + 1,
                values[i]
            )));
        }
        let total: Rational = values.iter().sum();
        if total != int(instance.grand_value().into()) {
            return Err(Error::InvalidAllocation(format!(
                "x(N) = {total} but ν(N) = {}",
                instance.grand_value()
            )));
        }
        Ok(Allocation { values })
    }

    /// The equal split `ν(N)/n` for every player.
    pub fn uniform(instance: &Instance) -> Self {
        let share = Rational::new(
            BigInt::from(instance.grand_value()),
            BigInt::from(instance.n()),
        );
        Allocation {
            values: vec![share; instance.n()],
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.values[i]
    }
}

/// `x(S) − ν(S)`.
pub fn excess(instance: &Instance, x: &Allocation, s: &Coalition) -> Rational {
    s.sum_of(x.values()) - int(instance.value(s).into())
}

/// All `2^n` excesses, sorted non-decreasingly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcessVector {
    entries: Vec<Rational>,
}

impl ExcessVector {
    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn excess_vector(instance: &Instance, x: &Allocation) -> Result<ExcessVector> {
    excess_vector_with_limit(instance, x, DEFAULT_ENUMERATION_LIMIT)
}

pub fn excess_vector_with_limit(
    instance: &Instance,
    x: &Allocation,
    limit: usize,
) -> Result<ExcessVector> {
    let n = instance.n();
    if n > limit || n >= 64 {
        return Err(Error::SizeLimit { n, limit });
    }
    // Scale to a common denominator so the 2^n subset sums are integer adds.
    let denom = x
        .values()
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let scaled: Vec<BigInt> = x
        .values()
        .iter()
        .map(|v| v.numer() * (&denom / v.denom()))
        .collect();
    let size = 1usize << n;
    let mut sums = vec![BigInt::zero(); size];
    let mut weights = vec![0u64; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        sums[mask] = &sums[rest] + &scaled[low];
        weights[mask] = weights[rest] + instance.weights()[low];
    }
    let mut entries: Vec<Rational> = sums
        .into_iter()
        .zip(weights)
        .map(|(s, w)| {
            let win = u8::from(w >= instance.quota());
            Rational::new(s - &denom * BigInt::from(win), denom.clone())
        })
        .collect();
    entries.sort();
    Ok(ExcessVector { entries })
}

/// Lexicographic comparison of two sorted excess vectors.
pub fn lex_compare(a: &ExcessVector, b: &ExcessVector) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.entries.cmp(&b.entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn majority() -> Instance {
        Instance::new(vec![1, 1, 1], 2).unwrap()
    }

    fn third() -> Rational {
        rat(1, 3)
    }

    #[test]
    fn value_examples() {
        let g = majority();
        assert_eq!(g.value(&Coalition::from_members([0, 1])), 1);
        assert_eq!(g.value(&Coalition::empty()), 0);

        let mut w = vec![7; 5];
        w.extend(vec![1; 10]);
        let unsc = Instance::new(w, 39).unwrap();
        let s = Coalition::from_members((0..5).chain(5..9));
        assert_eq!(unsc.weight_of(&s), 39);
        assert_eq!(unsc.value(&s), 1);
        let short = Coalition::from_members((0..5).chain(5..8));
        assert_eq!(unsc.value(&short), 0);
    }

    #[test]
    fn excess_examples() {
        let g = majority();
        let x = Allocation::new(&g, vec![third(), third(), third()]).unwrap();
        assert_eq!(excess(&g, &x, &Coalition::from_members([0, 1])), rat(-1, 3));
        assert_eq!(excess(&g, &x, &g.grand_coalition()), Rational::zero());
        assert_eq!(excess(&g, &x, &Coalition::empty()), Rational::zero());
    }

    #[test]
    fn excess_vector_examples() {
        let single = Instance::new(vec![1], 1).unwrap();
        let x = Allocation::new(&single, vec![int(1)]).unwrap();
        let ev = excess_vector(&single, &x).unwrap();
        assert_eq!(ev.entries(), &[Rational::zero(), Rational::zero()]);

        let pair = Instance::new(vec![1, 1], 2).unwrap();
        let x = Allocation::new(&pair, vec![rat(1, 2), rat(1, 2)]).unwrap();
        let ev = excess_vector(&pair, &x).unwrap();
        assert_eq!(
            ev.entries(),
            &[Rational::zero(), Rational::zero(), rat(1, 2), rat(1, 2)]
        );

        let g = majority();
        let x = Allocation::uniform(&g);
        let ev = excess_vector(&g, &x).unwrap();
        assert_eq!(ev.len(), 8);
        assert_eq!(ev.entries()[0], rat(-1, 3));
    }

    #[test]
    fn excess_vector_rejects_large_n() {
        let g = Instance::new(vec![1; 17], 9).unwrap();
        let x = Allocation::uniform(&g);
        assert!(matches!(
            excess_vector(&g, &x),
            Err(Error::SizeLimit { n: 17, limit: 16 })
        ));
    }

    #[test]
    fn lex_compare_examples() {
        let pair = Instance::new(vec![1, 1], 2).unwrap();
        let nuc = Allocation::new(&pair, vec![rat(1, 2), rat(1, 2)]).unwrap();
        let a = excess_vector(&pair, &nuc).unwrap();
        assert_eq!(lex_compare(&a, &a).unwrap(), Ordering::Equal);

        let g = majority();
        let fair = excess_vector(&g, &Allocation::uniform(&g)).unwrap();
        let skew = Allocation::new(&g, vec![rat(1, 2), rat(1, 2), Rational::zero()]).unwrap();
        let skew = excess_vector(&g, &skew).unwrap();
        assert_eq!(skew.entries()[0], rat(-1, 2));
        assert_eq!(lex_compare(&fair, &skew).unwrap(), Ordering::Greater);

        for k in 0..=10 {
            let y = Allocation::new(&pair, vec![rat(k, 10), rat(10 - k, 10)]).unwrap();
            let b = excess_vector(&pair, &y).unwrap();
            assert_ne!(lex_compare(&a, &b).unwrap(), Ordering::Less);
        }

        let short = excess_vector(&Instance::new(vec![1], 1).unwrap(), &Allocation::new(
            &Instance::new(vec![1], 1).unwrap(),
            vec![int(1)],
        ).unwrap())
        .unwrap();
        assert!(matches!(lex_compare(&a, &short), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn allocation_validation() {
        let g = majority();
        assert!(Allocation::new(&g, vec![int(1), int(0)]).is_err());
        assert!(Allocation::new(&g, vec![int(2), rat(-1, 1), int(0)]).is_err());
        assert!(Allocation::new(&g, vec![int(1), int(1), int(0)]).is_err());
        let dead = Instance::new(vec![1, 1], 5).unwrap();
        assert!(Allocation::new(&dead, vec![int(0), int(0)]).is_ok());
    }

    #[test]
    fn coalition_bitset_beyond_64_players() {
        let mut c = Coalition::from_members([3, 70, 129]);
        assert!(c.contains(70) && c.contains(129) && !c.contains(64));
        assert_eq!(c.members().collect::<Vec<_>>(), vec![3, 70, 129]);
        c.remove(129);
        c.remove(70);
        assert_eq!(c, Coalition::from_mask(1 << 3));
        assert_eq!(Coalition::full(130).len(), 130);
        assert_eq!(Coalition::full(64).len(), 64);
    }

    #[test]
    fn instance_json_validation() {
        let ok = Instance::from_json(r#"{"n":3,"weights":[1,1,1],"quota":2,"name":"maj"}"#).unwrap();
        assert_eq!(ok.name(), Some("maj"));
        assert_eq!(ok.total_weight(), 3);
        assert!(Instance::from_json(r#"{"n":2,"weights":[1,1,1],"quota":2}"#).is_err());
        assert!(Instance::from_json(r#"{"n":3,"weights":[1,-1,1],"quota":2}"#).is_err());
        assert!(Instance::from_json(r#"{"n":3,"weights":[1,1.5,1],"quota":2}"#).is_err());
        assert!(Instance::from_json(r#"{"n":3,"weights":[1,1,1],"quota":-2}"#).is_err());
        assert!(Instance::from_json(r#"{"n":0,"weights":[],"quota":0}"#).is_err());
    }
}
