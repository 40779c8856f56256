//! Linear algebra over prime fields `𝔽_p` for 0/1 vectors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::primes::PrimeSet;

/// A vector of residues modulo a prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModVector {
    modulus: u64,
    entries: Vec<u64>,
}

impl ModVector {
    pub fn new(modulus: u64, entries: Vec<u64>) -> Self {
        assert!(modulus >= 2, "modulus must be a prime");
        let entries = entries.into_iter().map(|e| e % modulus).collect();
        ModVector { modulus, entries }
    }

    pub fn zero(modulus: u64, len: usize) -> Self {
        ModVector::new(modulus, vec![0; len])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// `⟨self, u⟩ mod p` for a 0/1 vector `u`.
    pub fn dot_01(&self, u: &[u8]) -> u64 {
        debug_assert_eq!(u.len(), self.entries.len());
        self.entries
            .iter()
            .zip(u)
            .filter(|(_, &b)| b != 0)
            .fold(0, |acc, (&e, _)| (acc + e) % self.modulus)
    }

    pub fn dot(&self, other: &ModVector) -> u64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0, |acc, (&a, &b)| (acc + a * b) % self.modulus)
    }
}

pub fn mod_reduce(v: &[u8], p: u64) -> ModVector {
    ModVector::new(p, v.iter().map(|&b| u64::from(b)).collect())
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    // Extended Euclid on (a, p).
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "{a} has no inverse modulo {p}");
    t0.rem_euclid(p as i128) as u64
}

/// Row-reduced echelon form in place; returns pivot columns.
fn rref_mod(rows: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, found);
        let inv = inv_mod(rows[r][c], p);
        for e in rows[r].iter_mut() {
            *e = *e * inv % p;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (e, &pe) in row.iter_mut().zip(&pivot_row) {
                *e = (*e + (p - f) * pe) % p;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_mod_p(vectors: &[ModVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let p = first.modulus;
    let n = first.len();
    for v in vectors {
        if v.modulus != p {
            return Err(Error::ModulusMismatch(p, v.modulus));
        }
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let mut rows: Vec<Vec<u64>> = vectors.iter().map(|v| v.entries.clone()).collect();
    Ok(rref_mod(&mut rows, p).len())
}

/// A basis of the `𝔽_p`-orthogonal complement of the span of `z_vectors`.
///
/// Returns `n − j` vectors. When the reduced vectors are dependent over
/// `𝔽_p` all of them are zero, which makes the associated constraint family
/// empty.
pub fn orth_basis(z_vectors: &[Vec<u8>], n: usize, p: u64) -> Vec<ModVector> {
    let j = z_vectors.len();
    assert!(j <= n, "more z-vectors than coordinates");
    let mut rows: Vec<Vec<u64>> = z_vectors
        .iter()
        .map(|z| {
            assert_eq!(z.len(), n);
            mod_reduce(z, p).entries
        })
        .collect();
    let pivots = rref_mod(&mut rows, p);
    if pivots.len() < j {
        return vec![ModVector::zero(p, n); n - j];
    }
    // Each free column seeds one solution of z·v ≡ 0 with v_free = 1.
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; n];
            v[f] = 1;
            for (row, &pc) in rows.iter().zip(&pivots) {
                v[pc] = (p - row[f]) % p;
            }
            ModVector { modulus: p, entries: v }
        })
        .collect()
}

/// Rank over ℚ via fraction-free (Bareiss) elimination.
pub fn rational_rank(vectors: &[Vec<u8>]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let cols = first.len();
    let mut m: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| v.iter().map(|&b| BigInt::from(b)).collect())
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for c in 0..cols {
        if rank == m.len() {
            break;
        }
        let Some(found) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, found);
        for i in rank + 1..m.len() {
            for k in c + 1..cols {
                let v = (&m[rank][c] * &m[i][k] - &m[i][c] * &m[rank][k]) / &prev;
                m[i][k] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].abs();
        rank += 1;
    }
    rank
}

/// Whether the vectors are independent over `𝔽_p` for at least one prime of
/// the set. For a set built by [`crate::primes::prime_set`] this coincides
/// with independence over ℚ.
pub fn independent_over_some_prime(z_vectors: &[Vec<u8>], primes: &PrimeSet) -> bool {
    if z_vectors.is_empty() {
        return true;
    }
    primes.iter().any(|p| {
        let reduced: Vec<ModVector> = z_vectors.iter().map(|z| mod_reduce(z, p)).collect();
        rank_mod_p(&reduced).expect("uniform modulus") == z_vectors.len()
    })
}

/// The vectors `v^j_{p,t}` for every prime of the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisFamily {
    level: usize,
    per_prime: Vec<(u64, Vec<ModVector>)>,
}

impl BasisFamily {
    /// Orthogonal bases for the span of the `level` z-vectors.
    pub fn build(z_vectors: &[Vec<u8>], n: usize, primes: &PrimeSet) -> Self {
        BasisFamily {
            level: z_vectors.len(),
            per_prime: primes.iter().map(|p| (p, orth_basis(z_vectors, n, p))).collect(),
        }
    }

    /// Assemble a family from explicit vectors (mainly for tests).
    pub fn from_parts(level: usize, per_prime: Vec<(u64, Vec<ModVector>)>) -> Self {
        BasisFamily { level, per_prime }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn per_prime(&self) -> &[(u64, Vec<ModVector>)] {
        &self.per_prime
    }

    /// `(p, t, v)` for every nonzero vector, in scan order (increasing `p`,
    /// then `t`). `t` is 1-based.
    pub fn families(&self) -> impl Iterator<Item = (u64, usize, &ModVector)> + '_ {
        self.per_prime.iter().flat_map(|(p, vs)| {
            vs.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(move |(t, v)| (*p, t + 1, v))
        })
    }

    /// Whether `χ(S)` belongs to the constraint family of the next level,
    /// i.e. `⟨v, χ(S)⟩ ≢ 0` for some stored `v`.
    pub fn separates(&self, chi: &[u8]) -> bool {
        self.families().any(|(_, _, v)| v.dot_01(chi) != 0)
    }

    /// The first `(p, t)` whose vector has `⟨v, χ⟩ ≢ 0`.
    pub fn separating_family(&self, chi: &[u8]) -> Option<(u64, usize)> {
        self.families().find(|(_, _, v)| v.dot_01(chi) != 0).map(|(p, t, _)| (p, t))
    }
}

/// Span of 0/1 vectors over ℚ with an exact membership test.
#[derive(Debug, Clone)]
pub struct RationalSpan {
    pivots: Vec<usize>,
    /// Reduced rows times a common denominator.
    rows: Vec<Vec<BigInt>>,
    denom: BigInt,
}

impl RationalSpan {
    pub fn new(vectors: &[Vec<u8>]) -> Self {
        let mut rows: Vec<Vec<BigRational>> = vectors
            .iter()
            .map(|v| v.iter().map(|&b| BigRational::from_integer(BigInt::from(b))).collect())
            .collect();
        let cols = rows.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(found) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, found);
            let f = rows[r][c].clone();
            for e in rows[r].iter_mut() {
                *e /= &f;
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let g = row[c].clone();
                for (e, pe) in row.iter_mut().zip(&pivot_row) {
                    *e -= &g * pe;
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        let denom = rows
            .iter()
            .flatten()
            .fold(BigInt::from(1), |acc, e| num_integer::lcm(acc, e.denom().clone()));
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|e| e.numer() * (&denom / e.denom())).collect())
            .collect();
        RationalSpan { pivots, rows, denom }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// In reduced form a member of the span is the sum of the rows whose
    /// pivot coordinate it has set.
    pub fn contains(&self, chi: &[u8]) -> bool {
        let mut acc = vec![BigInt::zero(); chi.len()];
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if chi[pc] != 0 {
                for (a, b) in acc.iter_mut().zip(row) {
                    *a += b;
                }
            }
        }
        acc.iter()
            .zip(chi)
            .all(|(a, &b)| *a == &self.denom * BigInt::from(b))
    }
}
