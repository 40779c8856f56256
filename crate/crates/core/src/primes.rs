//! The prime set used to certify real linear independence of 0/1 vectors
//! through independence over finite fields.
//!
//! For 0/1 vectors in dimension `n`, every nonzero minor is an integer of
//! absolute value at most `n!`. If the product of a set of primes exceeds
//! `n!`, such a minor cannot vanish modulo all of them, so vectors that are
//! independent over ℚ stay independent over at least one `𝔽_p`.

use num_bigint::BigUint;
use num_traits::One;

/// The smallest primes whose product strictly exceeds `n!`, and at least
/// `⌈log₂ n!⌉` (minimum one) of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    primes: Vec<u64>,
    n: usize,
}

impl PrimeSet {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// The player count the set was built for.
    pub fn n_for(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    pub fn product(&self) -> BigUint {
        self.primes.iter().map(|&p| BigUint::from(p)).product()
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// `⌈log₂ m⌉` for `m ≥ 1`, computed exactly.
pub fn ceil_log2(m: &BigUint) -> usize {
    assert!(*m >= BigUint::one(), "log of zero");
    (m - 1u32).bits() as usize
}

/// Trial division; the primes involved here are tiny.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    if m < 4 {
        return true;
    }
    if m % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn prime_set(n: usize) -> PrimeSet {
    assert!(n >= 1, "prime_set needs n >= 1");
    let fact = factorial(n);
    let needed = ceil_log2(&fact).max(1);
    let mut primes = Vec::with_capacity(needed);
    let mut product = BigUint::one();
    let mut candidate = 2u64;
    while primes.len() < needed || product <= fact {
        if is_prime(candidate) {
            primes.push(candidate);
            product *= candidate;
        }
        candidate += 1;
    }
    PrimeSet { primes, n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sets() {
        assert_eq!(prime_set(3).primes(), &[2, 3, 5]);
        assert_eq!(prime_set(1).primes(), &[2]);
        // ⌈log₂ 2⌉ = 1 prime would give product 2 = 2!, which is not enough.
        assert_eq!(prime_set(2).primes(), &[2, 3]);
    }

    #[test]
    fn n_ten() {
        let fact = factorial(10);
        assert_eq!(fact, BigUint::from(3_628_800u32));
        assert_eq!(ceil_log2(&fact), 22);
        let set = prime_set(10);
        assert_eq!(set.len(), 22);
        assert_eq!(*set.primes().last().unwrap(), 79);
        assert!(set.product() > fact);
    }

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(91));
        assert!(is_prime(97));
        let sieve: Vec<u64> = (0..200).filter(|&m| is_prime(m)).collect();
        let naive: Vec<u64> = (0..200u64)
            .filter(|&m| m >= 2 && (2..m).all(|d| m % d != 0))
            .collect();
        assert_eq!(sieve, naive);
    }

    #[test]
    fn prefix_extension() {
        for n in 2..60 {
            let small = prime_set(n - 1);
            let big = prime_set(n);
            assert!(big.primes().starts_with(small.primes()));
        }
    }

    #[test]
    fn size_stays_polynomial() {
        // p_k <= 2 k ln(k + 2) for every k that occurs here.
        for n in 1..=100 {
            let set = prime_set(n);
            let k = set.len() as f64;
            let max = *set.primes().last().unwrap() as f64;
            assert!(max <= 2.0 * k * (k + 2.0).ln(), "n = {n}");
        }
    }
}
