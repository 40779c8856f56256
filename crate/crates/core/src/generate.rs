//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_bigint::BigInt;

use crate::game::{Allocation, Instance, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorBounds {
    pub n_min: usize,
    pub n_max: usize,
    /// Weights are uniform in `0..=weight_max`.
    pub weight_max: u64,
    /// Draw the quota from `0..=w(N)` instead of `1..=max(1, w(N))`.
    pub allow_zero_quota: bool,
}

impl Default for GeneratorBounds {
    fn default() -> Self {
        GeneratorBounds {
            n_min: 3,
            n_max: 10,
            weight_max: 20,
            allow_zero_quota: false,
        }
    }
}

impl GeneratorBounds {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(format!("bad player range {}..={}", self.n_min, self.n_max));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, bounds: &GeneratorBounds) -> Instance {
    let n = rng.random_range(bounds.n_min..=bounds.n_max);
    let weights: Vec<u64> = (0..n).map(|_| rng.random_range(0..=bounds.weight_max)).collect();
    let total: u64 = weights.iter().sum();
    let quota = if bounds.allow_zero_quota {
        rng.random_range(0..=total)
    } else {
        rng.random_range(1..=total.max(1))
    };
    Instance::new(weights, quota).expect("generated weights are valid")
}

pub fn generate_instance(seed: u64, bounds: &GeneratorBounds) -> Instance {
    draw(&mut ChaCha8Rng::seed_from_u64(seed), bounds)
}

/// `count` instances from one stream, named `seed-index`.
pub fn generate_batch(seed: u64, bounds: &GeneratorBounds, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| draw(&mut rng, bounds).with_name(format!("{seed}-{k}")))
        .collect()
}

/// A random allocation: integer draws in `0..=granularity`, normalized to
/// sum to `ν(N)`.
pub fn random_allocation<R: Rng>(rng: &mut R, instance: &Instance, granularity: u64) -> Allocation {
    let n = instance.n();
    let mut draws: Vec<u64> = (0..n).map(|_| rng.random_range(0..=granularity)).collect();
    if draws.iter().all(|&d| d == 0) {
        draws[rng.random_range(0..n)] = 1;
    }
    let total: u64 = draws.iter().sum();
    let nu = BigInt::from(instance.grand_value());
    let values = draws
        .iter()
        .map(|&d| Rational::new(&nu * BigInt::from(d), BigInt::from(total)))
        .collect();
    Allocation::new(instance, values).expect("normalized draws form an allocation")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_respected() {
        let b = GeneratorBounds {
            n_min: 3,
            n_max: 3,
            weight_max: 1,
            allow_zero_quota: false,
        };
        for seed in 0..50 {
            let g = generate_instance(seed, &b);
            assert_eq!(g.n(), 3);
            assert!(g.weights().iter().all(|&w| w <= 1));
            assert!(g.quota() >= 1);
            if g.total_weight() >= 1 {
                assert!(g.quota() <= g.total_weight());
            }
        }
    }

    #[test]
    fn allocations_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in generate_batch(3, &GeneratorBounds::default(), 30) {
            let x = random_allocation(&mut rng, &g, 50);
            assert_eq!(x.len(), g.n());
        }
    }

    #[test]
    fn deterministic() {
        let b = GeneratorBounds::default();
        assert_eq!(generate_batch(7, &b, 20), generate_batch(7, &b, 20));
        assert_ne!(generate_batch(7, &b, 20), generate_batch(8, &b, 20));
        assert_eq!(generate_instance(0, &b), generate_instance(0, &b));
    }

    #[test]
    fn zero_quota_on_request() {
        let b = GeneratorBounds {
            n_min: 1,
            n_max: 2,
            weight_max: 1,
            allow_zero_quota: true,
        };
        assert!((0..200).any(|s| generate_instance(s, &b).quota() == 0));
        assert!(b.validate().is_ok());
        assert!(GeneratorBounds { n_min: 4, n_max: 3, ..b }.validate().is_err());
    }
}
