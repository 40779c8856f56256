use std::cmp::Ordering;

use num_bigint::BigInt;
use proptest::prelude::*;

use wvg_nucleolus::modlinalg::{independent_over_some_prime, rational_rank, ModVector};
use wvg_nucleolus::separation::{dp_min_table, dp_min_table_mod, full_separate};
use wvg_nucleolus::{
    brute_gamma, brute_separate, excess_vector, lex_compare, prime_set, solve_nucleolus, Allocation, Instance,
    Rational,
};

fn instance(max_n: usize, max_w: u64) -> impl Strategy<Value = Instance> {
    prop::collection::vec(0..=max_w, 1..=max_n).prop_flat_map(|w| {
        let total: u64 = w.iter().sum();
        (Just(w), 0..=total + 1).prop_map(|(w, q)| Instance::new(w, q).unwrap())
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-4i64..12, 1i64..7), n).prop_map(|v| {
        v.into_iter()
            .map(|(a, b)| Rational::new(BigInt::from(a), BigInt::from(b)))
            .collect()
    })
}

fn game_and_point() -> impl Strategy<Value = (Instance, Vec<Rational>)> {
    instance(8, 7).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), point(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plain_table_matches_enumeration((g, x) in game_and_point()) {
        prop_assert_eq!(dp_min_table(&g, &x), brute_gamma(&g, &x, None).unwrap());
    }

    #[test]
    fn modular_table_matches_enumeration(
        (g, x) in game_and_point(),
        pick in 0usize..4,
        seed in prop::collection::vec(0u64..1000, 8),
    ) {
        let primes = prime_set(g.n());
        let p = primes.primes()[pick % primes.len()];
        let v = ModVector::new(p, seed[..g.n()].iter().map(|e| e % p).collect());
        prop_assert_eq!(dp_min_table_mod(&g, &x, &v), brute_gamma(&g, &x, Some(&v)).unwrap());
    }

    #[test]
    fn independence_mod_some_prime_matches_rationals(
        rows in (1usize..=10).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0u8..=1, n), 1..=n)
        })
    ) {
        let n = rows[0].len();
        prop_assert_eq!(
            independent_over_some_prime(&rows, &prime_set(n)),
            rational_rank(&rows) == rows.len()
        );
    }

    #[test]
    fn separation_agrees_with_enumeration(
        g in instance(7, 6),
        raw in prop::collection::vec((0i64..10, 1i64..5), 7),
        eps_num in -6i64..3,
        level_pick in 0usize..8,
    ) {
        let res = solve_nucleolus(&g).unwrap();
        prop_assume!(!res.levels.is_empty());
        let n = g.n();
        let level = 1 + level_pick % res.levels.len();
        let mut x: Vec<Rational> = raw[..n]
            .iter()
            .map(|&(a, b)| Rational::new(BigInt::from(a), BigInt::from(b)))
            .collect();
        let sum: Rational = x.iter().sum();
        let nu = Rational::from_integer(BigInt::from(g.grand_value()));
        if sum == Rational::from_integer(BigInt::from(0)) {
            x[0] = nu.clone();
        } else {
            x = x.iter().map(|v| v * &nu / &sum).collect();
        }
        let eps = Rational::new(BigInt::from(eps_num), BigInt::from(4));
        let history = &res.levels[..level - 1];
        let fast = full_separate(&g, &x, &eps, history, level);
        let slow = brute_separate(&g, &x, &eps, level, history).unwrap();
        prop_assert_eq!(fast.is_feasible(), slow.is_feasible());
        if let Some(cut) = fast.cut() {
            prop_assert!(cut.coalition.sum_of(&x) < cut.rhs());
        }
    }

    #[test]
    fn output_is_an_allocation_with_symmetric_and_null_players(g in instance(8, 6)) {
        let x = solve_nucleolus(&g).unwrap().allocation;
        let values = x.values();
        let zero = Rational::from_integer(BigInt::from(0));
        let total: Rational = values.iter().sum();
        prop_assert_eq!(total, Rational::from_integer(BigInt::from(g.grand_value())));
        prop_assert!(values.iter().all(|v| *v >= zero));
        for i in 0..g.n() {
            for j in 0..g.n() {
                if g.weights()[i] == g.weights()[j] {
                    prop_assert_eq!(&values[i], &values[j]);
                }
            }
            if g.weights()[i] == 0 && g.quota() > 0 {
                prop_assert_eq!(&values[i], &zero);
            }
        }
    }

    #[test]
    fn permuting_players_permutes_the_output(g in instance(7, 8), shift in 0usize..7) {
        let n = g.n();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let w: Vec<u64> = perm.iter().map(|&i| g.weights()[i]).collect();
        let h = Instance::new(w, g.quota()).unwrap();
        let a = solve_nucleolus(&g).unwrap().allocation;
        let b = solve_nucleolus(&h).unwrap().allocation;
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(&b.values()[k], &a.values()[i]);
        }
    }

    #[test]
    fn scaling_weights_and_quota_changes_nothing(g in instance(7, 8), factor in 2u64..5) {
        let h = Instance::new(g.weights().iter().map(|w| w * factor).collect(), g.quota() * factor).unwrap();
        prop_assert_eq!(solve_nucleolus(&g).unwrap().allocation, solve_nucleolus(&h).unwrap().allocation);
    }

    #[test]
    fn output_beats_the_uniform_split(g in instance(8, 6)) {
        let x = solve_nucleolus(&g).unwrap().allocation;
        let ours = excess_vector(&g, &x).unwrap();
        let uniform = excess_vector(&g, &Allocation::uniform(&g)).unwrap();
        prop_assert_ne!(lex_compare(&ours, &uniform).unwrap(), Ordering::Less);
    }

    #[test]
    fn instances_survive_json(g in instance(12, 1000)) {
        let back = Instance::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back.weights(), g.weights());
        prop_assert_eq!(back.quota(), g.quota());
    }
}
