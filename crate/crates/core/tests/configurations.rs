mod common;

use common::{circular_configs, ideal_configs, ln_big};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spacetime_core::architecture::*;
use spacetime_core::configurations::*;
use std::collections::BTreeSet;

fn set(v: Vec<Configuration>) -> BTreeSet<Configuration> {
    v.into_iter().collect()
}

#[test]
fn validity_examples() {
    let b2 = build_bitonic_block(2).unwrap();
    assert!(is_valid(&b2, &[0, 0, 0, 0]).unwrap());
    assert!(is_valid(&b2, &[1, 0, 1, 0]).unwrap());
    assert!(!is_valid(&b2, &[2, 2, 0, 0]).unwrap());
    assert!(is_valid(&b2, &[0, 0, 0]).is_err());
}

#[test]
fn moves_examples() {
    let b2 = build_bitonic_block(2).unwrap();
    let mv = available_moves(&b2, &[0; 4]).unwrap();
    let slots: Vec<_> = mv.iter().map(|m| (m.slot.p, m.slot.q, m.direction)).collect();
    assert_eq!(
        slots,
        vec![(1, 3, Direction::Apply), (2, 4, Direction::Apply)]
    );
    for l in 1..=4 {
        let b = build_bitonic_block(l).unwrap();
        let full = vec![l; b.n];
        let mv = available_moves(&b, &full).unwrap();
        assert_eq!(mv.len(), b.n / 2);
        assert!(mv
            .iter()
            .all(|m| m.direction == Direction::Unapply && m.slot.layer == l));
    }
    // every move is undone by its reverse
    let b3 = build_bitonic_block(3).unwrap();
    for tau in enumerate_valid(&b3, 1000).unwrap() {
        for m in available_moves(&b3, &tau).unwrap() {
            let next = apply_move(&b3, &tau, &m);
            assert!(is_valid(&b3, &next).unwrap());
            let back = Move {
                slot: m.slot,
                direction: match m.direction {
                    Direction::Apply => Direction::Unapply,
                    Direction::Unapply => Direction::Apply,
                },
            };
            assert!(available_moves(&b3, &next).unwrap().contains(&back));
            assert_eq!(apply_move(&b3, &next, &back), tau);
        }
    }
}

#[test]
fn enumeration_matches_ideal_oracle() {
    for l in 1..=3 {
        let b = build_bitonic_block(l).unwrap();
        assert_eq!(set(enumerate_valid(&b, 10_000).unwrap()), ideal_configs(&b));
    }
    let b4 = build_bitonic_block(4).unwrap();
    assert_eq!(enumerate_valid(&b4, 100_000).unwrap().len(), ideal_configs(&b4).len());
    assert_eq!(
        set(enumerate_valid(&build_bitonic_block(1).unwrap(), 10).unwrap()),
        BTreeSet::from([vec![0, 0], vec![1, 1]])
    );
    for l in 1..=3 {
        for m in 1..=4 {
            let p = build_product(l, m).unwrap();
            assert_eq!(set(enumerate_valid(&p, 100_000).unwrap()), ideal_configs(&p), "({l},{m})");
            let c = build_circular(l, m).unwrap();
            assert_eq!(
                set(enumerate_valid(&c, 100_000).unwrap()),
                circular_configs(&c, 2 * l),
                "circular ({l},{m})"
            );
        }
    }
}

#[test]
fn enumeration_cap_is_enforced() {
    let b4 = build_bitonic_block(4).unwrap();
    assert_eq!(
        enumerate_valid(&b4, 100).unwrap_err(),
        spacetime_core::Error::CapExceeded { cap: 100 }
    );
}

#[test]
fn count_golden_values() {
    let a: Vec<u64> = (1..=4).map(|l| count_bitonic(l).try_into().unwrap()).collect();
    assert_eq!(a, vec![2, 7, 82, 11047]);
    assert_eq!(count_first_layer_incomplete(1).unwrap(), BigUint::from(1u32));
    assert_eq!(count_first_layer_incomplete(2).unwrap(), BigUint::from(3u32));
    assert_eq!(count_first_layer_incomplete(3).unwrap(), BigUint::from(33u32));
    assert_eq!(count_product(2, 2).unwrap(), BigUint::from(13u32));
    assert_eq!(count_product(3, 2).unwrap(), BigUint::from(181u32));
    assert_eq!(count_circular(2, 2).unwrap(), BigUint::from(12u32));
    assert_eq!(count_circular(3, 3).unwrap(), BigUint::from(297u32));
    for m in 1..6 {
        assert_eq!(count_circular(1, m).unwrap(), BigUint::from(m));
    }
    for l in 1..=4 {
        assert_eq!(count_product(l, 1).unwrap(), count_bitonic(l));
    }
}

#[test]
fn counts_match_enumeration() {
    for l in 1..=3 {
        for m in 1..=4 {
            let p = build_product(l, m).unwrap();
            let c = build_circular(l, m).unwrap();
            assert_eq!(
                BigUint::from(enumerate_valid(&p, 100_000).unwrap().len()),
                count_product(l, m).unwrap()
            );
            let (value, backed) = count_circular_tagged(l, m).unwrap();
            let found = BigUint::from(enumerate_valid(&c, 100_000).unwrap().len());
            if backed {
                assert_eq!(found, value, "circular ({l},{m})");
            }
        }
    }
}

#[test]
fn first_layer_incomplete_by_filter() {
    for l in 1..=4 {
        let b = build_bitonic_block(l).unwrap();
        let k = enumerate_valid(&b, 100_000)
            .unwrap()
            .into_iter()
            .filter(|t| t.iter().any(|&x| x == 0))
            .count();
        assert_eq!(BigUint::from(k), count_first_layer_incomplete(l).unwrap());
    }
}

#[test]
fn qubit_at_zero_counts() {
    for l in 1..=4 {
        let b = build_bitonic_block(l).unwrap();
        let all = enumerate_valid(&b, 100_000).unwrap();
        for i in 0..b.n {
            let k = all.iter().filter(|t| t[i] == 0).count();
            assert_eq!(BigUint::from(k), count_qubit_at_zero(l, 1, Mode::Linear).unwrap());
        }
    }
    assert_eq!(count_qubit_at_zero(2, 1, Mode::Linear).unwrap(), BigUint::from(2u32));
    for (l, m) in [(2, 2), (2, 3), (3, 2), (3, 4)] {
        let c = build_circular(l, m).unwrap();
        let all = enumerate_valid(&c, 100_000).unwrap();
        let want = count_qubit_at_zero(l, m, Mode::Circular).unwrap();
        for i in 0..c.n {
            for t in 0..c.depth() {
                let k = all.iter().filter(|x| x[i] == t).count();
                assert_eq!(BigUint::from(k), want, "({l},{m}) qubit {i} time {t}");
            }
        }
    }
}

#[test]
fn width_and_dichotomy() {
    for l in 1..=4 {
        let b = build_bitonic_block(l).unwrap();
        for tau in enumerate_valid(&b, 100_000).unwrap() {
            assert!(width(&b, &tau).unwrap() < l);
            let v = tau.iter().all(|&x| x >= 1);
            let h = tau.iter().all(|&x| x < l);
            assert!(v || h, "{tau:?}");
        }
    }
    let c = build_circular(3, 4).unwrap();
    for tau in enumerate_valid(&c, 100_000).unwrap() {
        // some 3-layer window holds every clock
        let d = c.depth();
        assert!((0..d).any(|r| tau.iter().all(|&x| (x + d - r) % d <= 3)));
        assert!(width(&c, &tau).unwrap() < 3);
    }
    assert_eq!(width(&build_bitonic_block(3).unwrap(), &[2; 8]).unwrap(), 0);
}

fn rank_round_trip(arch: &Architecture) {
    let all = enumerate_valid(arch, 200_000).unwrap();
    let total = count(arch, 200_000).unwrap();
    assert_eq!(BigUint::from(all.len()), total);
    let mut ranks = BTreeSet::new();
    for tau in &all {
        let r = rank(arch, tau).unwrap();
        assert_eq!(&unrank(arch, &r).unwrap(), tau);
        ranks.insert(r);
    }
    assert_eq!(ranks.len(), all.len());
    assert_eq!(ranks.iter().next_back().unwrap() + 1u32, total);
}

#[test]
fn rank_layout_examples() {
    let b1 = build_bitonic_block(1).unwrap();
    assert_eq!(unrank(&b1, &BigUint::from(0u32)).unwrap(), vec![1, 1]);
    assert_eq!(unrank(&b1, &BigUint::from(1u32)).unwrap(), vec![0, 0]);
    // v-configurations come first
    let b3 = build_bitonic_block(3).unwrap();
    for tau in enumerate_valid(&b3, 1000).unwrap() {
        let v = tau.iter().all(|&x| x >= 1);
        assert_eq!(rank(&b3, &tau).unwrap() < BigUint::from(49u32), v);
    }
    assert!(unrank(&b3, &BigUint::from(82u32)).is_err());
}

#[test]
fn rank_round_trips() {
    for l in 1..=4 {
        rank_round_trip(&build_bitonic_block(l).unwrap());
    }
    for l in 1..=3 {
        for m in 2..=4 {
            rank_round_trip(&build_product(l, m).unwrap());
        }
        for m in 1..=4 {
            rank_round_trip(&build_circular(l, m).unwrap());
        }
    }
    rank_round_trip(&build_product(4, 2).unwrap());
    rank_round_trip(&build_circular(4, 2).unwrap());
}

#[test]
fn asymptotic_growth_constant() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let a = bitonic_table(12);
    let vals: Vec<f64> = (1..=12)
        .map(|l| ((ln_big(&a[l]) + phi.ln()) / 2f64.powi(l as i32)).exp())
        .collect();
    // increasing towards the limit
    for w in vals.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{vals:?}");
    }
    assert!((vals[11] - 1.8445).abs() < 0.01, "{}", vals[11]);
}

#[test]
fn sampler_is_valid_and_deterministic() {
    let c = build_circular(3, 4).unwrap();
    let mut r1 = ChaCha8Rng::seed_from_u64(7);
    let mut r2 = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let a = sample_uniform(&c, &mut r1).unwrap();
        assert!(is_valid(&c, &a).unwrap());
        assert_eq!(a, sample_uniform(&c, &mut r2).unwrap());
    }
}

#[test]
fn circular_marginal_is_uniform() {
    let c = build_circular(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 40_000;
    let mut hist = [0usize; 4];
    for _ in 0..n {
        hist[sample_uniform(&c, &mut rng).unwrap()[0]] += 1;
    }
    let p = 0.25;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for h in hist {
        assert!((h as f64 - n as f64 * p).abs() < 3.0 * sigma, "{hist:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn count_is_relabeling_invariant(perm in Just((1..=8usize).collect::<Vec<_>>()).prop_shuffle()) {
        let b3 = build_bitonic_block(3).unwrap();
        let p = Permutation::from_map(perm).unwrap();
        let r = b3.relabel(&p);
        prop_assert_eq!(enumerate_valid(&r, 1000).unwrap().len(), 82);
    }

    #[test]
    fn rank_unrank_inverse_large(idx in 0u64..11047) {
        let b4 = build_bitonic_block(4).unwrap();
        let tau = unrank(&b4, &BigUint::from(idx)).unwrap();
        prop_assert!(is_valid(&b4, &tau).unwrap());
        prop_assert_eq!(rank(&b4, &tau).unwrap(), BigUint::from(idx));
    }

    #[test]
    fn unrank_valid_on_big_products(l in 2usize..6, m in 2usize..6, seed in any::<u64>()) {
        let p = build_product(l, m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = sample_uniform(&p, &mut rng).unwrap();
        prop_assert!(is_valid(&p, &tau).unwrap());
        let r = rank(&p, &tau).unwrap();
        prop_assert_eq!(unrank(&p, &r).unwrap(), tau);
        let c = build_circular(l, m).unwrap();
        let tau = sample_uniform(&c, &mut rng).unwrap();
        prop_assert!(is_valid(&c, &tau).unwrap());
        let r = rank(&c, &tau).unwrap();
        prop_assert_eq!(unrank(&c, &r).unwrap(), tau);
    }
}
