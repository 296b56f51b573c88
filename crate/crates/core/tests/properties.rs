//! Property tests for the spec invariants: word algebra identities, exact
//! recursions against direct expansion, divisibility chains, the increment
//! oracle, and p-adic fractional parts.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use sadic::complexity::{predicted_increment, sample_language};
use sadic::spectrum::p_adic_frac;
use sadic::structure::derive_ab;
use sadic::word::{
    decompose_with, expand_level, is_root, occurrences, periodic_suffix, Alphabet, Block,
    SadicSystem, Substitution, TauParams, TauSource, Word,
};

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 1..=max_len).prop_map(Word::new)
}

fn tau_strategy() -> impl Strategy<Value = TauParams> {
    (1u64..=6, 1u64..=5, 0u64..=3).prop_map(|(m, gap, r)| {
        let r = r.min(m.saturating_sub(1));
        TauParams::from_u64(m, m + gap, r).unwrap()
    })
}

fn system_strategy() -> impl Strategy<Value = SadicSystem> {
    prop::collection::vec(tau_strategy(), 1..=3).prop_map(|list| {
        SadicSystem::new(
            Substitution::identity(2),
            TauSource::Explicit {
                list,
                repeat_last: true,
            },
            Alphabet::binary(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn powers_of_a_word_have_a_common_root(p in word_strategy(5), i in 1usize..4, j in 1usize..4) {
        let v = p.repeat(i);
        let u = p.repeat(j);
        prop_assert!(matches!(periodic_suffix(&v, &u), Err(sadic::Error::CommonRoot)));
    }

    #[test]
    fn suffixes_of_powers_are_rooted(v in word_strategy(6), reps in 1usize..4, cut in 0usize..8) {
        let big = v.repeat(reps + 2);
        let cut = cut.min(big.len() - v.len().min(big.len() - 1)).min(big.len() - v.len());
        let w = Word::new(big.symbols()[cut..].to_vec());
        if w.len() >= v.len() {
            prop_assert!(is_root(&v, &w));
        }
    }

    #[test]
    fn occurrence_counts_are_superadditive(w in word_strategy(12), z in word_strategy(12), v in word_strategy(3)) {
        let joined = w.concat(&z);
        prop_assert!(occurrences(&joined, &v) >= occurrences(&w, &v) + occurrences(&z, &v));
        prop_assert!(occurrences(&joined, &v) <= occurrences(&w, &v) + occurrences(&z, &v) + v.len().saturating_sub(1));
    }

    #[test]
    fn length_recursion_matches_expansion(sys in system_strategy(), k in 1usize..4) {
        let seqs = derive_ab(&sys, k).unwrap();
        if let Ok((v, u)) = expand_level(&sys, k, 1 << 18) {
            prop_assert_eq!(BigUint::from(v.len()), seqs.v_lens[k].clone());
            prop_assert_eq!(BigUint::from(u.len()), seqs.u_lens[k].clone());
        }
    }

    #[test]
    fn gcd_chain_divides_a_products(sys in system_strategy()) {
        let seqs = derive_ab(&sys, 12).unwrap();
        let mut aprod = seqs.v_lens[0].clone();
        let mut prev: Option<BigUint> = None;
        for k in 0..12usize {
            aprod *= &seqs.a[k];
            let g = seqs.v_lens[k].gcd(&seqs.v_lens[k + 1]);
            prop_assert!((&aprod % &g).is_zero());
            if let Some(p) = prev {
                prop_assert!((&g % &p).is_zero());
            }
            prev = Some(g);
        }
    }

    #[test]
    fn betas_lie_in_the_unit_interval_eventually(sys in system_strategy()) {
        // beta products telescope exactly.
        let seqs = derive_ab(&sys, 10).unwrap();
        let mut anum = BigUint::one();
        for k in 1..=10usize {
            anum *= &seqs.a[k];
            let expect = BigRational::new(
                (&anum * &seqs.v_lens[0]).into(),
                seqs.v_lens[k].clone().into(),
            );
            prop_assert_eq!(seqs.beta_products[k - 1].clone(), expect);
        }
    }

    #[test]
    fn decompose_round_trips(sys in system_strategy(), level in 0usize..2) {
        let (v, u) = match expand_level(&sys, level, 1 << 16) {
            Ok(x) => x,
            Err(_) => return Ok(()),
        };
        let (w, _) = match expand_level(&sys, level + 2, 1 << 16) {
            Ok(x) => x,
            Err(_) => return Ok(()),
        };
        if w.len() < 2 * (v.len() + u.len()) {
            return Ok(());
        }
        let d = decompose_with(&w, &v, &u).unwrap();
        let mut rebuilt = Vec::new();
        for b in &d.blocks {
            match b {
                Block::V => rebuilt.extend_from_slice(v.symbols()),
                Block::U => rebuilt.extend_from_slice(u.symbols()),
            }
        }
        prop_assert_eq!(&w.symbols()[d.offset..w.len() - d.trailing], &rebuilt[..]);
    }

    #[test]
    fn p_adic_parts_reassemble(a in -400i64..400, b in 0u32..4, c in 0u32..3, d in 0u32..2) {
        let den = 2i64.pow(b) * 3i64.pow(c) * 5i64.pow(d);
        let q = BigRational::new(a.into(), den.into());
        let sum = p_adic_frac(&q, 2) + p_adic_frac(&q, 3) + p_adic_frac(&q, 5);
        prop_assert!((q - sum).is_integer());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn increment_oracle_on_random_systems(m in 1u64..5, gap in 1u64..4, r_raw in 0u64..3) {
        let r = r_raw.min(m.saturating_sub(1));
        let sys = sadic::fixtures::repeated_tau(m, m + gap, r);
        // Skip parameter choices that generate a periodic orbit.
        if sadic::word::pk_sk(&sys, 0, 1 << 12).is_err() {
            return Ok(());
        }
        let sample = match sample_language(&sys, 40, 1 << 20) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        for q in 1..39usize {
            let brute = sample.p(q + 1) - sample.p(q);
            let pred = predicted_increment(&sys, &BigUint::from(q)).unwrap();
            prop_assert_eq!(pred, BigUint::from(brute), "q = {}", q);
        }
    }
}
