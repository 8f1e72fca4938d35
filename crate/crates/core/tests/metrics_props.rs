use proptest::prelude::*;
use uidlab_core::metrics::*;

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-f]{1,3}", 1..12).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn identity_and_bounds(h in sentence(), r in sentence()) {
        prop_assert_eq!(sentence_bleu(&h, &[&h], 4).unwrap(), 1.0);
        prop_assert_eq!(chrf(&h, &h, 6, 2.0).unwrap(), 1.0);
        let b = sentence_bleu(&h, &[&r], 4).unwrap();
        let c = chrf(&h, &r, 6, 2.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn bleu_ignores_reference_order(h in sentence(), r1 in sentence(), r2 in sentence(), r3 in sentence()) {
        let a = sentence_bleu(&h, &[&r1, &r2, &r3], 4).unwrap();
        let b = sentence_bleu(&h, &[&r3, &r1, &r2], 4).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn chrf_ignores_outer_whitespace(h in sentence(), r in sentence(), pad in "[ \t]{0,3}") {
        let padded = format!("{pad}{h}{pad}");
        prop_assert_eq!(chrf(&h, &r, 6, 2.0).unwrap(), chrf(&padded, &r, 6, 2.0).unwrap());
    }

    #[test]
    fn mbr_is_permutation_equivariant(pool in prop::collection::vec(sentence(), 2..7), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let metric = Chrf::default();
        let base = mbr_utility(&pool, &metric).unwrap();
        let mut perm: Vec<usize> = (0..pool.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled: Vec<String> = perm.iter().map(|&i| pool[i].clone()).collect();
        let after = mbr_utility(&shuffled, &metric).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((after.utilities[k] - base.utilities[i]).abs() < 1e-12);
        }
        let best = base.utilities[base.winner];
        prop_assert!((after.utilities[after.winner] - best).abs() < 1e-12);
        let unique = base.utilities.iter().filter(|u| (*u - best).abs() < 1e-12).count() == 1;
        if unique {
            prop_assert_eq!(&shuffled[after.winner], &pool[base.winner]);
        }
    }
}
