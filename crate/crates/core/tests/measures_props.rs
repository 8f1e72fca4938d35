use proptest::prelude::*;
use uidlab_core::measures::*;

type Seq = SurprisalSequence<f64>;

fn seq(v: &[f64]) -> Seq {
    SurprisalSequence::from_surprisals("p", v.to_vec()).unwrap()
}

fn surprisals(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..20.0, min_len..=50)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12)
}

// Naive double-loop Gini.
fn gini_oracle(s: &[f64]) -> f64 {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let mut acc = 0.0;
    for a in s {
        for b in s {
            acc += (a - b).abs();
        }
    }
    acc / (2.0 * n * n * mean)
}

proptest! {
    #[test]
    fn constant_sequences_are_uniform(c in 0.1f64..15.0, n in 2usize..40) {
        let s = seq(&vec![c; n]);
        prop_assert_eq!(local_variance(&s).unwrap(), 0.0);
        prop_assert_eq!(coefficient_of_variation(&s).unwrap(), 0.0);
        prop_assert_eq!(gini(&s).unwrap(), 0.0);
        prop_assert_eq!(global_variance(&s, &CorpusStats::with_mean(c, n)).unwrap(), 0.0);
    }

    #[test]
    fn constant_corpus_mean_is_exact(c in 0.001f64..15.0, lens in prop::collection::vec(1usize..40, 1..6)) {
        let seqs: Vec<Seq> = lens.iter().map(|&n| seq(&vec![c; n])).collect();
        let corpus = CorpusStats::from_sequences(&seqs);
        prop_assert_eq!(corpus.mean, Some(c));
        prop_assert_eq!(corpus.token_count, lens.iter().sum::<usize>());
        for s in &seqs {
            prop_assert_eq!(global_variance(s, &corpus).unwrap(), 0.0);
        }
    }

    #[test]
    fn scale_covariance(v in surprisals(2), a in 0.1f64..10.0, k in 0.5f64..3.0) {
        let s = seq(&v);
        let scaled = seq(&v.iter().map(|x| a * x).collect::<Vec<_>>());
        prop_assert!(close(local_variance(&scaled).unwrap(), a * a * local_variance(&s).unwrap()));
        prop_assert!(close(coefficient_of_variation(&scaled).unwrap(), coefficient_of_variation(&s).unwrap()));
        prop_assert!(close(superlinear_mean(&scaled, k).unwrap(), a.powf(k) * superlinear_mean(&s, k).unwrap()));
        prop_assert!(close(gini(&scaled).unwrap(), gini(&s).unwrap()));
    }

    #[test]
    fn permutation_invariance(v in surprisals(1), seed in any::<u64>(), mu in 0.0f64..10.0) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut w = v.clone();
        w.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (s, p) = (seq(&v), seq(&w));
        let corpus = CorpusStats::with_mean(mu, 100);
        prop_assert!(close(coefficient_of_variation(&s).unwrap(), coefficient_of_variation(&p).unwrap()));
        prop_assert!(close(global_variance(&s, &corpus).unwrap(), global_variance(&p, &corpus).unwrap()));
        prop_assert!(close(superlinear_mean(&s, 2.0).unwrap(), superlinear_mean(&p, 2.0).unwrap()));
        prop_assert!(close(gini(&s).unwrap(), gini(&p).unwrap()));
    }

    #[test]
    fn sl_at_one_is_mean(v in surprisals(1)) {
        let s = seq(&v);
        prop_assert!(close(superlinear_mean(&s, 1.0).unwrap(), v.iter().sum::<f64>() / v.len() as f64));
    }

    #[test]
    fn gini_matches_double_loop(v in surprisals(1)) {
        let g = gini(&seq(&v)).unwrap();
        prop_assert!(close(g, gini_oracle(&v)));
        prop_assert!((0.0..1.0).contains(&g));
    }

    #[test]
    fn slor_vanishes_on_unigram_surprisals(words in prop::collection::vec("[a-e]", 1..20), k in 0.5f64..3.0) {
        let model = UnigramModel::build([words.clone()], 1.0).unwrap();
        let values: Vec<f64> = words.iter().map(|w| model.surprisal(w)).collect();
        let s = SurprisalSequence::new("u", words, values, None).unwrap();
        prop_assert!(slor(&s, &model, k).unwrap().abs() < 1e-9);
    }
}

#[test]
fn local_variance_depends_on_order() {
    let a = seq(&[1.0, 2.0, 3.0]);
    let b = seq(&[1.0, 3.0, 2.0]);
    assert_ne!(local_variance(&a).unwrap(), local_variance(&b).unwrap());
}
