use approx::assert_relative_eq;
use proptest::prelude::*;
use qentropy::classify::{sample_product, sample_refinement};
use qentropy::entropies::{power_sum, relation_check, tsallis, normalized_tsallis};
use qentropy::tolerances::{rel_residual, Q_GRID};
use qentropy::{
    EntropyFunctional, FunctionalKind, PhiFunction, ProbVec, ProductSystem, QParam, Refinement,
    SimplexSampler,
};

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![9 => 1e-9f64..1.0, 1 => Just(0.0)], 1..8)
        .prop_filter("some mass", |w| w.iter().any(|&x| x > 0.0))
}

fn probvec() -> impl Strategy<Value = ProbVec> {
    weights().prop_map(|w| ProbVec::from_weights(w).unwrap())
}

fn grid_q() -> impl Strategy<Value = QParam> {
    prop::sample::select(Q_GRID.to_vec()).prop_map(|q| QParam::new(q).unwrap())
}

fn all_at(q: QParam) -> Vec<EntropyFunctional> {
    FunctionalKind::BUILTIN
        .into_iter()
        .map(|k| EntropyFunctional::of_kind(k, q, PhiFunction::Example).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn probvec_is_on_the_simplex(p in probvec()) {
        prop_assert!(p.iter().all(|x| x >= 0.0));
        let s: f64 = p.iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn permutation_invariance(
        (w, shuffled) in weights().prop_flat_map(|w| (Just(w.clone()), Just(w).prop_shuffle())),
        q in grid_q(),
    ) {
        let p = ProbVec::from_weights(w).unwrap();
        let r = ProbVec::from_weights(shuffled).unwrap();
        for f in all_at(q) {
            prop_assert_eq!(f.eval(&p).unwrap().to_bits(), f.eval(&r).unwrap().to_bits(), "{}", f.label());
        }
    }

    #[test]
    fn degenerate_zero(n in 1usize..8, idx in 0usize..8, q in grid_q()) {
        let p = ProbVec::degenerate(n, idx % n).unwrap();
        for f in all_at(q) {
            prop_assert_eq!(f.eval(&p).unwrap(), 0.0, "{}", f.label());
        }
    }

    #[test]
    fn positivity(p in probvec(), q in grid_q()) {
        let (s, n) = (tsallis(q, &p), normalized_tsallis(q, &p));
        if p.is_degenerate() {
            prop_assert_eq!(s, 0.0);
            prop_assert_eq!(n, 0.0);
        } else {
            prop_assert!(s > 0.0 && n > 0.0, "{} {}", s, n);
        }
    }

    #[test]
    fn power_sum_identity(p in probvec(), q in grid_q()) {
        let lhs = 1.0 + (1.0 - q.get()) * tsallis(q, &p);
        prop_assert!(rel_residual(lhs, power_sum(&p, q.get())) <= 1e-12);
    }

    #[test]
    fn relation_between_forms(p in probvec(), q in grid_q()) {
        prop_assert!(relation_check(q, &p) <= 1e-12 * (1.0 + tsallis(q, &p).abs()));
    }

    #[test]
    fn q_one_is_shannon(p in probvec()) {
        let h = EntropyFunctional::Shannon.eval(&p).unwrap();
        for f in all_at(QParam::ONE) {
            prop_assert!((f.eval(&p).unwrap() - h).abs() <= 4.0 * f64::EPSILON * h, "{}", f.label());
        }
    }

    #[test]
    fn product_matches_refinement(seed in any::<u64>()) {
        let mut s = SimplexSampler::new(seed);
        let sys = sample_product(&mut s, 2, 6, 0.05);
        let r = Refinement::new(sys.a().clone(), vec![sys.b().clone(); sys.a().len()]).unwrap();
        prop_assert_eq!(r.joint().len(), sys.joint().len());
        for (x, y) in r.joint().iter().zip(sys.joint().iter()) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn refinement_blocks_sum_to_marginal(seed in any::<u64>()) {
        let mut s = SimplexSampler::new(seed);
        let r = sample_refinement(&mut s, 2, 6, 4, 0.05);
        for (i, pi) in r.marginal().iter().enumerate() {
            let block: f64 = r.block(i).iter().sum();
            prop_assert!((block - pi).abs() <= 1e-14);
        }
    }

    #[test]
    fn sampler_reproducible(seed in any::<u64>(), dim in 1usize..10) {
        let (mut a, mut b) = (SimplexSampler::new(seed), SimplexSampler::new(seed));
        for _ in 0..5 {
            let (x, y) = (a.sample(dim), b.sample(dim));
            prop_assert!(x.iter().zip(y.iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }

    #[test]
    fn json_round_trip_is_lossless(seed in any::<u64>()) {
        let mut s = SimplexSampler::new(seed);
        let r = sample_refinement(&mut s, 2, 6, 4, 0.05);
        let back: Refinement = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(&back, &r);
        let sys = sample_product(&mut s, 2, 6, 0.05);
        let back: ProductSystem = serde_json::from_str(&serde_json::to_string(&sys).unwrap()).unwrap();
        prop_assert_eq!(&back, &sys);
        let p = s.sample(4);
        let back: ProbVec = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(&back, &p);
    }
}

#[test]
fn hand_computed_values() {
    let half = ProbVec::uniform(2).unwrap();
    let two = QParam::new(2.0).unwrap();
    // (1 - 2 * 0.25) / 1
    assert_relative_eq!(tsallis(two, &half), 0.5, max_relative = 1e-15);
    // 0.5 / 0.5
    assert_relative_eq!(normalized_tsallis(two, &half), 1.0, max_relative = 1e-15);
    let c3 = EntropyFunctional::class3(two).eval(&half).unwrap();
    // (2 * 0.5^1.5 - 2 * 0.5^0.5) / (-1 * 2 * 0.5^0.5)
    let by_hand = (2.0 * 0.5f64.powf(1.5) - 2.0 * 0.5f64.sqrt()) / (-2.0 * 0.5f64.sqrt());
    assert_relative_eq!(c3, by_hand, max_relative = 1e-14);
    let n3 = EntropyFunctional::n_class3(two).eval(&half).unwrap();
    assert_relative_eq!(n3, 1.0, max_relative = 1e-14);
}
