use proptest::prelude::*;
use qentropy::additivity::{pseudo_residual, reduced_shannon_rhs, shannon_residual};
use qentropy::classify::{
    classify, class1_implied_value, find_counterexample, sample_product, sample_refinement,
    SearchOutcome,
};
use qentropy::entropies::{normalized_tsallis, tsallis};
use qentropy::limits::limit_check;
use qentropy::tolerances::Q_GRID;
use qentropy::{
    ClassLabel, EntropyFunctional, Error, Form, FunctionalKind, IdentityChoice, PhiFunction,
    ProbVec, QParam, SimplexSampler,
};

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn grid_q() -> impl Strategy<Value = QParam> {
    prop::sample::select(Q_GRID.to_vec()).prop_map(q)
}

fn kind_form(kind: FunctionalKind) -> Form {
    match kind {
        FunctionalKind::NormalizedTsallis | FunctionalKind::NClass2 | FunctionalKind::NClass3 => {
            Form::Normalized
        }
        _ => Form::Original,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tsallis_satisfies_both_laws(seed in any::<u64>(), q in grid_q()) {
        let mut s = SimplexSampler::new(seed);
        let (r, p) = (sample_refinement(&mut s, 2, 6, 4, 0.05), sample_product(&mut s, 2, 6, 0.05));
        for (f, form) in [
            (EntropyFunctional::tsallis(q), Form::Original),
            (EntropyFunctional::normalized_tsallis(q), Form::Normalized),
        ] {
            prop_assert!(shannon_residual(&f, &r, form).unwrap().rel_residual <= 1e-11);
            prop_assert!(pseudo_residual(&f, &p, form).unwrap().rel_residual <= 1e-11);
            prop_assert!(reduced_shannon_rhs(&f, &p, form).unwrap().rel_residual <= 1e-11);
        }
    }

    #[test]
    fn class2_keeps_grouping_law_for_other_phi(seed in any::<u64>(), q in grid_q()) {
        // t + 0.3 t², a second admissible denominator
        let phi = PhiFunction::Polynomial(vec![0.0, 1.0, 0.3]);
        let mut s = SimplexSampler::new(seed);
        let r = sample_refinement(&mut s, 2, 6, 4, 0.05);
        for (f, form) in [
            (EntropyFunctional::class2(q, phi.clone()), Form::Original),
            (EntropyFunctional::n_class2(q, phi.clone()), Form::Normalized),
        ] {
            prop_assert!(shannon_residual(&f, &r, form).unwrap().rel_residual <= 1e-11);
        }
    }

    #[test]
    fn class3_keeps_pseudoadditivity(seed in any::<u64>(), q in grid_q()) {
        let mut s = SimplexSampler::new(seed);
        let p = sample_product(&mut s, 2, 6, 0.05);
        prop_assert!(pseudo_residual(&EntropyFunctional::class3(q), &p, Form::Original).unwrap().rel_residual <= 1e-11);
        prop_assert!(pseudo_residual(&EntropyFunctional::n_class3(q), &p, Form::Normalized).unwrap().rel_residual <= 1e-11);
    }

    #[test]
    fn everything_collapses_at_one(seed in any::<u64>()) {
        let mut s = SimplexSampler::new(seed);
        let p = sample_product(&mut s, 2, 6, 0.05);
        let r = p.to_refinement();
        for kind in FunctionalKind::BUILTIN {
            let f = EntropyFunctional::of_kind(kind, QParam::ONE, PhiFunction::Example).unwrap();
            for form in [Form::Original, Form::Normalized] {
                prop_assert!(pseudo_residual(&f, &p, form).unwrap().rel_residual <= 1e-12);
                prop_assert!(reduced_shannon_rhs(&f, &p, form).unwrap().rel_residual <= 1e-12);
                prop_assert!(shannon_residual(&f, &r, form).unwrap().rel_residual <= 1e-12);
            }
        }
    }

    #[test]
    fn implied_value_matches_tsallis(seed in any::<u64>(), q in grid_q()) {
        let mut s = SimplexSampler::new(seed);
        let dim = s.sample_dim(2..=6);
        let a = s.sample(dim);
        let t = tsallis(q, &a);
        let n = normalized_tsallis(q, &a);
        prop_assert!((class1_implied_value(&a, q, Form::Original).unwrap() - t).abs() <= 1e-12 * (1.0 + t.abs()));
        prop_assert!((class1_implied_value(&a, q, Form::Normalized).unwrap() - n).abs() <= 1e-12 * (1.0 + n.abs()));
    }

    #[test]
    fn limits_agree_from_both_sides(seed in any::<u64>()) {
        let mut s = SimplexSampler::new(seed);
        let dim = s.sample_dim(2..=6);
        let p = s.sample_maybe_degenerate(dim, 0.05);
        for kind in FunctionalKind::BUILTIN {
            let f = EntropyFunctional::of_kind(kind, QParam::ONE, PhiFunction::Example).unwrap();
            let r = limit_check(&f, &p).unwrap();
            prop_assert!(r.two_sided_gap() <= 1e-7);
            prop_assert!(r.error <= 1e-8);
            // the q = 1 branch is the value the limit is compared against
            prop_assert!((f.eval(&p).unwrap() - r.estimate).abs() <= 1e-8);
        }
    }
}

#[test]
fn classify_examples() {
    let cases = [
        (FunctionalKind::Tsallis, ClassLabel::Class1),
        (FunctionalKind::Class2, ClassLabel::Class2),
        (FunctionalKind::Class3, ClassLabel::Class3),
        (FunctionalKind::NormalizedTsallis, ClassLabel::Class1),
        (FunctionalKind::NClass2, ClassLabel::Class2),
        (FunctionalKind::NClass3, ClassLabel::Class3),
        (FunctionalKind::Shannon, ClassLabel::Class1),
    ];
    for (kind, label) in cases {
        let f = EntropyFunctional::of_kind(kind, QParam::ONE, PhiFunction::Example).unwrap();
        let r = classify(&f, kind_form(kind), 300, 11).unwrap();
        assert_eq!(r.label, label, "{kind}");
        if label != ClassLabel::Class1 {
            assert!(!r.witnesses.is_empty());
        }
    }
}

#[test]
fn classify_is_deterministic_and_witnesses_recompute() {
    let f = EntropyFunctional::class3(QParam::ONE);
    let a = classify(&f, Form::Original, 200, 5).unwrap();
    let b = classify(&f, Form::Original, 200, 5).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for w in a.witnesses.iter().chain([&a.worst_shannon, &a.worst_pseudo]) {
        let json = serde_json::to_string(w).unwrap();
        let back: qentropy::ResidualReport = serde_json::from_str(&json).unwrap();
        let again = back.recompute().unwrap();
        assert_eq!(again.residual.to_bits(), w.residual.to_bits());
    }
}

#[test]
fn wrong_limit_is_rejected_before_classification() {
    // slope 2 at q = 1: the family tends to half the Shannon entropy
    let f = EntropyFunctional::class2(QParam::ONE, PhiFunction::Polynomial(vec![0.0, 2.0]));
    assert!(matches!(
        classify(&f, Form::Original, 10, 0),
        Err(Error::LimitConditionFailed { .. })
    ));
}

#[test]
fn linear_phi_reduces_to_tsallis() {
    // φ = q - 1 makes the class-2 form coincide with the Tsallis entropy
    let f = EntropyFunctional::class2(QParam::ONE, PhiFunction::Polynomial(vec![0.0, 1.0]));
    assert_eq!(classify(&f, Form::Original, 200, 3).unwrap().label, ClassLabel::Class1);
}

#[test]
fn custom_functional_is_classified() {
    // the Renyi entropy is additive for products but fails both laws as stated
    let renyi = EntropyFunctional::custom("renyi", QParam::ONE, |q, p: &ProbVec| {
        if q == 1.0 {
            -p.iter().filter(|&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
        } else {
            p.iter().map(|x| x.powf(q)).sum::<f64>().ln() / (1.0 - q)
        }
    });
    let r = classify(&renyi, Form::Original, 300, 9).unwrap();
    assert_eq!(r.label, ClassLabel::Neither);
}

#[test]
fn search_examples() {
    let c2 = EntropyFunctional::class2(q(2.0), PhiFunction::Example);
    let out = find_counterexample(&c2, IdentityChoice::Pseudo, Form::Original, 1, 100).unwrap();
    let w = out.witness().unwrap();
    assert!((w.residual + 0.06).abs() <= 1e-12);

    let t = EntropyFunctional::tsallis(q(2.0));
    assert!(matches!(
        find_counterexample(&t, IdentityChoice::Shannon, Form::Original, 1, 100).unwrap(),
        SearchOutcome::NotFound { .. }
    ));

    let n3 = EntropyFunctional::n_class3(q(2.0));
    let out = find_counterexample(&n3, IdentityChoice::Shannon, Form::Normalized, 1, 100).unwrap();
    assert!(out.witness().unwrap().rel_residual > 1e-4);
}
