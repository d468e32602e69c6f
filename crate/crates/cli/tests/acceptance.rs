//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use qentropy::additivity::{pseudo_residual, shannon_residual};
use qentropy::classify::{
    elimination_mismatch, find_counterexample, sample_product, sample_refinement,
    uniqueness_check, SearchOutcome,
};
use qentropy::entropies::{power_sum, relation_check, shannon, tsallis};
use qentropy::limits::limit_check;
use qentropy::tolerances::{rel_residual, Q_GRID};
use qentropy::{
    EntropyFunctional, Form, FunctionalKind, IdentityChoice, PhiFunction, ProbVec, ProductSystem,
    QParam, Refinement, Route, SimplexSampler,
};

const SEED: u64 = 20_240_917;
const SAMPLES: usize = 1000;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

/// The shared sample set: 1000 refinements and 1000 product systems.
fn sample_set() -> Vec<(Refinement, ProductSystem)> {
    let base = SimplexSampler::new(SEED);
    (0..SAMPLES)
        .map(|i| {
            let mut s = base.fork(i as u64);
            let r = sample_refinement(&mut s, 2, 6, 4, 0.05);
            let p = sample_product(&mut s, 2, 6, 0.05);
            (r, p)
        })
        .collect()
}

fn family(kind: FunctionalKind) -> EntropyFunctional {
    EntropyFunctional::of_kind(kind, QParam::ONE, PhiFunction::Example).unwrap()
}

/// Largest relative residual of one law over the sample set and the grid.
fn worst(f: &EntropyFunctional, form: Form, shannon_law: bool, set: &[(Refinement, ProductSystem)]) -> f64 {
    let mut m = 0.0_f64;
    for &qv in &Q_GRID {
        let g = f.with_q(q(qv));
        for (r, p) in set {
            let rep = if shannon_law {
                shannon_residual(&g, r, form).unwrap()
            } else {
                pseudo_residual(&g, p, form).unwrap()
            };
            m = m.max(rep.rel_residual);
        }
    }
    m
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn class1_identities(set: &[(Refinement, ProductSystem)]) -> Outcome {
    let t = family(FunctionalKind::Tsallis);
    let n = family(FunctionalKind::NormalizedTsallis);
    let vals = [
        worst(&t, Form::Original, true, set),
        worst(&t, Form::Original, false, set),
        worst(&n, Form::Normalized, true, set),
        worst(&n, Form::Normalized, false, set),
    ];
    check(
        vals.iter().all(|&v| v <= 1e-11),
        format!(
            "tsallis shannon/pseudo max {:.2e}/{:.2e}; normalized {:.2e}/{:.2e} (limit 1e-11)",
            vals[0], vals[1], vals[2], vals[3]
        ),
    )
}

fn class2_behavior(set: &[(Refinement, ProductSystem)]) -> Outcome {
    let c2 = family(FunctionalKind::Class2);
    let n2 = family(FunctionalKind::NClass2);
    let s_orig = worst(&c2, Form::Original, true, set);
    let s_norm = worst(&n2, Form::Normalized, true, set);
    let found = |f: &EntropyFunctional, form| {
        find_counterexample(&f.with_q(q(2.0)), IdentityChoice::Pseudo, form, SEED, 100)
            .unwrap()
            .witness()
            .cloned()
    };
    let w_orig = found(&c2, Form::Original);
    let w_norm = found(&n2, Form::Normalized);
    // independent hand witness: S(A) = S(B) = 0.5/2.5, S(AB) = 0.75/2.5
    let half = ProbVec::uniform(2).unwrap();
    let hand = pseudo_residual(
        &c2.with_q(q(2.0)),
        &ProductSystem::new(half.clone(), half).unwrap(),
        Form::Original,
    )
    .unwrap();
    let expected = 0.75 / 2.5 - (0.2 + 0.2 - 0.2 * 0.2);
    let ok = s_orig <= 1e-11
        && s_norm <= 1e-11
        && w_orig.is_some()
        && w_norm.is_some()
        && (hand.residual - expected).abs() <= 1e-12
        && (hand.residual + 0.06).abs() <= 1e-12;
    check(
        ok,
        format!(
            "shannon max {s_orig:.2e}/{s_norm:.2e}; pseudo witness orig={} norm={}; hand residual {}",
            w_orig.is_some(),
            w_norm.is_some(),
            hand.residual
        ),
    )
}

fn class3_behavior(set: &[(Refinement, ProductSystem)]) -> Outcome {
    let c3 = family(FunctionalKind::Class3);
    let n3 = family(FunctionalKind::NClass3);
    let p_orig = worst(&c3, Form::Original, false, set);
    let p_norm = worst(&n3, Form::Normalized, false, set);
    let rel = |f: &EntropyFunctional, form| match find_counterexample(
        &f.with_q(q(2.0)),
        IdentityChoice::Shannon,
        form,
        SEED,
        100,
    )
    .unwrap()
    {
        SearchOutcome::Found { witness, .. } => witness.rel_residual,
        SearchOutcome::NotFound { .. } => 0.0,
    };
    let (r_orig, r_norm) = (rel(&c3, Form::Original), rel(&n3, Form::Normalized));
    check(
        p_orig <= 1e-11 && p_norm <= 1e-11 && r_orig > 1e-4 && r_norm > 1e-4,
        format!("pseudo max {p_orig:.2e}/{p_norm:.2e}; shannon witness rel {r_orig:.3e}/{r_norm:.3e}"),
    )
}

fn uniqueness() -> Outcome {
    let o = uniqueness_check(Form::Original, SEED, SAMPLES).unwrap();
    let n = uniqueness_check(Form::Normalized, SEED, SAMPLES).unwrap();
    let c2 = elimination_mismatch(&family(FunctionalKind::Class2), Form::Original, SEED, SAMPLES, &Q_GRID)
        .unwrap();
    check(
        o.pass && n.pass && o.max_mismatch <= 1e-12 && n.max_mismatch <= 1e-12 && c2.max_mismatch > 1e-4,
        format!(
            "mismatch orig {:.2e}, norm {:.2e} (limit 1e-12); substitution residuals {:.2e}/{:.2e}; class2 {:.3e}",
            o.max_mismatch,
            n.max_mismatch,
            o.max_pseudo_residual.max(o.max_reduced_residual),
            n.max_pseudo_residual.max(n.max_reduced_residual),
            c2.max_mismatch
        ),
    )
}

fn limit_condition() -> Outcome {
    let base = SimplexSampler::new(SEED);
    let dists: Vec<ProbVec> = (0..100)
        .map(|i| {
            let mut s = base.fork(i);
            let d = s.sample_dim(2..=6);
            s.sample_maybe_degenerate(d, 0.05)
        })
        .collect();
    let mut max_err = 0.0_f64;
    let mut worst_kind = FunctionalKind::Shannon;
    for kind in FunctionalKind::BUILTIN {
        let f = family(kind);
        for p in &dists {
            let e = limit_check(&f, p).unwrap().error;
            if e > max_err {
                max_err = e;
                worst_kind = kind;
            }
        }
    }
    check(
        max_err <= 1e-8,
        format!("7 functionals x 100 distributions, max error {max_err:.2e} ({worst_kind}; limit 1e-8)"),
    )
}

fn structural(set: &[(Refinement, ProductSystem)]) -> Outcome {
    let mut rel = 0.0_f64;
    let mut ident = 0.0_f64;
    for &qv in &Q_GRID {
        for (r, _) in set {
            for p in [r.marginal(), r.joint()] {
                let s = tsallis(q(qv), p);
                rel = rel.max(relation_check(q(qv), p) / (1.0 + s.abs()));
                ident = ident.max(rel_residual(1.0 + (1.0 - qv) * s, power_sum(p, qv)));
            }
        }
    }
    // q = 1: chain rule and plain additivity of the Shannon entropy
    let t1 = EntropyFunctional::tsallis(QParam::ONE);
    let mut collapse = 0.0_f64;
    for (r, p) in set {
        let direct_rhs = shannon(r.marginal())
            + r.marginal()
                .iter()
                .zip(r.conditionals())
                .filter_map(|(pi, c)| c.as_ref().map(|c| pi * shannon(c)))
                .sum::<f64>();
        collapse = collapse
            .max(rel_residual(shannon(r.joint()), direct_rhs))
            .max(shannon_residual(&t1, r, Form::Original).unwrap().rel_residual)
            .max(rel_residual(shannon(p.joint()), shannon(p.a()) + shannon(p.b())))
            .max(pseudo_residual(&t1, p, Form::Original).unwrap().rel_residual);
    }
    check(
        rel <= 1e-12 && ident <= 1e-12 && collapse <= 1e-12,
        format!("relation {rel:.2e}; 1+(1-q)S vs sum p^q {ident:.2e}; q=1 collapse {collapse:.2e} (limit 1e-12)"),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qentropy"))
            .args(["classify", "--kind", "tsallis", "--seed", "42", "--samples", "1000", "--no-timestamp"])
            .env_remove("QENTROPY_SEED")
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    check(
        a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout,
        format!("two classify runs, {} bytes each, identical={}", a.stdout.len(), a.stdout == b.stdout),
    )
}

fn branch_consistency() -> Outcome {
    let base = SimplexSampler::new(SEED);
    let dists: Vec<ProbVec> = (0..200)
        .map(|i| {
            let mut s = base.fork(i);
            let d = s.sample_dim(2..=6);
            s.sample_maybe_degenerate(d, 0.05)
        })
        .collect();
    let mut max_rel = 0.0_f64;
    for kind in FunctionalKind::BUILTIN.into_iter().filter(|&k| k != FunctionalKind::Shannon) {
        for qv in [1.0 + 2e-6, 1.0 - 2e-6, 1.0 + 5e-7, 1.0 - 5e-7] {
            let f = family(kind).with_q(q(qv));
            for p in &dists {
                let a = f.eval_route(p, Route::Stable).unwrap();
                let b = f.eval_route(p, Route::Direct).unwrap();
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    max_rel = max_rel.max((a - b).abs() / scale);
                }
            }
        }
    }
    check(
        max_rel <= 1e-9,
        format!("stable vs direct at q = 1 +- 2e-6, 1 +- 5e-7: max relative gap {max_rel:.2e} (limit 1e-9)"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let set = sample_set();
    let criteria: Vec<Criterion> = vec![
        ("class-1 identities", Box::new(|| class1_identities(&set))),
        ("class-2 behavior", Box::new(|| class2_behavior(&set))),
        ("class-3 behavior", Box::new(|| class3_behavior(&set))),
        ("uniqueness oracle", Box::new(uniqueness)),
        ("limit condition", Box::new(limit_condition)),
        ("structural identities", Box::new(|| structural(&set))),
        ("determinism", Box::new(determinism)),
        ("branch consistency", Box::new(branch_consistency)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{}] {name}: {detail} [{:.2}s]", i + 1, t.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
