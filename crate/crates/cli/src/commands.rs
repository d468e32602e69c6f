use qentropy::additivity::{pseudo_residual, shannon_residual};
use qentropy::classify::{
    classify_with, find_counterexample_with, sample_product, sample_refinement, SearchOutcome,
};
use qentropy::limits::limit_check;
use qentropy::tolerances::LIMIT_TOL;
use qentropy::{
    ClassLabel, ClassReport, ClassifyConfig, Form, FunctionalKind, FunctionalSpec, IdentityChoice,
    LimitReport, ProbVec, ProductSystem, Refinement, SimplexSampler, Verdict,
};
use serde::Serialize;

use crate::args::{Expect, IdentityArg, OutFormat};
use crate::config::{CliError, CliResult, InputRecord, RunConfig};
use crate::output::{
    canonical_sort, fmt_g, residual_csv, residual_table, sha256_hex, table, Envelope, Row,
    RESIDUAL_CSV_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

pub struct Outcome {
    pub text: String,
    pub code: i32,
}

fn render<T: Serialize>(
    cfg: &RunConfig,
    no_timestamp: bool,
    result: T,
    csv: impl FnOnce(&T) -> String,
    tab: impl FnOnce(&T) -> String,
) -> String {
    match cfg.out {
        OutFormat::Json => Envelope::new(cfg, no_timestamp, result).to_json(),
        OutFormat::Csv => csv(&result),
        OutFormat::Table => tab(&result),
    }
}

fn q_for(cfg: &RunConfig, kind: FunctionalKind) -> Vec<f64> {
    if kind == FunctionalKind::Shannon {
        vec![1.0]
    } else {
        cfg.q_values().to_vec()
    }
}

fn p_text(p: &ProbVec) -> String {
    p.iter().map(fmt_g).collect::<Vec<_>>().join(";")
}

fn p_hash(p: &ProbVec) -> String {
    sha256_hex(&serde_json::to_string(p).expect("distributions serialize"))
}

fn distributions(cfg: &RunConfig) -> CliResult<Vec<ProbVec>> {
    cfg.inputs()?
        .into_iter()
        .map(|r| match r {
            InputRecord::Dist(p) => Ok(p),
            _ => Err(CliError::Usage("expected distributions as input".into())),
        })
        .collect()
}

#[derive(Serialize)]
struct EvalRow {
    functional: FunctionalSpec,
    q: f64,
    p: ProbVec,
    value: f64,
}

pub fn eval(cfg: &RunConfig, no_timestamp: bool) -> CliResult<Outcome> {
    let dists = distributions(cfg)?;
    if dists.is_empty() {
        return Err(CliError::Usage("eval needs --p or --in".into()));
    }
    let mut rows = Vec::new();
    for &kind in &cfg.kinds {
        for q in q_for(cfg, kind) {
            let f = cfg.functional(kind, q)?;
            for p in &dists {
                rows.push((p_hash(p), EvalRow {
                    functional: f.spec(),
                    q: f.q(),
                    p: p.clone(),
                    value: f.eval(p)?,
                }));
            }
        }
    }
    rows.sort_by(|(ha, a), (hb, b)| {
        a.functional
            .kind
            .as_str()
            .cmp(b.functional.kind.as_str())
            .then_with(|| a.q.total_cmp(&b.q))
            .then_with(|| ha.cmp(hb))
    });
    let rows: Vec<EvalRow> = rows.into_iter().map(|(_, r)| r).collect();
    let cells = |rows: &Vec<EvalRow>| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                vec![
                    r.functional.kind.to_string(),
                    fmt_g(r.q),
                    p_text(&r.p),
                    fmt_g(r.value),
                ]
            })
            .collect()
    };
    let text = render(
        cfg,
        no_timestamp,
        rows,
        |rows| {
            let mut lines = vec!["kind,q,p,value".to_string()];
            lines.extend(cells(rows).into_iter().map(|c| c.join(",")));
            lines.join("\n")
        },
        |rows| table(&["kind", "q", "p", "value"], &cells(rows)),
    );
    Ok(Outcome { text, code: EXIT_OK })
}

#[derive(Serialize, Default)]
struct Counts {
    pass: usize,
    fail: usize,
    inconclusive: usize,
}

impl Counts {
    fn of(rows: &[Row]) -> Self {
        let mut c = Counts::default();
        for r in rows {
            match r.verdict {
                Verdict::Pass => c.pass += 1,
                Verdict::Fail => c.fail += 1,
                Verdict::Inconclusive => c.inconclusive += 1,
            }
        }
        c
    }
}

#[derive(Serialize)]
struct VerifyResult {
    counts: Counts,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Row>,
    rows: Vec<Row>,
}

enum System {
    Refinement(Refinement),
    Product(ProductSystem),
}

fn systems(cfg: &RunConfig) -> CliResult<Vec<System>> {
    let inputs = cfg.inputs()?;
    if inputs.is_empty() {
        let base = SimplexSampler::new(cfg.seed);
        let d = ClassifyConfig::new(Form::Original, cfg.samples, cfg.seed);
        return Ok((0..cfg.samples)
            .map(|i| {
                let mut s = base.fork(i as u64);
                match cfg.identity {
                    IdentityArg::Shannon => System::Refinement(sample_refinement(
                        &mut s,
                        d.min_dim,
                        d.max_dim,
                        d.max_block,
                        d.degenerate_rate,
                    )),
                    IdentityArg::Pseudo => System::Product(sample_product(
                        &mut s,
                        d.min_dim,
                        d.max_dim,
                        d.degenerate_rate,
                    )),
                }
            })
            .collect());
    }
    inputs
        .into_iter()
        .map(|r| match (r, cfg.identity) {
            (InputRecord::Refinement(r), IdentityArg::Shannon) => Ok(System::Refinement(r)),
            (InputRecord::Product(p), IdentityArg::Shannon) => Ok(System::Refinement(p.to_refinement())),
            (InputRecord::Product(p), IdentityArg::Pseudo) => Ok(System::Product(p)),
            _ => Err(CliError::Usage(format!(
                "input records do not fit the {} identity",
                identity_name(cfg.identity)
            ))),
        })
        .collect()
}

fn identity_name(i: IdentityArg) -> &'static str {
    match i {
        IdentityArg::Shannon => "shannon",
        IdentityArg::Pseudo => "pseudo",
    }
}

fn strict_or(cfg: &RunConfig, inconclusive: bool, code: i32) -> i32 {
    if cfg.strict && inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        code
    }
}

pub fn verify(cfg: &RunConfig, no_timestamp: bool) -> CliResult<Outcome> {
    if matches!(cfg.expect, Some(Expect::Class1 | Expect::Class2 | Expect::Class3)) {
        return Err(CliError::Usage("verify expects pass or fail".into()));
    }
    let systems = systems(cfg)?;
    let mut rows = Vec::new();
    for &kind in &cfg.kinds {
        let form = cfg.form_for(kind);
        for q in q_for(cfg, kind) {
            let f = cfg.functional(kind, q)?;
            for s in &systems {
                let report = match s {
                    System::Refinement(r) => shannon_residual(&f, r, form)?,
                    System::Product(p) => pseudo_residual(&f, p, form)?,
                };
                rows.push(Row::new(report, &cfg.thresholds));
            }
        }
    }
    canonical_sort(&mut rows);
    let counts = Counts::of(&rows);
    let witness = rows
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .max_by(|a, b| a.report.rel_residual.total_cmp(&b.report.rel_residual))
        .cloned();
    let code = match cfg.expect {
        Some(Expect::Pass) if counts.fail > 0 || counts.inconclusive > 0 => EXIT_EXPECTATION,
        Some(Expect::Fail) if counts.fail == 0 => EXIT_EXPECTATION,
        _ => EXIT_OK,
    };
    let code = strict_or(cfg, counts.inconclusive > 0, code);
    let result = VerifyResult {
        counts,
        witness,
        rows,
    };
    let text = render(
        cfg,
        no_timestamp,
        result,
        |r| residual_csv_block(&r.rows),
        |r| {
            let mut t = residual_table(&r.rows);
            t.push_str(&format!(
                "\npass={} fail={} inconclusive={}",
                r.counts.pass, r.counts.fail, r.counts.inconclusive
            ));
            t
        },
    );
    Ok(Outcome { text, code })
}

fn residual_csv_block(rows: &[Row]) -> String {
    let mut lines = vec![RESIDUAL_CSV_HEADER.to_string()];
    lines.extend(rows.iter().map(residual_csv));
    lines.join("\n")
}

fn expected_label(e: Expect) -> Option<ClassLabel> {
    match e {
        Expect::Class1 => Some(ClassLabel::Class1),
        Expect::Class2 => Some(ClassLabel::Class2),
        Expect::Class3 => Some(ClassLabel::Class3),
        Expect::Pass | Expect::Fail => None,
    }
}

pub fn classify(cfg: &RunConfig, no_timestamp: bool) -> CliResult<Outcome> {
    let expected = match cfg.expect {
        Some(e) => Some(
            expected_label(e).ok_or_else(|| CliError::Usage("classify expects class1, class2 or class3".into()))?,
        ),
        None => None,
    };
    let mut reports: Vec<ClassReport> = Vec::new();
    for &kind in &cfg.kinds {
        let grid = cfg.q_values().to_vec();
        let f = cfg.functional(kind, 1.0)?;
        let mut c = ClassifyConfig::new(cfg.form_for(kind), cfg.samples, cfg.seed);
        c.q_grid = grid;
        c.thresholds = cfg.thresholds;
        reports.push(classify_with(&f, &c)?);
    }
    let inconclusive = reports.iter().any(|r| r.label == ClassLabel::Inconclusive);
    let code = match expected {
        Some(l) if reports.iter().any(|r| r.label != l) => EXIT_EXPECTATION,
        _ => EXIT_OK,
    };
    let code = strict_or(cfg, inconclusive, code);
    let th = cfg.thresholds;
    let text = render(
        cfg,
        no_timestamp,
        reports,
        |reports| {
            let mut rows: Vec<Row> = reports
                .iter()
                .flat_map(|r| {
                    [r.worst_shannon.clone(), r.worst_pseudo.clone()]
                        .into_iter()
                        .chain(r.witnesses.iter().cloned())
                })
                .map(|r| Row::new(r, &th))
                .collect();
            canonical_sort(&mut rows);
            residual_csv_block(&rows)
        },
        |reports| {
            let body: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.functional.kind.to_string(),
                        form_name(r.form).into(),
                        r.label.to_string(),
                        fmt_g(r.worst_shannon.rel_residual),
                        fmt_g(r.worst_pseudo.rel_residual),
                        r.shannon_failures.to_string(),
                        r.pseudo_failures.to_string(),
                        r.quarantined.to_string(),
                    ]
                })
                .collect();
            table(
                &[
                    "kind",
                    "form",
                    "label",
                    "worst_shannon",
                    "worst_pseudo",
                    "shannon_fail",
                    "pseudo_fail",
                    "quarantined",
                ],
                &body,
            )
        },
    );
    Ok(Outcome { text, code })
}

fn form_name(f: Form) -> &'static str {
    match f {
        Form::Original => "original",
        Form::Normalized => "normalized",
    }
}

#[derive(Serialize)]
struct LimitResult {
    threshold: f64,
    max_error: f64,
    reports: Vec<LimitReport>,
}

pub fn limit(cfg: &RunConfig, no_timestamp: bool) -> CliResult<Outcome> {
    let mut dists = distributions(cfg)?;
    if dists.is_empty() {
        let base = SimplexSampler::new(cfg.seed);
        dists = (0..cfg.samples)
            .map(|i| {
                let mut s = base.fork(i as u64);
                let dim = s.sample_dim(2..=6);
                s.sample(dim)
            })
            .collect();
    }
    let mut reports = Vec::new();
    for &kind in &cfg.kinds {
        let f = cfg.functional(kind, 1.0)?;
        for p in &dists {
            reports.push((p_hash(p), limit_check(&f, p)?));
        }
    }
    reports.sort_by(|(ha, a), (hb, b)| {
        a.functional
            .kind
            .as_str()
            .cmp(b.functional.kind.as_str())
            .then_with(|| ha.cmp(hb))
    });
    let reports: Vec<LimitReport> = reports.into_iter().map(|(_, r)| r).collect();
    let max_error = reports.iter().map(|r| r.error).fold(0.0, f64::max);
    let code = if max_error <= LIMIT_TOL { EXIT_OK } else { EXIT_EXPECTATION };
    let cells = |r: &LimitResult| -> Vec<Vec<String>> {
        r.reports
            .iter()
            .map(|x| {
                vec![
                    x.functional.kind.to_string(),
                    fmt_g(x.q_min_offset),
                    fmt_g(x.estimate),
                    fmt_g(x.target),
                    fmt_g(x.error),
                ]
            })
            .collect()
    };
    let header = ["functional", "q_min_offset", "estimate", "target", "error"];
    let result = LimitResult {
        threshold: LIMIT_TOL,
        max_error,
        reports,
    };
    let text = render(
        cfg,
        no_timestamp,
        result,
        |r| {
            let mut lines = vec![header.join(",")];
            lines.extend(cells(r).into_iter().map(|c| c.join(",")));
            lines.join("\n")
        },
        |r| table(&header, &cells(r)),
    );
    Ok(Outcome { text, code })
}

#[derive(Serialize)]
struct SearchRow {
    functional: FunctionalSpec,
    q: f64,
    identity: IdentityChoice,
    form: Form,
    #[serde(flatten)]
    outcome: SearchOutcome,
}

pub fn search(cfg: &RunConfig, no_timestamp: bool) -> CliResult<Outcome> {
    if matches!(cfg.expect, Some(Expect::Class1 | Expect::Class2 | Expect::Class3)) {
        return Err(CliError::Usage("search expects pass or fail".into()));
    }
    let identity = match cfg.identity {
        IdentityArg::Shannon => IdentityChoice::Shannon,
        IdentityArg::Pseudo => IdentityChoice::Pseudo,
    };
    let mut rows = Vec::new();
    for &kind in &cfg.kinds {
        let form = cfg.form_for(kind);
        for q in q_for(cfg, kind) {
            let f = cfg.functional(kind, q)?;
            let mut c = ClassifyConfig::new(form, cfg.budget, cfg.seed);
            c.thresholds = cfg.thresholds;
            rows.push(SearchRow {
                functional: f.spec(),
                q: f.q(),
                identity,
                form,
                outcome: find_counterexample_with(&f, identity, &c)?,
            });
        }
    }
    let found = rows.iter().filter(|r| r.outcome.witness().is_some()).count();
    let code = match cfg.expect {
        Some(Expect::Pass) if found > 0 => EXIT_EXPECTATION,
        Some(Expect::Pass) => EXIT_OK,
        _ if found < rows.len() => EXIT_EXPECTATION,
        _ => EXIT_OK,
    };
    let th = cfg.thresholds;
    let text = render(
        cfg,
        no_timestamp,
        rows,
        |rows| {
            let mut w: Vec<Row> = rows
                .iter()
                .filter_map(|r| r.outcome.witness().cloned())
                .map(|r| Row::new(r, &th))
                .collect();
            canonical_sort(&mut w);
            residual_csv_block(&w)
        },
        |rows| {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| match &r.outcome {
                    SearchOutcome::Found { attempts, witness } => vec![
                        r.functional.kind.to_string(),
                        fmt_g(r.q),
                        "found".into(),
                        attempts.to_string(),
                        fmt_g(witness.residual),
                        fmt_g(witness.rel_residual),
                    ],
                    SearchOutcome::NotFound { budget, worst } => vec![
                        r.functional.kind.to_string(),
                        fmt_g(r.q),
                        "not_found".into(),
                        budget.to_string(),
                        worst.as_ref().map_or("-".into(), |w| fmt_g(w.residual)),
                        worst.as_ref().map_or("-".into(), |w| fmt_g(w.rel_residual)),
                    ],
                })
                .collect();
            table(&["kind", "q", "outcome", "attempts", "residual", "rel_residual"], &body)
        },
    );
    Ok(Outcome { text, code })
}
