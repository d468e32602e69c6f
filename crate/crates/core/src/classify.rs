//! Three-class classification by randomized residual search.
//!
//! The composition laws are asserted for all systems; here they are checked
//! on seeded random samples. A law *holds* when every sample passes, is
//! *violated* when some sample exceeds the fail threshold, and is
//! *inconclusive* otherwise. The pair of outcomes gives the class.
//!
//! The module also solves the equation obtained by eliminating `S(A,B)`
//! between the two laws for independent systems. The unknown entropy of one
//! system falls out in closed form, and that value is compared against the
//! Tsallis form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::additivity::{
    pseudo_combine, pseudo_residual, shannon_residual, Form, ResidualReport, SystemRecord,
    Thresholds, Verdict,
};
use crate::entropies::{power_sum, EntropyFunctional, FunctionalSpec, QParam};
use crate::limits::limit_check;
use crate::probsys::{ProbVec, ProductSystem, Refinement, SimplexSampler};
use crate::sum::neumaier;
use crate::tolerances::{rel_residual, LIMIT_TOL, PASS_TOL, Q_GRID, TWO_SIDED_TOL, UNIQUENESS_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    /// Both laws hold.
    Class1,
    /// Only the grouping (Shannon) additivity holds.
    Class2,
    /// Only the pseudoadditivity holds.
    Class3,
    Neither,
    Inconclusive,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Class1 => "class1",
            ClassLabel::Class2 => "class2",
            ClassLabel::Class3 => "class3",
            ClassLabel::Neither => "neither",
            ClassLabel::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityStatus {
    Holds,
    Violated,
    Inconclusive,
}

/// Which of the two laws to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityChoice {
    Shannon,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub form: Form,
    pub samples: usize,
    pub seed: u64,
    /// Indices drawn per sample; ignored for the Shannon entropy.
    pub q_grid: Vec<f64>,
    pub thresholds: Thresholds,
    /// Chance that any sampled vector is a point mass.
    pub degenerate_rate: f64,
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_block: usize,
    /// Witnesses kept per law.
    pub max_witnesses: usize,
    /// Distributions used for the `q → 1` precondition.
    pub limit_probes: usize,
}

impl ClassifyConfig {
    pub fn new(form: Form, samples: usize, seed: u64) -> Self {
        ClassifyConfig {
            form,
            samples,
            seed,
            q_grid: Q_GRID.to_vec(),
            thresholds: Thresholds::default(),
            degenerate_rate: 0.05,
            min_dim: 2,
            max_dim: 6,
            max_block: 4,
            max_witnesses: 5,
            limit_probes: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub functional: FunctionalSpec,
    pub form: Form,
    pub label: ClassLabel,
    pub samples: usize,
    pub q_grid: Vec<f64>,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub shannon_status: IdentityStatus,
    pub pseudo_status: IdentityStatus,
    pub shannon_failures: usize,
    pub pseudo_failures: usize,
    pub quarantined: usize,
    /// Largest precondition error `|lim F - S_1|` (absent for the Shannon entropy).
    pub limit_error: Option<f64>,
    pub worst_shannon: ResidualReport,
    pub worst_pseudo: ResidualReport,
    pub witnesses: Vec<ResidualReport>,
}

/// Random refinement: marginal of dimension in `dims`, block lengths in
/// `1..=max_block`. Zero marginal entries get no block.
pub fn sample_refinement(
    sampler: &mut SimplexSampler,
    min_dim: usize,
    max_dim: usize,
    max_block: usize,
    degenerate_rate: f64,
) -> Refinement {
    let n = sampler.sample_dim(min_dim..=max_dim);
    let marginal = sampler.sample_maybe_degenerate(n, degenerate_rate);
    let blocks = marginal
        .iter()
        .map(|pi| {
            let m = sampler.sample_dim(1..=max_block);
            let c = sampler.sample_maybe_degenerate(m, degenerate_rate);
            (pi > 0.0).then_some(c)
        })
        .collect();
    Refinement::with_blocks(marginal, blocks).expect("sampled blocks are consistent")
}

pub fn sample_product(
    sampler: &mut SimplexSampler,
    min_dim: usize,
    max_dim: usize,
    degenerate_rate: f64,
) -> ProductSystem {
    let n = sampler.sample_dim(min_dim..=max_dim);
    let a = sampler.sample_maybe_degenerate(n, degenerate_rate);
    let m = sampler.sample_dim(min_dim..=max_dim);
    let b = sampler.sample_maybe_degenerate(m, degenerate_rate);
    ProductSystem::new(a, b).expect("sampled factors are valid")
}

#[derive(Default)]
struct Tally {
    worst: Option<ResidualReport>,
    failures: usize,
    quarantined: usize,
    witnesses: Vec<ResidualReport>,
}

impl Tally {
    fn record(&mut self, r: ResidualReport, th: &Thresholds, max_witnesses: usize) {
        match r.verdict(th) {
            Verdict::Pass => {}
            Verdict::Inconclusive => self.quarantined += 1,
            Verdict::Fail => {
                self.failures += 1;
                if self.witnesses.len() < max_witnesses {
                    self.witnesses.push(r.clone());
                }
            }
        }
        // strict comparison keeps the earliest sample on ties
        if self.worst.as_ref().is_none_or(|w| r.rel_residual > w.rel_residual) {
            self.worst = Some(r);
        }
    }

    fn status(&self) -> IdentityStatus {
        if self.failures > 0 {
            IdentityStatus::Violated
        } else if self.quarantined > 0 {
            IdentityStatus::Inconclusive
        } else {
            IdentityStatus::Holds
        }
    }
}

fn label_of(shannon: IdentityStatus, pseudo: IdentityStatus) -> ClassLabel {
    use IdentityStatus::*;
    match (shannon, pseudo) {
        (Holds, Holds) => ClassLabel::Class1,
        (Holds, Violated) => ClassLabel::Class2,
        (Violated, Holds) => ClassLabel::Class3,
        (Violated, Violated) => ClassLabel::Neither,
        _ => ClassLabel::Inconclusive,
    }
}

/// Verifies the functional family tends to the Shannon entropy as `q → 1`.
pub fn check_limit_condition(f: &EntropyFunctional, seed: u64, probes: usize) -> Result<Option<f64>> {
    if !f.is_q_parameterized() {
        return Ok(None);
    }
    let base = SimplexSampler::new(seed);
    let mut worst = 0.0_f64;
    for k in 0..probes {
        let mut s = base.fork(u64::MAX - k as u64);
        let dim = s.sample_dim(2..=6);
        let p = s.sample(dim);
        let r = limit_check(f, &p)?;
        let err = r.error.max(r.two_sided_gap() * LIMIT_TOL / TWO_SIDED_TOL);
        worst = worst.max(r.error);
        if err > LIMIT_TOL {
            return Err(Error::LimitConditionFailed {
                functional: f.label(),
                error: r.error.max(r.two_sided_gap()),
            });
        }
    }
    Ok(Some(worst))
}

/// Classifies `f` over the default grid.
pub fn classify(f: &EntropyFunctional, form: Form, samples: usize, seed: u64) -> Result<ClassReport> {
    classify_with(f, &ClassifyConfig::new(form, samples, seed))
}

pub fn classify_with(f: &EntropyFunctional, cfg: &ClassifyConfig) -> Result<ClassReport> {
    assert!(cfg.samples >= 1, "need at least one sample");
    let limit_error = check_limit_condition(f, cfg.seed, cfg.limit_probes)?;
    let grid: Vec<f64> = if f.is_q_parameterized() {
        cfg.q_grid.clone()
    } else {
        vec![1.0]
    };
    let grid_q = grid.iter().map(|&q| QParam::new(q)).collect::<Result<Vec<_>>>()?;
    let base = SimplexSampler::new(cfg.seed);
    let mut shannon = Tally::default();
    let mut pseudo = Tally::default();
    for i in 0..cfg.samples {
        let mut s = base.fork(i as u64);
        let g = f.with_q(*s.pick(&grid_q));
        let r = sample_refinement(&mut s, cfg.min_dim, cfg.max_dim, cfg.max_block, cfg.degenerate_rate);
        let p = sample_product(&mut s, cfg.min_dim, cfg.max_dim, cfg.degenerate_rate);
        shannon.record(shannon_residual(&g, &r, cfg.form)?, &cfg.thresholds, cfg.max_witnesses);
        pseudo.record(pseudo_residual(&g, &p, cfg.form)?, &cfg.thresholds, cfg.max_witnesses);
    }
    let shannon_status = shannon.status();
    let pseudo_status = pseudo.status();
    let mut witnesses = shannon.witnesses;
    witnesses.extend(pseudo.witnesses);
    Ok(ClassReport {
        functional: f.spec(),
        form: cfg.form,
        label: label_of(shannon_status, pseudo_status),
        samples: cfg.samples,
        q_grid: grid,
        seed: cfg.seed,
        thresholds: cfg.thresholds,
        shannon_status,
        pseudo_status,
        shannon_failures: shannon.failures,
        pseudo_failures: pseudo.failures,
        quarantined: shannon.quarantined + pseudo.quarantined,
        limit_error,
        worst_shannon: shannon.worst.expect("samples >= 1"),
        worst_pseudo: pseudo.worst.expect("samples >= 1"),
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { attempts: usize, witness: ResidualReport },
    NotFound { budget: usize, worst: Option<ResidualReport> },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&ResidualReport> {
        match self {
            SearchOutcome::Found { witness, .. } => Some(witness),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

/// Searches for a system on which `identity` fails for `f` at its own `q`.
///
/// The first candidate is the smallest informative system (the two-outcome
/// uniform pair, or the uniform pair with one block split in two); the
/// remaining `budget - 1` candidates are random.
pub fn find_counterexample(
    f: &EntropyFunctional,
    identity: IdentityChoice,
    form: Form,
    seed: u64,
    budget: usize,
) -> Result<SearchOutcome> {
    find_counterexample_with(f, identity, &ClassifyConfig::new(form, budget, seed))
}

pub fn find_counterexample_with(
    f: &EntropyFunctional,
    identity: IdentityChoice,
    cfg: &ClassifyConfig,
) -> Result<SearchOutcome> {
    assert!(cfg.samples >= 1, "budget must be at least 1");
    let base = SimplexSampler::new(cfg.seed);
    let half = ProbVec::uniform(2)?;
    let mut worst: Option<ResidualReport> = None;
    for attempt in 0..cfg.samples {
        let mut s = base.fork(attempt as u64);
        let report = match identity {
            IdentityChoice::Shannon => {
                let r = if attempt == 0 {
                    Refinement::new(half.clone(), vec![ProbVec::new(vec![1.0])?, half.clone()])?
                } else {
                    sample_refinement(&mut s, cfg.min_dim, cfg.max_dim, cfg.max_block, cfg.degenerate_rate)
                };
                shannon_residual(f, &r, cfg.form)?
            }
            IdentityChoice::Pseudo => {
                let p = if attempt == 0 {
                    ProductSystem::new(half.clone(), half.clone())?
                } else {
                    sample_product(&mut s, cfg.min_dim, cfg.max_dim, cfg.degenerate_rate)
                };
                pseudo_residual(f, &p, cfg.form)?
            }
        };
        if report.verdict(&cfg.thresholds) == Verdict::Fail {
            return Ok(SearchOutcome::Found {
                attempts: attempt + 1,
                witness: report,
            });
        }
        if worst.as_ref().is_none_or(|w| report.rel_residual > w.rel_residual) {
            worst = Some(report);
        }
    }
    Ok(SearchOutcome::NotFound {
        budget: cfg.samples,
        worst,
    })
}

/// `c0 + c1 x` in one unknown `x`, with both coefficients kept as lists of
/// terms. Terms are only summed (with compensation) when solving, so
/// contributions that cancel between the two sides of an equation cancel
/// without rounding.
#[derive(Debug, Clone, Default)]
struct Affine {
    constant: Vec<f64>,
    slope: Vec<f64>,
}

impl Affine {
    fn unknown() -> Self {
        Affine {
            constant: vec![],
            slope: vec![1.0],
        }
    }

    fn known(v: f64) -> Self {
        Affine {
            constant: vec![v],
            slope: vec![],
        }
    }

    fn plus(mut self, other: Affine) -> Self {
        self.constant.extend(other.constant);
        self.slope.extend(other.slope);
        self
    }

    fn minus(self, other: Affine) -> Self {
        self.plus(other.times(-1.0))
    }

    fn times(mut self, k: f64) -> Self {
        self.constant.iter_mut().for_each(|c| *c *= k);
        self.slope.iter_mut().for_each(|c| *c *= k);
        self
    }

    /// Multiplies by `Σ terms`, distributing over every term.
    fn times_sum(self, terms: &[f64]) -> Self {
        let spread = |v: &[f64]| v.iter().flat_map(|&c| terms.iter().map(move |&t| c * t)).collect();
        Affine {
            constant: spread(&self.constant),
            slope: spread(&self.slope),
        }
    }

    /// Root of `self = 0`.
    fn root(&self) -> Result<f64> {
        let slope = neumaier(self.slope.iter().copied());
        if slope == 0.0 || !slope.is_finite() {
            return Err(Error::DegenerateInput(
                "eliminated equation does not determine the unknown".into(),
            ));
        }
        Ok(-neumaier(self.constant.iter().copied()) / slope)
    }
}

fn power_terms(p: &ProbVec, q: f64) -> Vec<f64> {
    p.sorted_support().into_iter().map(|x| x.powf(q)).collect()
}

/// Solves the eliminated equation for the entropy of `a`, given the value
/// `partner` of the other system.
///
/// Original form: `x + y + (1-q) x y = x + (Σ a_i^q) y` with `x = S(A)`,
/// `y = S(B)`. Normalized form: `(Σ a_j^q){y + x + (q-1) y x} = y + (Σ a_j^q) x`
/// with `x = Ŝ(a)` in the role of `B` and `y` the partner's value. The
/// equation determines `x` only when `partner ≠ 0` and `q ≠ 1`; otherwise
/// [`Error::DegenerateInput`]. The normalized form also rejects a point mass
/// `a`, whose bracket `Σ a_j^q - 1` vanishes.
pub fn class1_implied_value_with_partner(a: &ProbVec, partner: f64, q: QParam, form: Form) -> Result<f64> {
    if form == Form::Normalized && a.is_degenerate() {
        return Err(Error::DegenerateInput("point mass in the normalized elimination".into()));
    }
    let q = q.get();
    let w = power_terms(a, q);
    let x = Affine::unknown;
    let y = || Affine::known(partner);
    let equation = match form {
        Form::Original => {
            let pseudo = x().plus(y()).plus(x().times((1.0 - q) * partner));
            let grouping = x().plus(y().times_sum(&w));
            pseudo.minus(grouping)
        }
        Form::Normalized => {
            let pseudo = y().plus(x()).plus(x().times((q - 1.0) * partner)).times_sum(&w);
            let grouping = y().plus(x().times_sum(&w));
            pseudo.minus(grouping)
        }
    };
    equation.root()
}

/// The value both laws force on `a`, using a unit partner value.
pub fn class1_implied_value(a: &ProbVec, q: QParam, form: Form) -> Result<f64> {
    class1_implied_value_with_partner(a, 1.0, q, form)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessWitness {
    pub a: ProbVec,
    pub b: ProbVec,
    pub q: f64,
    pub implied: f64,
    pub candidate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub form: Form,
    pub candidate: FunctionalSpec,
    pub samples: usize,
    pub seed: u64,
    pub q_grid: Vec<f64>,
    /// Largest `|implied - F(a)| / (1 + |F(a)|)`.
    pub max_mismatch: f64,
    pub worst: Option<UniquenessWitness>,
    /// Largest relative residual of the pseudoadditivity with implied values substituted.
    pub max_pseudo_residual: f64,
    /// Same for the grouping law reduced to independent systems.
    pub max_reduced_residual: f64,
    pub pass: bool,
}

/// Checks that the closed form forced by the two laws is the Tsallis
/// entropy (original form) or the normalized Tsallis entropy.
pub fn uniqueness_check(form: Form, seed: u64, samples: usize) -> Result<UniquenessReport> {
    let family = match form {
        Form::Original => EntropyFunctional::tsallis(QParam::ONE),
        Form::Normalized => EntropyFunctional::normalized_tsallis(QParam::ONE),
    };
    elimination_mismatch(&family, form, seed, samples, &Q_GRID)
}

/// Compares a candidate family with the value forced by the elimination.
///
/// Each sample draws `q` from `grid \ {1}` and non-degenerate `a`, `b`. The
/// candidate's value on `b` is the partner in the eliminated equation for
/// `a`. Implied values for `a`, `b` and `a × b` are also substituted back
/// into both laws, which must then hold simultaneously.
pub fn elimination_mismatch(
    family: &EntropyFunctional,
    form: Form,
    seed: u64,
    samples: usize,
    grid: &[f64],
) -> Result<UniquenessReport> {
    let grid: Vec<QParam> = grid
        .iter()
        .filter(|&&q| q != 1.0)
        .map(|&q| QParam::new(q))
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(Error::DegenerateInput("grid has no q != 1".into()));
    }
    let base = SimplexSampler::new(seed);
    let mut max_mismatch = 0.0_f64;
    let mut worst = None;
    let mut max_pseudo = 0.0_f64;
    let mut max_reduced = 0.0_f64;
    for i in 0..samples {
        let mut s = base.fork(i as u64);
        let q = *s.pick(&grid);
        let (a, b) = (non_degenerate(&mut s), non_degenerate(&mut s));
        let f = family.with_q(q);
        let candidate = f.eval(&a)?;
        let implied = class1_implied_value_with_partner(&a, f.eval(&b)?, q, form)?;
        let mismatch = rel_residual(implied, candidate);
        if mismatch > max_mismatch || worst.is_none() {
            max_mismatch = max_mismatch.max(mismatch);
            worst = Some(UniquenessWitness {
                a: a.clone(),
                b: b.clone(),
                q: q.get(),
                implied,
                candidate,
            });
        }

        let ab = ProductSystem::new(a.clone(), b.clone())?;
        let sa = class1_implied_value(&a, q, form)?;
        let sb = class1_implied_value(&b, q, form)?;
        let sab = class1_implied_value(ab.joint(), q, form)?;
        let c = form.cross_coefficient(q.get());
        max_pseudo = max_pseudo.max(rel_residual(sab, pseudo_combine(sa, sb, c)));
        let reduced = match form {
            Form::Original => rel_residual(sab, sa + power_sum(&a, q.get()) * sb),
            Form::Normalized => {
                let wb = power_sum(&b, q.get());
                rel_residual(wb * sab, sa + wb * sb)
            }
        };
        max_reduced = max_reduced.max(reduced);
    }
    Ok(UniquenessReport {
        form,
        candidate: family.spec(),
        samples,
        seed,
        q_grid: grid.iter().map(|q| q.get()).collect(),
        max_mismatch,
        worst,
        max_pseudo_residual: max_pseudo,
        max_reduced_residual: max_reduced,
        pass: max_mismatch <= UNIQUENESS_TOL && max_pseudo <= PASS_TOL && max_reduced <= PASS_TOL,
    })
}

fn non_degenerate(s: &mut SimplexSampler) -> ProbVec {
    let dim = s.sample_dim(2..=6);
    s.sample(dim)
}

/// The system a witness was found on, re-serialized for display.
pub fn witness_system_json(r: &ResidualReport) -> String {
    match &r.system {
        SystemRecord::Refinement(x) => serde_json::to_string(x),
        SystemRecord::Product(x) => serde_json::to_string(x),
    }
    .expect("systems serialize")
}
