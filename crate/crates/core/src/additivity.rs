//! Residuals of the two composition laws.
//!
//! Each operation evaluates both sides of one identity on a concrete system
//! and reports `lhs - rhs` together with the scale-free relative residual
//! `|lhs - rhs| / (1 + max(|lhs|, |rhs|))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entropies::{power_sum, EntropyFunctional, FunctionalSpec};
use crate::probsys::{ProbVec, ProductSystem, Refinement};
use crate::sum::neumaier;
use crate::tolerances::{rel_residual, FAIL_TOL, PASS_TOL};
use crate::{Error, Result};

/// Original (`S_q`) or normalized (`Ŝ_q`) version of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Original,
    Normalized,
}

impl Form {
    /// Cross-term coefficient of the pseudoadditivity at `q`.
    pub fn cross_coefficient(self, q: f64) -> f64 {
        match self {
            Form::Original => 1.0 - q,
            Form::Normalized => q - 1.0,
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Original => "original",
            Form::Normalized => "normalized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    ShannonAdditivity,
    NShannonAdditivity,
    Pseudoadditivity,
    NPseudoadditivity,
    ReducedShannon,
    NReducedShannon,
}

impl IdentityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IdentityKind::ShannonAdditivity => "shannon_additivity",
            IdentityKind::NShannonAdditivity => "n_shannon_additivity",
            IdentityKind::Pseudoadditivity => "pseudoadditivity",
            IdentityKind::NPseudoadditivity => "n_pseudoadditivity",
            IdentityKind::ReducedShannon => "reduced_shannon",
            IdentityKind::NReducedShannon => "n_reduced_shannon",
        }
    }

    pub fn form(self) -> Form {
        match self {
            IdentityKind::ShannonAdditivity
            | IdentityKind::Pseudoadditivity
            | IdentityKind::ReducedShannon => Form::Original,
            _ => Form::Normalized,
        }
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The system an identity was evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemRecord {
    Refinement(Refinement),
    Product(ProductSystem),
}

impl SystemRecord {
    /// Coarse dimension: marginal length, or `|A|`.
    pub fn n(&self) -> usize {
        match self {
            SystemRecord::Refinement(r) => r.marginal().len(),
            SystemRecord::Product(s) => s.a().len(),
        }
    }

    /// Fine dimension: largest block length, or `|B|`.
    pub fn m(&self) -> usize {
        match self {
            SystemRecord::Refinement(r) => r.block_lens().into_iter().max().unwrap_or(0),
            SystemRecord::Product(s) => s.b().len(),
        }
    }
}

/// Pass/fail thresholds on the relative residual; the band between them is
/// quarantined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pass: f64,
    pub fail: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pass: PASS_TOL,
            fail: FAIL_TOL,
        }
    }
}

impl Thresholds {
    pub fn verdict(&self, rel_residual: f64) -> Verdict {
        if rel_residual <= self.pass {
            Verdict::Pass
        } else if rel_residual > self.fail {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One evaluated identity with everything needed to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: IdentityKind,
    pub functional: FunctionalSpec,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub rel_residual: f64,
    pub system: SystemRecord,
}

impl ResidualReport {
    fn new(
        identity: IdentityKind,
        f: &EntropyFunctional,
        lhs: f64,
        rhs: f64,
        system: SystemRecord,
    ) -> Result<Self> {
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(Error::NonFiniteValue(format!("{identity} for {}", f.label())));
        }
        Ok(ResidualReport {
            identity,
            functional: f.spec(),
            q: f.q(),
            lhs,
            rhs,
            residual: lhs - rhs,
            rel_residual: rel_residual(lhs, rhs),
            system,
        })
    }

    pub fn verdict(&self, thresholds: &Thresholds) -> Verdict {
        thresholds.verdict(self.rel_residual)
    }

    /// Re-evaluates the identity from the serialized descriptor and system.
    pub fn recompute(&self) -> Result<ResidualReport> {
        let f = self.functional.build()?;
        match (&self.system, self.identity) {
            (SystemRecord::Refinement(r), IdentityKind::ShannonAdditivity) => {
                shannon_additivity_residual(&f, r)
            }
            (SystemRecord::Refinement(r), IdentityKind::NShannonAdditivity) => {
                n_shannon_additivity_residual(&f, r)
            }
            (SystemRecord::Product(s), IdentityKind::Pseudoadditivity) => {
                pseudo_residual(&f, s, Form::Original)
            }
            (SystemRecord::Product(s), IdentityKind::NPseudoadditivity) => {
                pseudo_residual(&f, s, Form::Normalized)
            }
            (SystemRecord::Product(s), IdentityKind::ReducedShannon) => {
                reduced_shannon_rhs(&f, s, Form::Original)
            }
            (SystemRecord::Product(s), IdentityKind::NReducedShannon) => {
                reduced_shannon_rhs(&f, s, Form::Normalized)
            }
            (_, identity) => Err(Error::DegenerateInput(format!(
                "{identity} is not defined on this system type"
            ))),
        }
    }
}

/// Weight exponent of the grouping identity: the functional's own `q`
/// (1 for the Shannon entropy).
fn weight_exponent(f: &EntropyFunctional) -> f64 {
    f.q()
}

fn block_power_sum(block: &[f64], e: f64) -> f64 {
    let mut s: Vec<f64> = block.iter().copied().filter(|&x| x > 0.0).collect();
    s.sort_by(f64::total_cmp);
    neumaier(s.into_iter().map(|x| x.powf(e)))
}

/// `F(joint)` vs `F(marginal) + Σ_i p_i^q F(conditional_i)`.
///
/// Blocks with `p_i = 0` carry zero weight and are skipped.
pub fn shannon_additivity_residual(f: &EntropyFunctional, r: &Refinement) -> Result<ResidualReport> {
    let e = weight_exponent(f);
    let lhs = f.eval(r.joint())?;
    let mut terms = vec![f.eval(r.marginal())?];
    for (i, (pi, block)) in r.marginal().iter().zip(r.conditionals()).enumerate() {
        if pi == 0.0 {
            continue;
        }
        let cond = block.as_ref().ok_or(Error::UndefinedConditional { index: i })?;
        terms.push(pi.powf(e) * f.eval(cond)?);
    }
    let rhs = neumaier(terms);
    ResidualReport::new(
        IdentityKind::ShannonAdditivity,
        f,
        lhs,
        rhs,
        SystemRecord::Refinement(r.clone()),
    )
}

/// `(Σ_ij p_ij^q) F(joint)` vs `(Σ_i p_i^q) F(marginal) + Σ_i (Σ_j p_ij^q) F(conditional_i)`.
pub fn n_shannon_additivity_residual(
    f: &EntropyFunctional,
    r: &Refinement,
) -> Result<ResidualReport> {
    let e = weight_exponent(f);
    let lhs = power_sum(r.joint(), e) * f.eval(r.joint())?;
    let mut terms = vec![power_sum(r.marginal(), e) * f.eval(r.marginal())?];
    for (i, (pi, block)) in r.marginal().iter().zip(r.conditionals()).enumerate() {
        if pi == 0.0 {
            continue;
        }
        let cond = block.as_ref().ok_or(Error::UndefinedConditional { index: i })?;
        terms.push(block_power_sum(r.block(i), e) * f.eval(cond)?);
    }
    let rhs = neumaier(terms);
    ResidualReport::new(
        IdentityKind::NShannonAdditivity,
        f,
        lhs,
        rhs,
        SystemRecord::Refinement(r.clone()),
    )
}

/// Grouping identity in the requested form.
pub fn shannon_residual(f: &EntropyFunctional, r: &Refinement, form: Form) -> Result<ResidualReport> {
    match form {
        Form::Original => shannon_additivity_residual(f, r),
        Form::Normalized => n_shannon_additivity_residual(f, r),
    }
}

/// `S(A) + S(B) + c S(A) S(B)` for the cross-term coefficient `c`.
pub fn pseudo_combine(sa: f64, sb: f64, c: f64) -> f64 {
    sa + sb + c * sa * sb
}

/// `F(A,B)` vs `F(A) + F(B) + c F(A) F(B)` with `c = 1 - q` (original) or
/// `c = q - 1` (normalized).
pub fn pseudo_residual(
    f: &EntropyFunctional,
    s: &ProductSystem,
    form: Form,
) -> Result<ResidualReport> {
    let lhs = f.eval(s.joint())?;
    let rhs = pseudo_combine(f.eval(s.a())?, f.eval(s.b())?, form.cross_coefficient(f.q()));
    let identity = match form {
        Form::Original => IdentityKind::Pseudoadditivity,
        Form::Normalized => IdentityKind::NPseudoadditivity,
    };
    ResidualReport::new(identity, f, lhs, rhs, SystemRecord::Product(s.clone()))
}

/// Grouping identity restricted to an independent pair.
///
/// Original: `F(A,B)` vs `F(A) + (Σ a_i^q) F(B)`.
/// Normalized: `(Σ b_j^q) F(A,B)` vs `F(A) + (Σ b_j^q) F(B)`.
pub fn reduced_shannon_rhs(
    f: &EntropyFunctional,
    s: &ProductSystem,
    form: Form,
) -> Result<ResidualReport> {
    let e = weight_exponent(f);
    let joint = f.eval(s.joint())?;
    let fa = f.eval(s.a())?;
    let fb = f.eval(s.b())?;
    let (identity, lhs, rhs) = match form {
        Form::Original => {
            let wa = power_sum(s.a(), e);
            (IdentityKind::ReducedShannon, joint, fa + wa * fb)
        }
        Form::Normalized => {
            let wb = power_sum(s.b(), e);
            (IdentityKind::NReducedShannon, wb * joint, fa + wb * fb)
        }
    };
    ResidualReport::new(identity, f, lhs, rhs, SystemRecord::Product(s.clone()))
}

/// Convenience for the identity on a bare pair of vectors.
pub fn pseudo_residual_of(
    f: &EntropyFunctional,
    a: &ProbVec,
    b: &ProbVec,
    form: Form,
) -> Result<ResidualReport> {
    pseudo_residual(f, &ProductSystem::new(a.clone(), b.clone())?, form)
}
