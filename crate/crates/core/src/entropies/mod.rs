//! The entropy functionals and their evaluation.
//!
//! Every functional is evaluated over the sorted support of its input (zero
//! entries skipped, positive entries ascending) with compensated summation.
//! Results are therefore identical for any permutation of the input.
//!
//! Near `q = 1` the direct formulas divide a vanishing numerator by a
//! vanishing denominator. Inside `|q - 1| < Q_BRANCH` the numerators are
//! rewritten with `expm1`, e.g. `1 - Σ p^q = -Σ p expm1((q-1) ln p)` on the
//! simplex, and at `q = 1` every functional returns its Shannon limit.

mod phi;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use phi::{phi_example, PhiCheck, PhiFunction, PhiSpec, EXAMPLE_PHI};

use crate::probsys::ProbVec;
use crate::sum::neumaier;
use crate::tolerances::Q_BRANCH;
use crate::{Error, Result};

/// The entropic index `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QParam(f64);

impl QParam {
    pub const ONE: QParam = QParam(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(QParam(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QParam {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        QParam::new(q)
    }
}

impl From<QParam> for f64 {
    fn from(q: QParam) -> f64 {
        q.0
    }
}

/// Which formula to evaluate. `Auto` picks `Stable` inside the branch band
/// around `q = 1` and `Direct` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Auto,
    Direct,
    Stable,
}

impl Route {
    fn resolve(self, q: f64) -> Route {
        match self {
            Route::Auto if (q - 1.0).abs() < Q_BRANCH => Route::Stable,
            Route::Auto => Route::Direct,
            r => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Shannon,
    Tsallis,
    NormalizedTsallis,
    Class2,
    Class3,
    #[serde(rename = "n_class2")]
    NClass2,
    #[serde(rename = "n_class3")]
    NClass3,
    Custom,
}

impl FunctionalKind {
    pub const BUILTIN: [FunctionalKind; 7] = [
        FunctionalKind::Shannon,
        FunctionalKind::Tsallis,
        FunctionalKind::NormalizedTsallis,
        FunctionalKind::Class2,
        FunctionalKind::Class3,
        FunctionalKind::NClass2,
        FunctionalKind::NClass3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionalKind::Shannon => "shannon",
            FunctionalKind::Tsallis => "tsallis",
            FunctionalKind::NormalizedTsallis => "normalized_tsallis",
            FunctionalKind::Class2 => "class2",
            FunctionalKind::Class3 => "class3",
            FunctionalKind::NClass2 => "n_class2",
            FunctionalKind::NClass3 => "n_class3",
            FunctionalKind::Custom => "custom",
        }
    }

    pub fn needs_phi(self) -> bool {
        matches!(self, FunctionalKind::Class2 | FunctionalKind::NClass2)
    }
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FunctionalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FunctionalKind::BUILTIN
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownFunctional(s.to_string()))
    }
}

/// Serializable descriptor, e.g. `{"kind":"class2","q":2.0,"phi":"paper_example"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl FunctionalSpec {
    /// Builds the functional. A missing `q` defaults to 1 and a missing `phi`
    /// to the registry entry `paper_example`. Custom functionals cannot be
    /// rebuilt from a descriptor.
    pub fn build(&self) -> Result<EntropyFunctional> {
        let q = QParam::new(self.q.unwrap_or(1.0))?;
        let phi = || match &self.phi {
            Some(spec) => PhiFunction::from_spec(spec),
            None => Ok(PhiFunction::Example),
        };
        Ok(match self.kind {
            FunctionalKind::Shannon => EntropyFunctional::Shannon,
            FunctionalKind::Tsallis => EntropyFunctional::Tsallis { q },
            FunctionalKind::NormalizedTsallis => EntropyFunctional::NormalizedTsallis { q },
            FunctionalKind::Class2 => EntropyFunctional::Class2 { q, phi: phi()? },
            FunctionalKind::Class3 => EntropyFunctional::Class3 { q },
            FunctionalKind::NClass2 => EntropyFunctional::NClass2 { q, phi: phi()? },
            FunctionalKind::NClass3 => EntropyFunctional::NClass3 { q },
            FunctionalKind::Custom => {
                return Err(Error::UnknownFunctional(format!(
                    "custom functional `{}` has no descriptor",
                    self.name.as_deref().unwrap_or("?")
                )))
            }
        })
    }
}

type FamilyFn = Arc<dyn Fn(f64, &ProbVec) -> f64 + Send + Sync>;

/// A q-parameterized entropy functional on probability vectors.
#[derive(Clone)]
pub enum EntropyFunctional {
    Shannon,
    Tsallis { q: QParam },
    NormalizedTsallis { q: QParam },
    Class2 { q: QParam, phi: PhiFunction },
    Class3 { q: QParam },
    NClass2 { q: QParam, phi: PhiFunction },
    NClass3 { q: QParam },
    /// A user-supplied family `(q, p) -> value`, for classifying functionals
    /// outside the built-in set.
    Custom { name: String, q: QParam, family: FamilyFn },
}

impl fmt::Debug for EntropyFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl EntropyFunctional {
    pub fn tsallis(q: QParam) -> Self {
        EntropyFunctional::Tsallis { q }
    }

    pub fn normalized_tsallis(q: QParam) -> Self {
        EntropyFunctional::NormalizedTsallis { q }
    }

    pub fn class2(q: QParam, phi: PhiFunction) -> Self {
        EntropyFunctional::Class2 { q, phi }
    }

    pub fn class3(q: QParam) -> Self {
        EntropyFunctional::Class3 { q }
    }

    pub fn n_class2(q: QParam, phi: PhiFunction) -> Self {
        EntropyFunctional::NClass2 { q, phi }
    }

    pub fn n_class3(q: QParam) -> Self {
        EntropyFunctional::NClass3 { q }
    }

    pub fn custom<F>(name: impl Into<String>, q: QParam, family: F) -> Self
    where
        F: Fn(f64, &ProbVec) -> f64 + Send + Sync + 'static,
    {
        EntropyFunctional::Custom {
            name: name.into(),
            q,
            family: Arc::new(family),
        }
    }

    /// The functional of kind `kind` at `q`; class-2 kinds use `phi`.
    pub fn of_kind(kind: FunctionalKind, q: QParam, phi: PhiFunction) -> Result<Self> {
        Ok(match kind {
            FunctionalKind::Shannon => EntropyFunctional::Shannon,
            FunctionalKind::Tsallis => Self::tsallis(q),
            FunctionalKind::NormalizedTsallis => Self::normalized_tsallis(q),
            FunctionalKind::Class2 => Self::class2(q, phi),
            FunctionalKind::Class3 => Self::class3(q),
            FunctionalKind::NClass2 => Self::n_class2(q, phi),
            FunctionalKind::NClass3 => Self::n_class3(q),
            FunctionalKind::Custom => {
                return Err(Error::UnknownFunctional("custom needs a closure".into()))
            }
        })
    }

    pub fn kind(&self) -> FunctionalKind {
        match self {
            EntropyFunctional::Shannon => FunctionalKind::Shannon,
            EntropyFunctional::Tsallis { .. } => FunctionalKind::Tsallis,
            EntropyFunctional::NormalizedTsallis { .. } => FunctionalKind::NormalizedTsallis,
            EntropyFunctional::Class2 { .. } => FunctionalKind::Class2,
            EntropyFunctional::Class3 { .. } => FunctionalKind::Class3,
            EntropyFunctional::NClass2 { .. } => FunctionalKind::NClass2,
            EntropyFunctional::NClass3 { .. } => FunctionalKind::NClass3,
            EntropyFunctional::Custom { .. } => FunctionalKind::Custom,
        }
    }

    /// The entropic index; the Shannon entropy reports 1.
    pub fn q(&self) -> f64 {
        match self {
            EntropyFunctional::Shannon => 1.0,
            EntropyFunctional::Tsallis { q }
            | EntropyFunctional::NormalizedTsallis { q }
            | EntropyFunctional::Class2 { q, .. }
            | EntropyFunctional::Class3 { q }
            | EntropyFunctional::NClass2 { q, .. }
            | EntropyFunctional::NClass3 { q }
            | EntropyFunctional::Custom { q, .. } => q.get(),
        }
    }

    pub fn is_q_parameterized(&self) -> bool {
        !matches!(self, EntropyFunctional::Shannon)
    }

    pub fn phi(&self) -> Option<&PhiFunction> {
        match self {
            EntropyFunctional::Class2 { phi, .. } | EntropyFunctional::NClass2 { phi, .. } => {
                Some(phi)
            }
            _ => None,
        }
    }

    /// The same family member at another index.
    pub fn with_q(&self, q: QParam) -> Self {
        let mut f = self.clone();
        match &mut f {
            EntropyFunctional::Shannon => {}
            EntropyFunctional::Tsallis { q: slot }
            | EntropyFunctional::NormalizedTsallis { q: slot }
            | EntropyFunctional::Class2 { q: slot, .. }
            | EntropyFunctional::Class3 { q: slot }
            | EntropyFunctional::NClass2 { q: slot, .. }
            | EntropyFunctional::NClass3 { q: slot }
            | EntropyFunctional::Custom { q: slot, .. } => *slot = q,
        }
        f
    }

    pub fn spec(&self) -> FunctionalSpec {
        FunctionalSpec {
            kind: self.kind(),
            q: self.is_q_parameterized().then(|| self.q()),
            phi: self.phi().and_then(PhiFunction::spec),
            name: match self {
                EntropyFunctional::Custom { name, .. } => Some(name.clone()),
                EntropyFunctional::Class2 { phi, .. } | EntropyFunctional::NClass2 { phi, .. }
                    if phi.spec().is_none() =>
                {
                    Some(phi.name())
                }
                _ => None,
            },
        }
    }

    /// Short human-readable label such as `class2(q=2, phi=paper_example)`.
    pub fn label(&self) -> String {
        match self {
            EntropyFunctional::Shannon => "shannon".into(),
            EntropyFunctional::Custom { name, q, .. } => format!("{name}(q={})", q.get()),
            f => match f.phi() {
                Some(phi) => format!("{}(q={}, phi={})", f.kind(), f.q(), phi.name()),
                None => format!("{}(q={})", f.kind(), f.q()),
            },
        }
    }

    pub fn eval(&self, p: &ProbVec) -> Result<f64> {
        self.eval_route(p, Route::Auto)
    }

    /// Evaluates along an explicit route. At `q = 1` both routes return the
    /// Shannon limit.
    pub fn eval_route(&self, p: &ProbVec, route: Route) -> Result<f64> {
        let q = self.q();
        let route = route.resolve(q);
        let s = p.sorted_support();
        let value = match self {
            EntropyFunctional::Shannon => shannon_sorted(&s),
            EntropyFunctional::Tsallis { .. } => tsallis_sorted(&s, q, route),
            EntropyFunctional::NormalizedTsallis { .. } => normalized_tsallis_sorted(&s, q, route),
            EntropyFunctional::Class2 { phi, .. } => class2_sorted(&s, q, phi, route, false)?,
            EntropyFunctional::Class3 { .. } => class3_sorted(&s, q, route),
            EntropyFunctional::NClass2 { phi, .. } => class2_sorted(&s, q, phi, route, true)?,
            EntropyFunctional::NClass3 { .. } => n_class3_sorted(&s, q, route),
            EntropyFunctional::Custom { family, .. } => family(q, p),
        };
        if value.is_finite() {
            // -0 + 0 = +0
            Ok(value + 0.0)
        } else {
            Err(Error::NonFiniteValue(self.label()))
        }
    }
}

/// `expm1(t x) / t`, continued by `x` at `t = 0`.
fn expm1_ratio(x: f64, t: f64) -> f64 {
    if t == 0.0 {
        x
    } else {
        (t * x).exp_m1() / t
    }
}

/// `Σ p^e` over a sorted support.
fn power_sum_sorted(s: &[f64], e: f64) -> f64 {
    neumaier(s.iter().map(|&p| p.powf(e)))
}

/// `p^e` as an unevaluated sum `hi + lo`.
///
/// `hi` is the rounded power; `lo = hi (e ln p - ln hi)` recovers most of its
/// rounding error, which matters when nearly equal power sums are subtracted.
fn pow_parts(p: f64, e: f64) -> [f64; 2] {
    let hi = p.powf(e);
    if hi == 0.0 || p == 1.0 {
        return [hi, 0.0];
    }
    let l = p.ln();
    let prod = e * l;
    let prod_err = e.mul_add(l, -prod);
    [hi, hi * ((prod - hi.ln()) + prod_err)]
}

/// `Σ p^a - Σ p^b` with compensated powers.
fn power_sum_difference(s: &[f64], a: f64, b: f64) -> f64 {
    let plus = s.iter().flat_map(|&p| pow_parts(p, a));
    let minus = s.iter().flat_map(|&p| pow_parts(p, b).map(|x| -x));
    neumaier(plus.chain(minus))
}

/// `1 - Σ p^q`, with the `1` taken as the stored mass `Σ p`.
///
/// Entries rarely sum to exactly 1 in binary. Near `q = 1` the gap divided
/// by `q - 1` would otherwise dominate the value.
fn one_minus_power_sum(s: &[f64], q: f64) -> f64 {
    neumaier(s.iter().flat_map(|&p| {
        let [hi, lo] = pow_parts(p, q);
        [p, -hi, -lo]
    }))
}

/// `-Σ p expm1((q-1) ln p) / (q-1)`, the Tsallis entropy for a normalized input.
fn tsallis_stable(s: &[f64], q: f64) -> f64 {
    -neumaier(s.iter().map(|&p| p * expm1_ratio(p.ln(), q - 1.0)))
}

fn shannon_sorted(s: &[f64]) -> f64 {
    0.0 - neumaier(s.iter().map(|&p| p * p.ln()))
}

fn tsallis_sorted(s: &[f64], q: f64, route: Route) -> f64 {
    if q == 1.0 {
        return shannon_sorted(s);
    }
    match route {
        Route::Stable => tsallis_stable(s, q),
        _ => one_minus_power_sum(s, q) / (q - 1.0),
    }
}

fn normalized_tsallis_sorted(s: &[f64], q: f64, route: Route) -> f64 {
    if q == 1.0 {
        return shannon_sorted(s);
    }
    let ps = power_sum_sorted(s, q);
    match route {
        Route::Stable => tsallis_stable(s, q) / ps,
        _ => one_minus_power_sum(s, q) / ((q - 1.0) * ps),
    }
}

fn class2_sorted(s: &[f64], q: f64, phi: &PhiFunction, route: Route, normalized: bool) -> Result<f64> {
    let weight = if normalized { power_sum_sorted(s, q) } else { 1.0 };
    let violation = |what: &str| Error::PhiViolation {
        name: phi.name(),
        reason: format!("{what} at q = {q}"),
    };
    if q == 1.0 || route == Route::Stable {
        // S_q^(2) = S_q / (φ(q)/(q-1)); at q = 1 the ratio is φ'(1).
        let ratio = phi.ratio_to_linear(q);
        if ratio == 0.0 || !ratio.is_finite() {
            return Err(violation("phi(q)/(q-1) is zero or non-finite"));
        }
        return Ok(tsallis_sorted(s, q, Route::Stable) / (ratio * weight));
    }
    let denom = phi.eval(q);
    if denom == 0.0 || !denom.is_finite() {
        return Err(violation("phi(q) is zero or non-finite"));
    }
    Ok(one_minus_power_sum(s, q) / (denom * weight))
}

fn class3_sorted(s: &[f64], q: f64, route: Route) -> f64 {
    if q == 1.0 {
        return shannon_sorted(s);
    }
    let inv = 1.0 / q;
    let denom_sum = power_sum_sorted(s, inv);
    match route {
        // Σ p^(1/q) (p^(q-1) - 1) = Σ p^(1/q) expm1((q-1) ln p)
        Route::Stable => {
            -neumaier(s.iter().map(|&p| p.powf(inv) * expm1_ratio(p.ln(), q - 1.0))) / denom_sum
        }
        _ => {
            let num = power_sum_difference(s, q + inv - 1.0, inv);
            num / ((1.0 - q) * denom_sum)
        }
    }
}

fn n_class3_sorted(s: &[f64], q: f64, route: Route) -> f64 {
    if q == 1.0 {
        return shannon_sorted(s);
    }
    let lower = (q * q + 1.0) / 2.0;
    let denom_sum = power_sum_sorted(s, lower);
    match route {
        // Σ p^((q²+1)/2) (p^(1-q) - 1), divided by (q - 1)
        Route::Stable => {
            -neumaier(s.iter().map(|&p| p.powf(lower) * expm1_ratio(p.ln(), 1.0 - q))) / denom_sum
        }
        _ => {
            let upper = (q * q - 2.0 * q + 3.0) / 2.0;
            let num = power_sum_difference(s, upper, lower);
            num / ((q - 1.0) * denom_sum)
        }
    }
}

/// `Σ p_i^e` over the support of `p`, in canonical order.
pub fn power_sum(p: &ProbVec, e: f64) -> f64 {
    power_sum_sorted(&p.sorted_support(), e)
}

/// Shannon entropy `-Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn shannon(p: &ProbVec) -> f64 {
    shannon_sorted(&p.sorted_support())
}

/// Tsallis entropy `(1 - Σ p^q) / (q - 1)`.
pub fn tsallis(q: QParam, p: &ProbVec) -> f64 {
    tsallis_sorted(&p.sorted_support(), q.get(), Route::Auto.resolve(q.get())) + 0.0
}

/// Normalized Tsallis entropy `(1 - Σ p^q) / ((q - 1) Σ p^q)`.
pub fn normalized_tsallis(q: QParam, p: &ProbVec) -> f64 {
    normalized_tsallis_sorted(&p.sorted_support(), q.get(), Route::Auto.resolve(q.get())) + 0.0
}

/// Class-2 entropy `(1 - Σ p^q) / φ(q)`.
pub fn class2(q: QParam, phi: &PhiFunction, p: &ProbVec) -> Result<f64> {
    EntropyFunctional::class2(q, phi.clone()).eval(p)
}

/// Normalized class-2 entropy `(1 - Σ p^q) / (φ(q) Σ p^q)`.
pub fn n_class2(q: QParam, phi: &PhiFunction, p: &ProbVec) -> Result<f64> {
    EntropyFunctional::n_class2(q, phi.clone()).eval(p)
}

/// Class-3 entropy `(Σ p^(q+1/q-1) - Σ p^(1/q)) / ((1 - q) Σ p^(1/q))`.
pub fn class3(q: QParam, p: &ProbVec) -> f64 {
    class3_sorted(&p.sorted_support(), q.get(), Route::Auto.resolve(q.get())) + 0.0
}

/// Normalized class-3 entropy with exponents `(q²-2q+3)/2` and `(q²+1)/2`.
pub fn n_class3(q: QParam, p: &ProbVec) -> f64 {
    n_class3_sorted(&p.sorted_support(), q.get(), Route::Auto.resolve(q.get())) + 0.0
}

/// `|S_q(p) - (Σ p^q) Ŝ_q(p)|`.
pub fn relation_check(q: QParam, p: &ProbVec) -> f64 {
    (tsallis(q, p) - power_sum(p, q.get()) * normalized_tsallis(q, p)).abs()
}
