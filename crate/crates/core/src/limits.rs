//! Numerical `q → 1` limits.
//!
//! A family is evaluated at `q = 1 ± h0 2^-k`, `k = 0..=levels`, on both sides.
//! One Richardson step on the two innermost points of each side removes the
//! linear term; the estimate is the mean of the two extrapolants. The
//! innermost offset stays outside the stable branch so the direct formulas
//! are what gets checked.

use serde::{Deserialize, Serialize};

use crate::entropies::{shannon, EntropyFunctional, FunctionalSpec, QParam};
use crate::probsys::ProbVec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub h0: f64,
    pub levels: u32,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { h0: 1e-2, levels: 10 }
    }
}

impl LimitConfig {
    pub fn min_offset(&self) -> f64 {
        self.h0 * 0.5f64.powi(self.levels as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub functional: FunctionalSpec,
    pub p: ProbVec,
    pub estimate: f64,
    pub target: f64,
    pub error: f64,
    pub left: f64,
    pub right: f64,
    pub q_min_offset: f64,
    pub q_sequence: Vec<f64>,
    pub extrapolated: bool,
}

impl LimitReport {
    /// `|left - right|`: both one-sided limits must agree for the limit to exist.
    pub fn two_sided_gap(&self) -> f64 {
        (self.left - self.right).abs()
    }
}

/// Checks that `family` tends to the Shannon entropy of `p` as `q → 1`.
pub fn limit_check(family: &EntropyFunctional, p: &ProbVec) -> Result<LimitReport> {
    limit_check_with(family, p, &LimitConfig::default())
}

pub fn limit_check_with(
    family: &EntropyFunctional,
    p: &ProbVec,
    cfg: &LimitConfig,
) -> Result<LimitReport> {
    assert!(cfg.levels >= 1, "need at least two points per side");
    let offsets: Vec<f64> = (0..=cfg.levels)
        .map(|k| cfg.h0 * 0.5f64.powi(k as i32))
        .collect();
    let mut q_sequence = Vec::with_capacity(2 * offsets.len());
    let mut side = |sign: f64| -> Result<f64> {
        let mut values = Vec::with_capacity(offsets.len());
        for &h in &offsets {
            let q = 1.0 + sign * h;
            q_sequence.push(q);
            let v = family.with_q(QParam::new(q)?).eval(p)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue(format!("{} at q = {q}", family.label())));
            }
            values.push(v);
        }
        let n = values.len();
        // f(h) = L + c h + O(h²)  =>  2 f(h/2) - f(h) = L + O(h²)
        Ok(2.0 * values[n - 1] - values[n - 2])
    };
    let right = side(1.0)?;
    let left = side(-1.0)?;
    let estimate = 0.5 * (left + right);
    let target = shannon(p);
    Ok(LimitReport {
        functional: family.spec(),
        p: p.clone(),
        estimate,
        target,
        error: (estimate - target).abs(),
        left,
        right,
        q_min_offset: cfg.min_offset(),
        q_sequence,
        extrapolated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropies::PhiFunction;
    use crate::tolerances::{LIMIT_TOL, Q_BRANCH};

    #[test]
    fn tsallis_half_tends_to_ln2() {
        let p = ProbVec::uniform(2).unwrap();
        let r = limit_check(&EntropyFunctional::tsallis(QParam::ONE), &p).unwrap();
        assert!(r.error <= 1e-9, "{r:?}");
        assert!((r.target - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.q_sequence.len(), 22);
    }

    #[test]
    fn degenerate_limit_is_zero() {
        let p = ProbVec::degenerate(3, 1).unwrap();
        let r = limit_check(&EntropyFunctional::class3(QParam::ONE), &p).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.target, 0.0);
    }

    #[test]
    fn sequence_stays_outside_branch() {
        assert!(LimitConfig::default().min_offset() > Q_BRANCH);
    }

    #[test]
    fn wrong_slope_phi_misses_the_limit() {
        let p = ProbVec::new(vec![0.2, 0.3, 0.5]).unwrap();
        let f = EntropyFunctional::class2(QParam::ONE, PhiFunction::Polynomial(vec![0.0, 2.0, 1.0]));
        let r = limit_check(&f, &p).unwrap();
        assert!((r.estimate - r.target / 2.0).abs() < 1e-8);
        assert!(r.error > LIMIT_TOL);
    }

    #[test]
    fn non_finite_family_is_an_error() {
        let f = EntropyFunctional::custom("blowup", QParam::ONE, |q, _| 1.0 / (q - 1.0).abs().min(0.0));
        let p = ProbVec::uniform(2).unwrap();
        assert!(matches!(limit_check(&f, &p), Err(Error::NonFiniteValue(_))));
    }
}
