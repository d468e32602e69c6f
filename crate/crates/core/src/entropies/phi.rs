//! The denominator function `φ(q)` of the class-2 family.
//!
//! A valid `φ` is differentiable with `φ(1) = 0`, `φ'(1) = 1`, `φ(q) ≠ 0` for
//! `q ≠ 1`, and `φ ≠ q - 1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::tolerances::{PHI_FD_STEP, PHI_SLOPE_TOL, PHI_ZERO_TOL, Q_GRID};
use crate::{Error, Result};

/// Registry name of `φ(q) = (q - 1)(q² + 1) / 2`.
pub const EXAMPLE_PHI: &str = "paper_example";

/// `φ(q) = (q - 1)(q² + 1) / 2`.
pub fn phi_example(q: f64) -> f64 {
    (q - 1.0) * (q * q + 1.0) / 2.0
}

fn phi_example_deriv(q: f64) -> f64 {
    // d/dq [(q - 1)(q² + 1)/2] = (3q² - 2q + 1)/2
    (3.0 * q * q - 2.0 * q + 1.0) / 2.0
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Serialized form of a `φ`: a registry name or polynomial coefficients in `(q - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Named(String),
    Poly(Vec<f64>),
}

#[derive(Clone)]
pub enum PhiFunction {
    /// `(q - 1)(q² + 1) / 2`
    Example,
    /// `Σ c_k (q - 1)^k`
    Polynomial(Vec<f64>),
    /// Arbitrary closure; the derivative falls back to a central difference.
    Custom {
        name: String,
        eval: ScalarFn,
        deriv: Option<ScalarFn>,
    },
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFunction::Example => f.write_str("PhiFunction::Example"),
            PhiFunction::Polynomial(c) => f.debug_tuple("PhiFunction::Polynomial").field(c).finish(),
            PhiFunction::Custom { name, .. } => write!(f, "PhiFunction::Custom({name})"),
        }
    }
}

impl PhiFunction {
    pub fn from_spec(spec: &PhiSpec) -> Result<Self> {
        match spec {
            PhiSpec::Named(name) if name == EXAMPLE_PHI => Ok(PhiFunction::Example),
            PhiSpec::Named(name) => Err(Error::UnknownFunctional(format!("phi `{name}`"))),
            PhiSpec::Poly(c) if c.is_empty() || c.iter().any(|x| !x.is_finite()) => {
                Err(Error::UnknownFunctional(format!("phi polynomial {c:?}")))
            }
            PhiSpec::Poly(c) => Ok(PhiFunction::Polynomial(c.clone())),
        }
    }

    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PhiFunction::Custom {
            name: name.into(),
            eval: Arc::new(eval),
            deriv: None,
        }
    }

    pub fn custom_with_deriv<F, D>(name: impl Into<String>, eval: F, deriv: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PhiFunction::Custom {
            name: name.into(),
            eval: Arc::new(eval),
            deriv: Some(Arc::new(deriv)),
        }
    }

    /// `None` for closures, which cannot be serialized.
    pub fn spec(&self) -> Option<PhiSpec> {
        match self {
            PhiFunction::Example => Some(PhiSpec::Named(EXAMPLE_PHI.into())),
            PhiFunction::Polynomial(c) => Some(PhiSpec::Poly(c.clone())),
            PhiFunction::Custom { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            PhiFunction::Example => EXAMPLE_PHI.into(),
            PhiFunction::Polynomial(c) => format!("poly{c:?}"),
            PhiFunction::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, q: f64) -> f64 {
        match self {
            PhiFunction::Example => phi_example(q),
            PhiFunction::Polynomial(c) => horner(c, q - 1.0),
            PhiFunction::Custom { eval, .. } => eval(q),
        }
    }

    /// `dφ/dq`, analytic when available, else central difference with step
    /// [`PHI_FD_STEP`] (truncation error `O(h²)`).
    pub fn deriv(&self, q: f64) -> f64 {
        match self {
            PhiFunction::Example => phi_example_deriv(q),
            PhiFunction::Polynomial(c) => {
                let d: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, ck)| k as f64 * ck)
                    .collect();
                horner(&d, q - 1.0)
            }
            PhiFunction::Custom {
                deriv: Some(d), ..
            } => d(q),
            PhiFunction::Custom { eval, .. } => {
                let h = PHI_FD_STEP;
                (eval(q + h) - eval(q - h)) / (2.0 * h)
            }
        }
    }

    /// `φ(q) / (q - 1)`, continued by `φ'(1)` at `q = 1`.
    ///
    /// Polynomials divide out the factor exactly, so the ratio stays accurate
    /// arbitrarily close to `q = 1`.
    pub fn ratio_to_linear(&self, q: f64) -> f64 {
        let t = q - 1.0;
        match self {
            PhiFunction::Example => (q * q + 1.0) / 2.0,
            PhiFunction::Polynomial(c) if c[0] == 0.0 => horner(&c[1..], t),
            _ if t == 0.0 => self.deriv(1.0),
            _ => self.eval(q) / t,
        }
    }

    /// Checks the four conditions on `grid` (the default grid when empty).
    pub fn check(&self, grid: &[f64]) -> PhiCheck {
        let grid: Vec<f64> = if grid.is_empty() { Q_GRID.to_vec() } else { grid.to_vec() };
        let off_one: Vec<f64> = grid.into_iter().filter(|&q| q != 1.0).collect();
        let value_at_one = self.eval(1.0);
        let slope_at_one = self.deriv(1.0);
        let nonzero_off_one = off_one.iter().all(|&q| self.eval(q).abs() > PHI_ZERO_TOL);
        let gaps: Vec<bool> = off_one
            .iter()
            .map(|&q| (self.eval(q) - (q - 1.0)).abs() > PHI_ZERO_TOL)
            .collect();
        PhiCheck {
            name: self.name(),
            value_at_one,
            slope_at_one,
            vanishes_at_one: value_at_one.abs() <= PHI_ZERO_TOL,
            unit_slope_at_one: (slope_at_one - 1.0).abs() <= PHI_SLOPE_TOL,
            nonzero_off_one,
            differs_from_linear_somewhere: gaps.iter().any(|&g| g),
            differs_from_linear_everywhere: !gaps.is_empty() && gaps.iter().all(|&g| g),
        }
    }

    /// Errors unless [`PhiFunction::check`] passes in its weak (existential) form.
    pub fn validate(&self, grid: &[f64]) -> Result<PhiCheck> {
        let c = self.check(grid);
        let reason = if !c.vanishes_at_one {
            format!("phi(1) = {:e}, expected 0", c.value_at_one)
        } else if !c.unit_slope_at_one {
            format!("phi'(1) = {}, expected 1", c.slope_at_one)
        } else if !c.nonzero_off_one {
            "phi vanishes at some q != 1 on the grid".to_string()
        } else if !c.differs_from_linear_somewhere {
            "phi coincides with q - 1 on the grid".to_string()
        } else {
            return Ok(c);
        };
        Err(Error::PhiViolation {
            name: c.name,
            reason,
        })
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Outcome of checking the conditions on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCheck {
    pub name: String,
    pub value_at_one: f64,
    pub slope_at_one: f64,
    pub vanishes_at_one: bool,
    pub unit_slope_at_one: bool,
    pub nonzero_off_one: bool,
    /// Weak form of `φ ≠ q - 1`: differs at one grid point or more.
    pub differs_from_linear_somewhere: bool,
    /// Strong form: differs at every grid point `q ≠ 1`.
    pub differs_from_linear_everywhere: bool,
}

impl PhiCheck {
    pub fn is_valid(&self) -> bool {
        self.vanishes_at_one
            && self.unit_slope_at_one
            && self.nonzero_off_one
            && self.differs_from_linear_somewhere
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_values() {
        assert_eq!(phi_example(1.0), 0.0);
        assert_eq!(phi_example(2.0), 2.5);
        // independent central difference at q = 1
        let h = 1e-5;
        let fd = (phi_example(1.0 + h) - phi_example(1.0 - h)) / (2.0 * h);
        assert!((fd - 1.0).abs() < 1e-9);
        assert!((PhiFunction::Example.deriv(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example_phi_is_the_cubic_polynomial() {
        // (q-1)(q²+1)/2 = t + t² + t³/2 with t = q - 1
        let poly = PhiFunction::Polynomial(vec![0.0, 1.0, 1.0, 0.5]);
        for q in [0.1, 0.7, 1.0, 1.3, 2.0, 5.0] {
            assert!((poly.eval(q) - phi_example(q)).abs() < 1e-13);
            assert!((poly.deriv(q) - PhiFunction::Example.deriv(q)).abs() < 1e-12);
            assert!((poly.ratio_to_linear(q) - PhiFunction::Example.ratio_to_linear(q)).abs() < 1e-13);
        }
    }

    #[test]
    fn example_phi_passes_strong_form() {
        let c = PhiFunction::Example.check(&[]);
        assert!(c.is_valid());
        assert!(c.differs_from_linear_everywhere);
    }

    #[test]
    fn violations_are_reported() {
        let linear = PhiFunction::Polynomial(vec![0.0, 1.0]);
        assert!(!linear.check(&[]).differs_from_linear_somewhere);
        assert!(matches!(linear.validate(&[]), Err(Error::PhiViolation { .. })));

        let steep = PhiFunction::Polynomial(vec![0.0, 2.0]);
        assert!(!steep.check(&[]).unit_slope_at_one);

        let shifted = PhiFunction::Polynomial(vec![0.1, 1.0]);
        assert!(!shifted.check(&[]).vanishes_at_one);

        // (q-1) - (q-1)²: vanishes again at q = 2
        let double_root = PhiFunction::Polynomial(vec![0.0, 1.0, -1.0]);
        assert!(!double_root.check(&[]).nonzero_off_one);
    }

    #[test]
    fn custom_uses_finite_difference() {
        let phi = PhiFunction::custom("sinh", |q: f64| (q - 1.0).sinh());
        assert!((phi.deriv(1.0) - 1.0).abs() < 1e-9);
        assert!(phi.check(&[]).is_valid());
        assert!(phi.spec().is_none());
    }

    #[test]
    fn descriptor_round_trip() {
        let named: PhiSpec = serde_json::from_str(r#""paper_example""#).unwrap();
        assert!(matches!(PhiFunction::from_spec(&named).unwrap(), PhiFunction::Example));
        let poly: PhiSpec = serde_json::from_str("[0.0, 1.0, 0.25]").unwrap();
        assert_eq!(PhiFunction::from_spec(&poly).unwrap().spec(), Some(poly));
        assert!(PhiFunction::from_spec(&PhiSpec::Named("nope".into())).is_err());
    }
}
