//! Numerical thresholds used by the library and its test suites.
//!
//! Every threshold lives here so that the pass/fail criteria of the
//! verification routines are pinned in one place.

/// Allowed `|Σp - 1|` for an input probability vector.
pub const SUM_TOL: f64 = 1e-12;

/// Half-width of the band around `q = 1` in which the expm1-based forms
/// replace the direct `(…)/(q - 1)` formulas.
pub const Q_BRANCH: f64 = 1e-6;

/// An identity "holds" on a sample when its relative residual is at most this.
pub const PASS_TOL: f64 = 1e-11;

/// An identity is "violated" on a sample when its relative residual exceeds this.
/// Residuals between [`PASS_TOL`] and `FAIL_TOL` are quarantined.
pub const FAIL_TOL: f64 = 1e-4;

/// Required accuracy of the extrapolated `q → 1` limit.
pub const LIMIT_TOL: f64 = 1e-8;

/// Required agreement of the left and right limit extrapolants.
pub const TWO_SIDED_TOL: f64 = 1e-7;

/// Relative tolerance of the `S_q = (Σ p^q) Ŝ_q` relation.
pub const RELATION_TOL: f64 = 1e-12;

/// Relative tolerance for the closed form implied by the elimination.
pub const UNIQUENESS_TOL: f64 = 1e-12;

/// Central-difference step for `dφ/dq` when no analytic derivative exists.
pub const PHI_FD_STEP: f64 = 1e-6;

/// `φ(1) = 0` is accepted within this.
pub const PHI_ZERO_TOL: f64 = 1e-12;

/// `dφ/dq (1) = 1` is accepted within this.
pub const PHI_SLOPE_TOL: f64 = 1e-8;

/// Default grid of entropic indices: both regimes and both sides of `q = 1`.
pub const Q_GRID: [f64; 9] = [0.1, 0.5, 0.9, 0.999, 1.001, 1.5, 2.0, 3.0, 5.0];

/// Relative residual on the scale-free `1 + max(|lhs|, |rhs|)` denominator.
pub fn rel_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()))
}
