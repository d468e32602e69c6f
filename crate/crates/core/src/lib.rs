//! # qentropy
//!
//! Nonextensive (Tsallis-type) entropies on finite probability systems, the two
//! composition laws that tell them apart, and a randomized classifier built on
//! those laws.
//!
//! | Functional | Value on `(p_1, …, p_n)` |
//! |------------|--------------------------|
//! | Shannon `S_1` | `-Σ p ln p` |
//! | Tsallis `S_q` | `(1 - Σ p^q) / (q - 1)` |
//! | normalized Tsallis `Ŝ_q` | `(1 - Σ p^q) / ((q - 1) Σ p^q)` |
//! | class-2 `S_q^(2)` | `(1 - Σ p^q) / φ(q)` |
//! | class-3 `S_q^(3)` | `(Σ p^(q+1/q-1) - Σ p^(1/q)) / ((1 - q) Σ p^(1/q))` |
//! | normalized class-2 | `(1 - Σ p^q) / (φ(q) Σ p^q)` |
//! | normalized class-3 | `(Σ p^((q²-2q+3)/2) - Σ p^((q²+1)/2)) / ((q - 1) Σ p^((q²+1)/2))` |
//!
//! The two composition laws are
//!
//! - **Shannon additivity** (grouping): `S(p_11, …, p_nm) = S(p_1, …, p_n) + Σ p_i^q S(p_i1/p_i, …)`
//! - **pseudoadditivity** (independent systems): `S(A,B) = S(A) + S(B) + (1-q) S(A) S(B)`
//!
//! with normalized counterparts in which the cross-term coefficient is `q - 1`.
//! A functional satisfying both is class 1 (only the Tsallis entropy does),
//! only the first is class 2, only the second is class 3.
//!
//! ## Modules
//!
//! - [`probsys`]: probability vectors, refinements, product systems, seeded sampling
//! - [`entropies`]: the seven functionals, `φ(q)`, stable evaluation near `q = 1`
//! - [`additivity`]: residuals of both laws, original and normalized
//! - [`classify`]: randomized classification, counterexample search, the
//!   elimination that singles out the Tsallis form
//! - [`limits`]: numerical `q → 1` limits by Richardson extrapolation
//!
//! ## Quick start
//!
//! ```rust
//! use qentropy::{EntropyFunctional, ProbVec, QParam};
//!
//! let p = ProbVec::new(vec![0.5, 0.5]).unwrap();
//! let s2 = EntropyFunctional::tsallis(QParam::new(2.0).unwrap());
//! assert!((s2.eval(&p).unwrap() - 0.5).abs() < 1e-15);
//! ```

pub mod additivity;
pub mod classify;
pub mod entropies;
pub mod limits;
pub mod probsys;
pub mod tolerances;

mod sum;

pub use additivity::{Form, IdentityKind, ResidualReport, SystemRecord, Thresholds, Verdict};
pub use classify::{ClassLabel, ClassReport, ClassifyConfig, IdentityChoice, UniquenessReport};
pub use entropies::{
    EntropyFunctional, FunctionalKind, FunctionalSpec, PhiFunction, PhiSpec, QParam, Route,
};
pub use limits::LimitReport;
pub use probsys::{ProbVec, ProductSystem, Refinement, SimplexSampler};

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative probability {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, not 1 (tolerance {tol:e})")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("cannot normalize a vector with no positive mass")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("marginal entry {index} is positive but has no conditional block")]
    UndefinedConditional { index: usize },

    #[error("entropic index must be a finite positive real, got {0}")]
    InvalidQ(f64),

    #[error("phi({name}) violates its conditions: {reason}")]
    PhiViolation { name: String, reason: String },

    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    #[error("{functional} does not tend to the Shannon entropy as q -> 1 (error {error:e})")]
    LimitConditionFailed { functional: String, error: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unknown functional or phi descriptor: {0}")]
    UnknownFunctional(String),
}

pub type Result<T> = std::result::Result<T, Error>;
