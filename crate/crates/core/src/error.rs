//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the library. Identity mismatches and validation
/// findings are reported as data, not as errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("factor family {family} does not converge formally: {reason}")]
    DivergentProduct { family: usize, reason: String },

    #[error("monomial q~^{dq} t^{dt} violates the declared bound dt <= {bound}*dq + 1")]
    SubstitutionBound { dq: u32, dt: u32, bound: u32 },

    #[error("series of order {have} cannot give an exact result to q^{want}")]
    InsufficientOrder { have: u32, want: i64 },

    #[error("substitution needs a z-free series, found z^{0}")]
    NotZFree(i32),

    #[error("rate table rejected: {0}")]
    InvalidRates(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("conserved quantity {n} is not in class -{m} mod {k}")]
    ClassMismatch { n: i64, m: u32, k: u32 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("invalid GFP: {0}")]
    InvalidGfp(String),

    #[error("enumeration did not stabilize by depth {0}")]
    NonStabilization(usize),

    #[error("site product did not converge within {0} sites")]
    NonConvergence(usize),

    #[error("chain is reducible: {0}")]
    Reducible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
