// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A function required to be nonnegative takes a negative value.
    #[error("precondition violated: {which} is negative at x = {x} (value {value})")]
    NegativeOnGrid {
        which: &'static str,
        x: f64,
        value: f64,
    },

    /// `|f| <= |g|` fails at a sample point.
    #[error("precondition violated: |f| > |g| at x = {x} ({lhs} > {rhs})")]
    NotDominated { x: f64, lhs: f64, rhs: f64 },

    /// The smallness hypothesis `‖R(λ, A₋₁) B‖ < 1` fails.
    #[error("smallness hypothesis violated: ‖R(λ,A₋₁)B‖ ≤ {bound} is not < 1 ({detail})")]
    Smallness { bound: f64, detail: String },

    #[error("positivity hypothesis violated: {0}")]
    NotPositive(String),

    #[error("step intervals overlap: [{a0}, {a1}] and [{b0}, {b1}]")]
    OverlappingSteps { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("iteration did not converge after {iterations} steps (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("stage {stage} certificate failed: {detail}")]
    StageCertificate { stage: usize, detail: String },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}
