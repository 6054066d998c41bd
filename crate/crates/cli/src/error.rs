// SPDX-License-Identifier: Apache-2.0

use std::fmt;

/// Failure classes of a run, each with its own process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum AppError {
    /// Malformed or out-of-range configuration. Exit status 2.
    Config(String),
    /// A hypothesis of the underlying theory is violated. Exit status 3.
    Hypothesis(String),
    /// An embedded check or a computation failed. Exit status 1.
    Check(String),
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Hypothesis(_) => 3,
            AppError::Check(_) | AppError::Io(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Hypothesis(m) => write!(f, "hypothesis violated: {m}"),
            AppError::Check(m) => write!(f, "check failed: {m}"),
            AppError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<semipert::Error> for AppError {
    fn from(e: semipert::Error) -> Self {
        use semipert::Error as E;
        match e {
            E::Smallness { .. }
            | E::NotPositive(_)
            | E::NegativeOnGrid { .. }
            | E::NotDominated { .. }
            | E::StageCertificate { .. } => AppError::Hypothesis(e.to_string()),
            E::Parse { .. } | E::InvalidArgument(_) => AppError::Config(e.to_string()),
            E::Domain(_)
            | E::OverlappingSteps { .. }
            | E::NonConvergence { .. }
            | E::Singular(_) => AppError::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}
