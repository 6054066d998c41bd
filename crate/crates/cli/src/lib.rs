// SPDX-License-Identifier: Apache-2.0

//! Experiment runner for the `semipert` command-line tool.
//!
//! [`run`] validates a configuration, executes one experiment kind, writes
//! its CSV artifact atomically and maps the outcome to an exit status:
//! 0 when every embedded check passes, 1 on a failed check, 2 on a
//! configuration error and 3 on a violated hypothesis.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use semipert::exec::Execution;

pub use config::{parse_config, ExperimentConfig, ExperimentKind};
pub use error::AppError;
pub use experiments::Outcome;
pub use report::{CheckRow, VerificationReport};

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub artifact: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> u8 {
        if self.outcome.report.pass() {
            0
        } else {
            1
        }
    }
}

/// Executes `kind` under `cfg` without touching the filesystem.
pub fn execute(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<Outcome, AppError> {
    let prepared = cfg.prepare(kind)?;
    match kind {
        ExperimentKind::SimulatePde => experiments::simulate_pde(cfg, &prepared, exec),
        ExperimentKind::DysonPhillips => experiments::dyson_phillips_run(cfg, &prepared, exec),
        ExperimentKind::MatrixDp => experiments::matrix_dp(cfg, exec),
        ExperimentKind::GammaTable => experiments::gamma_table(cfg, exec),
        ExperimentKind::Verify => verify::verify(cfg, &prepared, exec),
    }
}

/// Executes `kind` and writes its artifact into `cfg.out_dir`.
pub fn run(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<RunSummary, AppError> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(AppError::Config(format!(
                "config declares experiment {declared:?} but {kind:?} was requested"
            )));
        }
    }
    let outcome = execute(kind, cfg, exec)?;
    let artifact = report::write_atomic(&cfg.out_dir, kind.artifact_name(), &outcome.csv)?;
    Ok(RunSummary { outcome, artifact })
}
