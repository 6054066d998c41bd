// SPDX-License-Identifier: Apache-2.0

//! TOML experiment configuration.
//!
//! Every section is optional and every key has a default, so an empty file
//! is a valid configuration. Unknown keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

use semipert::dsperturb::DSPerturbation;
use semipert::funcspace::{BoundedFunction, CompactWindow};
use semipert::measures::RegularMeasure;

use crate::error::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SimulatePde,
    DysonPhillips,
    MatrixDp,
    GammaTable,
    Verify,
}

impl ExperimentKind {
    /// Whether the run builds the perturbed semigroup and so needs `|μ|(ℝ) < 1`.
    pub fn needs_smallness(self) -> bool {
        matches!(
            self,
            ExperimentKind::SimulatePde | ExperimentKind::DysonPhillips | ExperimentKind::Verify
        )
    }

    pub fn artifact_name(self) -> &'static str {
        match self {
            ExperimentKind::SimulatePde => "simulate_pde.csv",
            ExperimentKind::DysonPhillips => "dyson_phillips.csv",
            ExperimentKind::MatrixDp => "matrix_dp.csv",
            ExperimentKind::GammaTable => "gamma_table.csv",
            ExperimentKind::Verify => "verify.csv",
        }
    }
}

/// Initial datum presets.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialDatum {
    Constant {
        value: f64,
    },
    #[default]
    RationalBump,
    /// Linear interpolation through `(nodes, values)`, constant outside.
    Spline {
        nodes: Vec<f64>,
        values: Vec<f64>,
    },
}

impl InitialDatum {
    pub fn build(&self) -> Result<BoundedFunction, AppError> {
        match self {
            InitialDatum::Constant { value } => Ok(BoundedFunction::constant(*value)),
            InitialDatum::RationalBump => Ok(BoundedFunction::rational_bump()),
            InitialDatum::Spline { nodes, values } => {
                Ok(BoundedFunction::grid(nodes.clone(), values.clone())?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: f64,
    pub dt: f64,
    pub terms: usize,
    /// Output times; entries above `t_max` are dropped.
    pub times: Vec<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_max: 2.0,
            dt: 1e-3,
            terms: 20,
            times: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub a: f64,
    pub b: f64,
    pub resolution: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            a: -5.0,
            b: 5.0,
            resolution: 501,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixConfig {
    pub instances: usize,
    /// Dimensions `n` are drawn from `2..=max_dim`.
    pub max_dim: usize,
    /// `m`, the column count of `S0`.
    pub cols: usize,
    /// Target value of `‖(λI − A)⁻¹B‖∞`.
    pub target: f64,
    pub terms: usize,
    pub stages: usize,
    /// How many of the random instances also run the staged construction.
    pub staged_instances: usize,
    pub times: Vec<f64>,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            instances: 50,
            max_dim: 8,
            cols: 3,
            target: 0.5,
            terms: 30,
            stages: 4,
            staged_instances: 5,
            times: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaConfig {
    pub n_max: u32,
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig { n_max: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Series against Volterra oracle.
    pub oracle: f64,
    /// Solvers against closed forms.
    pub closed_form: f64,
    /// Matrix series against `expm`.
    pub matrix: f64,
    /// Lowest admissible grid value in positivity audits.
    pub positivity: f64,
    pub matrix_positivity: f64,
    pub floor_identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle: 1e-4,
            closed_form: 1e-6,
            matrix: 1e-8,
            positivity: 1e-9,
            matrix_positivity: 1e-10,
            floor_identity: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    /// Measure literal, e.g. `0.4*delta(0) + 0.1*uniform(0,1)`.
    pub measure: String,
    pub out_dir: PathBuf,
    pub initial: InitialDatum,
    pub time: TimeConfig,
    pub window: WindowConfig,
    pub matrix: MatrixConfig,
    pub gamma: GammaConfig,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: 20240917,
            measure: "0.4*delta(0) + 0.1*uniform(0,1)".into(),
            out_dir: PathBuf::from("out"),
            initial: InitialDatum::default(),
            time: TimeConfig::default(),
            window: WindowConfig::default(),
            matrix: MatrixConfig::default(),
            gamma: GammaConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses a TOML configuration; errors carry line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, AppError> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_owned();
        match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                AppError::Config(format!("line {line}, column {col}: {msg}"))
            }
            None => AppError::Config(msg),
        }
    })
}

/// Checked inputs shared by the experiments.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub measure: RegularMeasure,
    pub u0: BoundedFunction,
    pub window: CompactWindow,
    pub times: Vec<f64>,
}

impl ExperimentConfig {
    fn positive(name: &str, v: f64) -> Result<(), AppError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(AppError::Config(format!(
                "{name} must be a positive number, got {v}"
            )))
        }
    }

    /// Range checks, literal parsing and, for perturbation experiments, the
    /// smallness hypothesis `|μ|(ℝ)·‖h‖ < 1`.
    pub fn prepare(&self, kind: ExperimentKind) -> Result<Prepared, AppError> {
        Self::positive("time.dt", self.time.dt)?;
        Self::positive("time.t_max", self.time.t_max)?;
        if self.time.terms == 0 {
            return Err(AppError::Config("time.terms must be at least 1".into()));
        }
        if self.window.resolution < 2 {
            return Err(AppError::Config(
                "window.resolution must be at least 2".into(),
            ));
        }
        let window = CompactWindow::new(self.window.a, self.window.b)?;
        for &t in self.time.times.iter().chain(&self.matrix.times) {
            Self::positive("output time", t)?;
        }
        if self.matrix.max_dim < 2 || self.matrix.max_dim > semipert::matrixlab::MAX_DIM {
            return Err(AppError::Config(format!(
                "matrix.max_dim must lie in 2..={}",
                semipert::matrixlab::MAX_DIM
            )));
        }
        if self.matrix.cols == 0 || self.matrix.cols > semipert::matrixlab::MAX_DIM {
            return Err(AppError::Config("matrix.cols out of range".into()));
        }
        if self.matrix.stages == 0 || self.matrix.terms == 0 {
            return Err(AppError::Config(
                "matrix.stages and matrix.terms must be at least 1".into(),
            ));
        }
        if !(self.matrix.target > 0.0 && self.matrix.target < 1.0) {
            return Err(AppError::Hypothesis(format!(
                "matrix.target = {} must lie in (0, 1) for ‖(λI − A)⁻¹B‖ < 1",
                self.matrix.target
            )));
        }
        let measure: RegularMeasure = self.measure.parse().map_err(|e: semipert::Error| {
            AppError::Config(format!("measure literal '{}': {e}", self.measure))
        })?;
        let u0 = self.initial.build()?;
        if kind.needs_smallness() {
            DSPerturbation::new(measure.clone()).ensure_small()?;
        }
        let times: Vec<f64> = self
            .time
            .times
            .iter()
            .copied()
            .filter(|&t| t <= self.time.t_max)
            .collect();
        Ok(Prepared {
            measure,
            u0,
            window,
            times,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert!(c.prepare(ExperimentKind::Verify).is_ok());
    }

    #[test]
    fn line_col_is_one_based() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
