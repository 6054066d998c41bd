// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semipert::exec::Execution;
use semipert_cli::{parse_config, run, AppError, ExperimentConfig, ExperimentKind};

#[derive(Debug, Parser)]
#[command(
    name = "semipert",
    version,
    about = "Perturbed translation semigroups: experiments and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Series against the Volterra oracle on a space-time grid.
    SimulatePde(Common),
    /// Term magnitudes and tail bound of the series.
    DysonPhillips(Common),
    /// Matrix series and staged construction against expm.
    MatrixDp(Common),
    /// Incomplete gamma values and the floor identity, n = 1..=n_max.
    GammaTable(GammaArgs),
    /// Every invariant suite; writes verify.csv.
    Verify(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed for random instances
    #[arg(long)]
    seed: Option<u64>,
    /// Time step of the trace grid
    #[arg(long)]
    dt: Option<f64>,
    /// Number of series terms N.
    #[arg(long)]
    terms: Option<usize>,
    /// Final time of the simulation
    #[arg(long)]
    t_max: Option<f64>,
    /// Run every loop on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct GammaArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_max: Option<u32>,
}

fn load(common: &Common) -> Result<ExperimentConfig, AppError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| match e {
                AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dt) = common.dt {
        cfg.time.dt = dt;
    }
    if let Some(terms) = common.terms {
        cfg.time.terms = terms;
    }
    if let Some(t_max) = common.t_max {
        cfg.time.t_max = t_max;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<u8, AppError> {
    let (kind, common, n_max) = match cli.command {
        Command::SimulatePde(c) => (ExperimentKind::SimulatePde, c, None),
        Command::DysonPhillips(c) => (ExperimentKind::DysonPhillips, c, None),
        Command::MatrixDp(c) => (ExperimentKind::MatrixDp, c, None),
        Command::GammaTable(g) => (ExperimentKind::GammaTable, g.common, g.n_max),
        Command::Verify(c) => (ExperimentKind::Verify, c, None),
    };
    let mut cfg = load(&common)?;
    if let Some(n) = n_max {
        cfg.gamma.n_max = n;
    }
    let exec = if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let summary = run(kind, &cfg, exec)?;
    print!("{}", summary.outcome.report.render());
    println!("wrote {}", summary.artifact.display());
    let code = summary.exit_code();
    if code != 0 {
        for row in summary.outcome.report.failures() {
            eprintln!(
                "check failed: {} (measured {}, bound {}, tolerance {})",
                row.id, row.measured, row.bound, row.tolerance
            );
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
