// SPDX-License-Identifier: Apache-2.0

//! The single-purpose subcommands. Each returns one CSV artifact and the
//! checks embedded in the run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semipert::dsperturb::{
    dyson_phillips, positivity_audit, volterra_oracle, DSPerturbation, DysonPhillipsOptions,
    TAIL_CERTIFY_RTOL,
};
use semipert::exec::Execution;
use semipert::matrixlab::{
    dp_implemented_at, random_system, staged_corollary, Matrix, MatrixSystem,
};
use semipert::specfun::{gamma_gap, gamma_gap_floor_identity_check, incomplete_gamma_int};

use crate::config::{ExperimentConfig, ExperimentKind, Prepared};
use crate::error::AppError;
use crate::report::{fmt, worst_max, worst_min, CheckRow, Table, VerificationReport};

/// CSV text plus the checks it carries.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: ExperimentKind,
    pub csv: String,
    pub report: VerificationReport,
}

pub fn dp_options(cfg: &ExperimentConfig, exec: Execution) -> DysonPhillipsOptions {
    DysonPhillipsOptions {
        terms: cfg.time.terms,
        dt: cfg.time.dt,
        exec,
    }
}

/// Series against the Volterra oracle on `times × window`.
/// Schema: `t,x,w_series,w_oracle,diff`.
pub fn simulate_pde(
    cfg: &ExperimentConfig,
    p: &Prepared,
    exec: Execution,
) -> Result<Outcome, AppError> {
    let pert = DSPerturbation::new(p.measure.clone());
    let t_max = cfg.time.t_max;
    let dp = dyson_phillips(&pert, &p.u0, t_max, &dp_options(cfg, exec))?;
    let oracle = volterra_oracle(&pert, &p.u0, t_max, cfg.time.dt, exec)?;
    let xs = p.window.linspace(cfg.window.resolution);
    let mut table = Table::new(&["t", "x", "w_series", "w_oracle", "diff"]);
    let mut worst = 0.0f64;
    for &t in &p.times {
        let rows = exec.map(&xs, |&x| (dp.eval(t, x), oracle.eval(t, x)));
        for (&x, (ws, wo)) in xs.iter().zip(rows) {
            let diff = (ws - wo).abs();
            worst = worst_max(worst, diff);
            table.row(&[fmt(t), fmt(x), fmt(ws), fmt(wo), fmt(diff)]);
        }
    }
    let mut report = VerificationReport::default();
    report.push(CheckRow::at_most(
        "simulate.series_vs_oracle",
        worst,
        0.0,
        cfg.tolerances.oracle,
    ));
    let d = dp.diagnostics();
    report.push(CheckRow::at_most(
        "simulate.tail",
        d.tail,
        0.0,
        TAIL_CERTIFY_RTOL * p.u0.sup_bound(),
    ));
    Ok(Outcome {
        kind: ExperimentKind::SimulatePde,
        csv: table.finish(),
        report,
    })
}

/// Term magnitudes of the series. Schema: `n,phi_sup,ratio,tail_bound`,
/// with `ratio` empty for `n = 0` and `tail_bound = ‖φₙ‖·t`.
pub fn dyson_phillips_run(
    cfg: &ExperimentConfig,
    p: &Prepared,
    exec: Execution,
) -> Result<Outcome, AppError> {
    let pert = DSPerturbation::new(p.measure.clone());
    let t = cfg.time.t_max;
    let opts = dp_options(cfg, exec);
    let dp = dyson_phillips(&pert, &p.u0, t, &opts)?;
    let d = dp.diagnostics();
    let mut table = Table::new(&["n", "phi_sup", "ratio", "tail_bound"]);
    for (n, &s) in d.phi_sup.iter().enumerate() {
        let ratio = if n == 0 {
            String::new()
        } else {
            fmt(d.ratios[n - 1])
        };
        table.row(&[n.to_string(), fmt(s), ratio, fmt(s * t)]);
    }
    let mut report = VerificationReport::default();
    report.push(CheckRow::at_most(
        "dyson_phillips.tail",
        d.tail,
        0.0,
        TAIL_CERTIFY_RTOL * p.u0.sup_bound(),
    ));
    report.push(CheckRow::at_most(
        "dyson_phillips.contraction_ratio",
        d.contraction_ratio,
        1.0,
        0.0,
    ));

    let xs = p.window.linspace(cfg.window.resolution);
    let u0_nonneg = p
        .times
        .iter()
        .chain(&[0.0])
        .all(|&s| xs.iter().all(|&x| p.u0.eval(x + s) >= 0.0));
    if p.measure.is_positive() && u0_nonneg && !p.times.is_empty() {
        let audit = positivity_audit(
            &pert,
            &p.u0,
            &p.times,
            &p.window,
            cfg.window.resolution,
            &opts,
        )?;
        report.push(CheckRow::at_least(
            "dyson_phillips.min_value",
            audit.min_overall(),
            0.0,
            cfg.tolerances.positivity,
        ));
    }
    Ok(Outcome {
        kind: ExperimentKind::DysonPhillips,
        csv: table.finish(),
        report,
    })
}

/// `A = −I`, `B = [[0, 4], [0, 0]]`, `λ = 1`: `‖(λI − A)⁻¹B‖ = 2` while the
/// spectral radius of `(λI − A)⁻¹B` is zero.
pub fn nilpotent_system() -> MatrixSystem {
    let a = -Matrix::identity(2, 2);
    let b = Matrix::from_row_slice(2, 2, &[0.0, 4.0, 0.0, 0.0]);
    MatrixSystem::new(a, b, Matrix::identity(2, 2), Some(1.0)).expect("valid nilpotent instance")
}

/// `e^{−t}[[1, 4t], [0, 1]]`.
pub fn nilpotent_closed_form(t: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[1.0, 4.0 * t, 0.0, 1.0]) * (-t).exp()
}

/// Instance `i` of a seeded batch; independent of evaluation order.
pub fn seeded_instance(
    seed: u64,
    i: usize,
    max_dim: usize,
    cols: usize,
    target: f64,
) -> Result<MatrixSystem, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
    let n = rng.random_range(2..=max_dim);
    Ok(random_system(&mut rng, n, cols, target)?)
}

/// Schema: `instance,method,n,t,oracle_error,min_entry,certificate`, where
/// `certificate` is `‖(λI − A)⁻¹B‖∞` for `direct` rows and the largest stage
/// norm for `staged` rows.
pub fn matrix_dp(cfg: &ExperimentConfig, exec: Execution) -> Result<Outcome, AppError> {
    let m = &cfg.matrix;
    let ids: Vec<usize> = (0..m.instances).collect();
    let t_last = m.times.iter().copied().fold(0.0, f64::max);
    let per_instance = exec.map(
        &ids,
        |&i| -> Result<Vec<(f64, f64, [String; 7])>, AppError> {
            let sys = seeded_instance(cfg.seed, i, m.max_dim, m.cols, m.target)?;
            let n = sys.dim().0.to_string();
            let mut rows = Vec::new();
            for r in dp_implemented_at(&sys, &m.times, m.terms, Execution::Sequential)? {
                let t = r.t;
                let row = [
                    i.to_string(),
                    "direct".into(),
                    n.clone(),
                    fmt(t),
                    fmt(r.oracle_error),
                    fmt(r.min_entry),
                    fmt(r.smallness),
                ];
                rows.push((r.oracle_error, r.min_entry, row));
            }
            if i < m.staged_instances && t_last > 0.0 {
                let r = staged_corollary(&sys, m.stages, t_last, m.terms, Execution::Sequential)?;
                let cert = r.certificates.iter().map(|c| c.norm).fold(0.0, f64::max);
                let row = [
                    i.to_string(),
                    "staged".into(),
                    n,
                    fmt(t_last),
                    fmt(r.oracle_error),
                    fmt(r.min_entry),
                    fmt(cert),
                ];
                rows.push((r.oracle_error, r.min_entry, row));
            }
            Ok(rows)
        },
    );
    let mut table = Table::new(&[
        "instance",
        "method",
        "n",
        "t",
        "oracle_error",
        "min_entry",
        "certificate",
    ]);
    let (mut worst, mut lowest) = (0.0f64, f64::INFINITY);
    for rows in per_instance {
        for (err, min, row) in rows? {
            worst = worst_max(worst, err);
            lowest = worst_min(lowest, min);
            table.row(&row);
        }
    }
    let nil = nilpotent_system();
    let nil_rows = exec.map(
        &m.times,
        |&t| -> Result<(f64, f64, f64, f64, bool), AppError> {
            let r = staged_corollary(&nil, m.stages, t, m.terms, Execution::Sequential)?;
            let closed = semipert::matrixlab::max_entry(&(&r.value - nilpotent_closed_form(t)));
            let cert = r.certificates.iter().map(|c| c.norm).fold(0.0, f64::max);
            let chain = r.certificates.iter().all(|c| c.monotone_chain);
            Ok((t, closed, r.min_entry, cert, chain))
        },
    );
    let mut nil_worst = 0.0f64;
    let mut chain_ok = true;
    for r in nil_rows {
        let (t, err, min, cert, chain) = r?;
        nil_worst = worst_max(nil_worst, err);
        chain_ok &= chain;
        table.row(&[
            "nilpotent".into(),
            "staged".into(),
            "2".into(),
            fmt(t),
            fmt(err),
            fmt(min),
            fmt(cert),
        ]);
    }
    let tol = &cfg.tolerances;
    let mut report = VerificationReport::default();
    if m.instances > 0 {
        report.push(CheckRow::at_most(
            "matrix.oracle_error",
            worst,
            0.0,
            tol.matrix,
        ));
        report.push(CheckRow::at_least(
            "matrix.min_entry",
            lowest,
            0.0,
            tol.matrix_positivity,
        ));
    }
    report.push(CheckRow::at_most(
        "matrix.nilpotent_staged_error",
        nil_worst,
        0.0,
        tol.matrix,
    ));
    report.push(CheckRow::flag("matrix.nilpotent_monotone_chain", chain_ok));
    Ok(Outcome {
        kind: ExperimentKind::MatrixDp,
        csv: table.finish(),
        report,
    })
}

/// Schema: `n,upper_gamma_at_1_mantissa,upper_gamma_at_1_exp2,gamma_gap,floor_identity_residual`
/// for `n = 1..=n_max`, with `Γ(n+1, 1) = mantissa·2^exp2`.
pub fn gamma_table(cfg: &ExperimentConfig, exec: Execution) -> Result<Outcome, AppError> {
    let n_max = cfg.gamma.n_max;
    if n_max == 0 {
        return Err(AppError::Config("gamma.n_max must be at least 1".into()));
    }
    let ns: Vec<u32> = (1..=n_max).collect();
    let rows = exec.map(&ns, |&n| -> Result<_, semipert::Error> {
        let g = incomplete_gamma_int(n, 1.0)?;
        let id = gamma_gap_floor_identity_check(n);
        Ok((n, g, gamma_gap(n), id.relative_residual))
    });
    let mut table = Table::new(&[
        "n",
        "upper_gamma_at_1_mantissa",
        "upper_gamma_at_1_exp2",
        "gamma_gap",
        "floor_identity_residual",
    ]);
    let mut worst = 0.0f64;
    for r in rows {
        let (n, g, gap, res) = r?;
        worst = worst_max(worst, res);
        table.row(&[
            n.to_string(),
            fmt(g.mantissa),
            g.exponent.to_string(),
            fmt(gap),
            fmt(res),
        ]);
    }
    let mut report = VerificationReport::default();
    report.push(CheckRow::at_most(
        "gamma.floor_identity_residual",
        worst,
        0.0,
        cfg.tolerances.floor_identity,
    ));
    report.push(CheckRow::flag(
        "gamma.floor_identity_fails_at_0",
        !gamma_gap_floor_identity_check(0).holds,
    ));
    Ok(Outcome {
        kind: ExperimentKind::GammaTable,
        csv: table.finish(),
        report,
    })
}
