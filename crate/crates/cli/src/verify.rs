// SPDX-License-Identifier: Apache-2.0

//! The `verify` run: every module invariant suite, executed concurrently and
//! assembled into one report in a fixed order.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semipert::dsperturb::{
    dyson_phillips, locality_certificate, positivity_audit, step_function_integral_checks,
    volterra_oracle, DSPerturbation, DysonPhillipsOptions, StepFunction,
};
use semipert::exec::Execution;
use semipert::funcspace::{check_bi_am, check_compatibility, BoundedFunction, SeminormSpec};
use semipert::matrixlab::{
    check_positive_generation, matrix_bi_am, matrix_compatibility, random_system,
    resolvent_positive_on, Matrix,
};
use semipert::measures::RegularMeasure;
use semipert::quad::adaptive_simpson;
use semipert::specfun::{gamma_gap_floor_identity_check, incomplete_gamma_int_f64};
use semipert::transgroup::{
    check_bicontinuity_axioms, extrapolated_gap, extrapolated_gap_quadrature, h_function,
    ResolventQuadrature,
};

use crate::config::{ExperimentConfig, ExperimentKind, Prepared};
use crate::error::AppError;
use crate::experiments::{matrix_dp, simulate_pde, Outcome};
use crate::report::{worst_max, worst_min, CheckRow, VerificationReport};

/// Number of seeded random pairs and initial data in the structural suites.
pub const RANDOM_CASES: usize = 100;

type Suite = fn(&ExperimentConfig, &Prepared, Execution) -> Result<VerificationReport, AppError>;

const SUITES: [(&str, Suite); 8] = [
    ("specfun", specfun_suite),
    ("transgroup", transgroup_suite),
    ("funcspace", funcspace_suite),
    ("matrix_structure", matrix_structure_suite),
    ("dsperturb_oracle", dsperturb_oracle_suite),
    ("dsperturb_closed_form", dsperturb_closed_form_suite),
    ("dsperturb_structure", dsperturb_structure_suite),
    ("matrixlab", matrixlab_suite),
];

/// Runs every suite; the report keeps suite order regardless of scheduling.
pub fn verify(cfg: &ExperimentConfig, p: &Prepared, exec: Execution) -> Result<Outcome, AppError> {
    let results = exec.map(&SUITES, |(_, suite)| suite(cfg, p, exec));
    let mut report = VerificationReport::default();
    for r in results {
        report.extend(r?);
    }
    Ok(Outcome {
        kind: ExperimentKind::Verify,
        csv: report.to_csv(),
        report,
    })
}

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|(n, _)| *n)
}

/// `Γ(n+1, x)` by adaptive quadrature of `tⁿe^{−t}` over unit segments of
/// `[x, x + 150]`; the segments keep the peak at `t = n` resolved.
fn upper_gamma_quadrature(n: u32, x: f64) -> f64 {
    let scale: f64 = (1..=n).map(f64::from).product();
    (0..150)
        .map(|k| {
            let a = x + k as f64;
            adaptive_simpson(
                |t| t.powi(n as i32) * (-t).exp(),
                a,
                a + 1.0,
                1e-16 * scale,
                50,
            )
        })
        .sum()
}

fn specfun_suite(
    cfg: &ExperimentConfig,
    _: &Prepared,
    _: Execution,
) -> Result<VerificationReport, AppError> {
    let mut r = VerificationReport::default();
    let mut worst = 0.0f64;
    for n in 0..=20 {
        for x in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let exact = incomplete_gamma_int_f64(n, x)?;
            let quad = upper_gamma_quadrature(n, x);
            worst = worst_max(worst, ((exact - quad) / quad).abs());
        }
    }
    r.push(CheckRow::at_most(
        "specfun.incomplete_gamma_vs_quadrature",
        worst,
        0.0,
        1e-10,
    ));
    let worst = (1..=30)
        .map(|n| gamma_gap_floor_identity_check(n).relative_residual)
        .fold(0.0, worst_max);
    r.push(CheckRow::at_most(
        "specfun.floor_identity_1_to_30",
        worst,
        0.0,
        cfg.tolerances.floor_identity,
    ));
    r.push(CheckRow::flag(
        "specfun.floor_identity_failure_at_0_detected",
        !gamma_gap_floor_identity_check(0).holds,
    ));
    Ok(r)
}

fn transgroup_suite(
    _: &ExperimentConfig,
    _: &Prepared,
    _: Execution,
) -> Result<VerificationReport, AppError> {
    let mut r = VerificationReport::default();
    let k = SeminormSpec::on(-2.0, 2.0, 401)?;
    let gaps: Vec<f64> = (1..=100).map(|n| extrapolated_gap(n, &k)).collect();
    let scaled = gaps
        .iter()
        .enumerate()
        .map(|(i, g)| g * (i as f64 + 2.0))
        .fold(0.0, worst_max);
    r.push(CheckRow::at_most(
        "transgroup.gap_times_n_plus_1",
        scaled,
        3.0,
        0.0,
    ));
    let rise = gaps
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, worst_max);
    r.push(CheckRow::at_most(
        "transgroup.gap_monotone_rise",
        rise,
        0.0,
        0.0,
    ));
    let q = ResolventQuadrature::new(1.0)?;
    let mut worst = 0.0f64;
    for n in [1, 5, 10, 25] {
        worst = worst_max(
            worst,
            (extrapolated_gap(n, &k) - extrapolated_gap_quadrature(n, &k, &q)?).abs(),
        );
    }
    r.push(CheckRow::at_most(
        "transgroup.gap_vs_laplace_quadrature",
        worst,
        0.0,
        1e-8,
    ));
    let bump = check_bicontinuity_axioms(&BoundedFunction::rational_bump(), 2.0, &k)?;
    r.push(CheckRow::at_most(
        "transgroup.semigroup_law",
        bump.semigroup_law_error,
        0.0,
        0.0,
    ));
    r.push(CheckRow::flag("transgroup.bicontinuity_axioms", bump.pass));
    let h = check_bicontinuity_axioms(&h_function(), 2.0, &k)?;
    r.push(CheckRow::flag("transgroup.bicontinuity_axioms_h", h.pass));
    Ok(r)
}

fn funcspace_suite(
    cfg: &ExperimentConfig,
    _: &Prepared,
    _: Execution,
) -> Result<VerificationReport, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xF0);
    let p = SeminormSpec::on(-4.0, 4.0, 161)?;
    let (mut bi_am, mut compat) = (true, true);
    for _ in 0..RANDOM_CASES {
        let f = BoundedFunction::random_nonnegative_spline(&mut rng, -4.0, 4.0, 9);
        let g = BoundedFunction::random_nonnegative_spline(&mut rng, -4.0, 4.0, 9);
        bi_am &= check_bi_am(&f, &g, &p)?.holds;
        let frac = rng.random_range(0.0..1.0);
        compat &= check_compatibility(&g.scale(frac), &g, &p)?;
    }
    let mut r = VerificationReport::default();
    r.push(CheckRow::flag("funcspace.bi_am_random_pairs", bi_am));
    r.push(CheckRow::flag(
        "funcspace.compatibility_random_pairs",
        compat,
    ));
    Ok(r)
}

fn matrix_structure_suite(
    cfg: &ExperimentConfig,
    _: &Prepared,
    _: Execution,
) -> Result<VerificationReport, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA1);
    let (mut bi_am, mut compat) = (true, true);
    for _ in 0..RANDOM_CASES {
        let (n, m) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let s = Matrix::from_fn(n, m, |_, _| rng.random_range(0.0..4.0));
        let q = Matrix::from_fn(n, m, |_, _| rng.random_range(0.0..4.0));
        let mut x = DVector::zeros(m);
        x[rng.random_range(0..m)] = rng.random_range(0.1..3.0);
        bi_am &= matrix_bi_am(&s, &q, &x)?.holds;
        compat &= matrix_compatibility(&(&q * rng.random_range(0.0..1.0)), &q, &x)?;
    }
    let mut r = VerificationReport::default();
    r.push(CheckRow::flag("matrix.bi_am_random_pairs", bi_am));
    r.push(CheckRow::flag("matrix.compatibility_random_pairs", compat));

    let grid = [0.1, 0.5, 1.0, 2.0, 5.0];
    let (mut lowest, mut resolvents) = (f64::INFINITY, true);
    for i in 0..20 {
        let sys = random_system(&mut rng, 2 + i % 7, 2, 0.5)?;
        lowest = worst_min(lowest, check_positive_generation(sys.a(), &grid)?.min_entry);
        resolvents &= resolvent_positive_on(
            sys.a(),
            &[sys.lambda(), sys.lambda() + 1.0, sys.lambda() + 10.0],
        )?;
    }
    r.push(CheckRow::at_least(
        "matrix.metzler_semigroup_min_entry",
        lowest,
        0.0,
        cfg.tolerances.matrix_positivity,
    ));
    r.push(CheckRow::flag(
        "matrix.metzler_resolvent_positive",
        resolvents,
    ));
    Ok(r)
}

fn dsperturb_oracle_suite(
    cfg: &ExperimentConfig,
    p: &Prepared,
    exec: Execution,
) -> Result<VerificationReport, AppError> {
    Ok(simulate_pde(cfg, p, exec)?.report)
}

/// `μ = 0.5δ₂`, `u₀ ≡ 1`: `w(t, x) = e^{0.5·ℓ(t, x)}`.
fn dsperturb_closed_form_suite(
    cfg: &ExperimentConfig,
    p: &Prepared,
    exec: Execution,
) -> Result<VerificationReport, AppError> {
    let pert = DSPerturbation::new(RegularMeasure::dirac(2.0, 0.5));
    let u0 = BoundedFunction::constant(1.0);
    let t_max = cfg.time.t_max;
    let opts = DysonPhillipsOptions {
        terms: cfg.time.terms,
        dt: cfg.time.dt,
        exec,
    };
    let dp = dyson_phillips(&pert, &u0, t_max, &opts)?;
    let vo = volterra_oracle(&pert, &u0, t_max, cfg.time.dt, exec)?;
    let xs = p.window.linspace(cfg.window.resolution);
    let (mut e_dp, mut e_vo) = (0.0f64, 0.0f64);
    for &t in &p.times {
        for &x in &xs {
            let exact = (0.5 * semipert::dsperturb::ell(t, x, pert.threshold())).exp();
            e_dp = worst_max(e_dp, (dp.eval(t, x) - exact).abs());
            e_vo = worst_max(e_vo, (vo.eval(t, x) - exact).abs());
        }
    }
    let mut r = VerificationReport::default();
    r.push(CheckRow::at_most(
        "dsperturb.closed_form_series",
        e_dp,
        0.0,
        cfg.tolerances.closed_form,
    ));
    r.push(CheckRow::at_most(
        "dsperturb.closed_form_oracle",
        e_vo,
        0.0,
        cfg.tolerances.closed_form,
    ));
    Ok(r)
}

fn dsperturb_structure_suite(
    cfg: &ExperimentConfig,
    p: &Prepared,
    exec: Execution,
) -> Result<VerificationReport, AppError> {
    let mut r = VerificationReport::default();
    let tol = &cfg.tolerances;

    // positivity over seeded random nonnegative data
    let pert = DSPerturbation::new(RegularMeasure::dirac(0.0, 0.5));
    let times: Vec<f64> = p.times.iter().copied().filter(|&t| t <= 2.0).collect();
    let opts = DysonPhillipsOptions {
        terms: cfg.time.terms,
        dt: cfg.time.dt,
        exec: Execution::Sequential,
    };
    let ids: Vec<usize> = (0..RANDOM_CASES).collect();
    let mins = exec.map(&ids, |&i| -> Result<f64, AppError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED + i as u64));
        let u0 = BoundedFunction::random_nonnegative_spline(&mut rng, -8.0, 8.0, 17);
        Ok(
            positivity_audit(&pert, &u0, &times, &p.window, cfg.window.resolution, &opts)?
                .min_overall(),
        )
    });
    let mut lowest = f64::INFINITY;
    for m in mins {
        lowest = worst_min(lowest, m?);
    }
    r.push(CheckRow::at_least(
        "dsperturb.positivity_min",
        lowest,
        0.0,
        tol.positivity,
    ));

    // contraction on [0, 1] with the configured measure and datum
    let main = DSPerturbation::new(p.measure.clone());
    let opts = DysonPhillipsOptions {
        terms: cfg.time.terms,
        dt: cfg.time.dt,
        exec,
    };
    let d = dyson_phillips(&main, &p.u0, 1.0, &opts)?
        .diagnostics()
        .clone();
    r.push(CheckRow::at_most(
        "dsperturb.eventual_ratio",
        d.contraction_ratio,
        0.6,
        0.0,
    ));
    r.push(CheckRow::at_most(
        "dsperturb.tail_over_norm",
        d.tail / p.u0.sup_bound(),
        0.0,
        1e-10,
    ));

    // smallness in λ: closed form against quadrature, nonincreasing
    let mut prev = f64::INFINITY;
    let (mut dev, mut monotone) = (0.0f64, true);
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        let exact = main.smallness_at(lambda)?;
        let quad = main.smallness_at_quadrature(lambda)?;
        dev = worst_max(dev, (exact - quad).abs());
        monotone &= quad <= prev;
        prev = quad;
    }
    r.push(CheckRow::at_most(
        "dsperturb.smallness_quadrature",
        dev,
        0.0,
        1e-9,
    ));
    r.push(CheckRow::flag(
        "dsperturb.smallness_nonincreasing",
        monotone,
    ));

    // locality for a slowly varying datum
    let cert = locality_certificate(&main, 0.05, &p.u0)?;
    r.push(CheckRow::at_most(
        "dsperturb.locality_lhs",
        cert.lhs,
        cert.rhs,
        1e-12,
    ));

    // step-function integrals
    let steps = StepFunction::new(
        2.0,
        vec![
            (0.0, 0.5, BoundedFunction::constant(1.0)),
            (0.75, 1.5, BoundedFunction::rational_bump()),
            (1.5, 2.0, BoundedFunction::constant(0.25)),
        ],
    )?;
    let s = step_function_integral_checks(&main, &steps, 401)?;
    r.push(CheckRow::at_most(
        "dsperturb.step_integral_additivity",
        s.additivity_error,
        0.0,
        1e-12,
    ));
    r.push(CheckRow::flag("dsperturb.step_integral_checks", s.pass));
    Ok(r)
}

fn matrixlab_suite(
    cfg: &ExperimentConfig,
    _: &Prepared,
    exec: Execution,
) -> Result<VerificationReport, AppError> {
    Ok(matrix_dp(cfg, exec)?.report)
}
