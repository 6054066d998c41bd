// SPDX-License-Identifier: Apache-2.0

//! Dyson–Phillips series `S(t) = Σ Sₙ(t)` reduced to scalar traces.
//!
//! `S₀(s)u₀ = T(s)u₀` and `Sₙ(s)u₀ = x ↦ Ψₙ₋₁(ℓ(s, x))`, where
//! `Ψₙ₋₁ = ∫ φₙ₋₁` and `φₙ(s) = Φ(Sₙ(s)u₀)`. Each trace lives on the
//! uniform grid `s_j = j·dt`, `j = 0..=M`.

use std::sync::Arc;

use super::trace::{Cumulative, Trace};
use super::{ell, extrapolated_convolution, DSPerturbation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::funcspace::{linspace, BoundedFunction, CompactWindow};

/// Last-term contribution above `TAIL_CERTIFY_RTOL·‖u₀‖` is not certified.
pub const TAIL_CERTIFY_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonPhillipsOptions {
    /// `N`: the series keeps `S₀, …, S_N`.
    pub terms: usize,
    pub dt: f64,
    pub exec: Execution,
}

impl Default for DysonPhillipsOptions {
    fn default() -> Self {
        DysonPhillipsOptions {
            terms: 20,
            dt: 1e-3,
            exec: Execution::default(),
        }
    }
}

/// Number of grid steps covering `[0, t]` with steps no larger than `dt`.
pub(crate) fn grid_steps(t: f64, dt: f64) -> usize {
    ((t / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDiagnostics {
    /// `‖φₙ‖_∞` on the grid for `n = 0..=N`.
    pub phi_sup: Vec<f64>,
    /// `‖φₙ₊₁‖ / ‖φₙ‖`, `0` once the numerator and denominator vanish.
    pub ratios: Vec<f64>,
    /// `r_N = ‖φ_N‖_∞·t`, a bound on the first omitted term `‖S_{N+1}(t)u₀‖`.
    pub tail: f64,
    /// `tail ≤ 1e-8·‖u₀‖`.
    pub certified: bool,
    /// Largest ratio over the second half of the run.
    pub contraction_ratio: f64,
    /// The ratios stay below one from the midpoint on.
    pub geometric: bool,
}

impl SeriesDiagnostics {
    fn new(phi_sup: Vec<f64>, t: f64, u0_norm: f64) -> Self {
        let ratios: Vec<f64> = phi_sup
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        let burn_in = ratios.len() / 2;
        let contraction_ratio = ratios[burn_in..].iter().copied().fold(0.0, f64::max);
        let tail = phi_sup.last().copied().unwrap_or(0.0) * t;
        SeriesDiagnostics {
            certified: tail <= TAIL_CERTIFY_RTOL * u0_norm,
            geometric: contraction_ratio < 1.0,
            phi_sup,
            ratios,
            tail,
            contraction_ratio,
        }
    }
}

/// The traces `φ₀, …, φ_N` on `[0, t]` together with `u₀`.
#[derive(Debug, Clone)]
pub struct DPState {
    u0: BoundedFunction,
    threshold: f64,
    t: f64,
    traces: Vec<Arc<Trace>>,
    diagnostics: SeriesDiagnostics,
}

impl DPState {
    pub fn horizon(&self) -> f64 {
        self.t
    }

    /// `N`.
    pub fn terms(&self) -> usize {
        self.traces.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.traces[0].dt()
    }

    /// `φₙ` on the grid.
    pub fn trace(&self, n: usize) -> &Trace {
        &self.traces[n]
    }

    pub fn diagnostics(&self) -> &SeriesDiagnostics {
        &self.diagnostics
    }

    pub fn initial(&self) -> &BoundedFunction {
        &self.u0
    }

    /// `(Sₙ(s)u₀)(x)` for `0 ≤ s ≤ t`, `0 ≤ n ≤ N`.
    pub fn term(&self, n: usize, s: f64, x: f64) -> f64 {
        if n == 0 {
            self.u0.eval(x + s)
        } else {
            self.traces[n - 1].integral_to(ell(s, x, self.threshold))
        }
    }

    /// `Σ_{n=0}^{N} (Sₙ(s)u₀)(x)`.
    pub fn eval(&self, s: f64, x: f64) -> f64 {
        let r = ell(s, x, self.threshold);
        self.u0.eval(x + s)
            + self.traces[..self.terms()]
                .iter()
                .map(|tr| tr.integral_to(r))
                .sum::<f64>()
    }

    /// `Sₙ(s)u₀` as a function.
    pub fn term_function(&self, n: usize, s: f64) -> BoundedFunction {
        if n == 0 {
            self.u0.translated(s)
        } else {
            let tr: Arc<dyn Cumulative> = self.traces[n - 1].clone();
            convolution(tr, self.threshold, s)
        }
    }

    /// The truncated sum `Σ_{n=0}^{N} Sₙ(s)u₀`.
    pub fn solution(&self, s: f64) -> BoundedFunction {
        let this = self.clone();
        let bound = self.u0.sup_bound()
            + self.traces[..self.terms()]
                .iter()
                .map(|tr| tr.abs_integral_to(s))
                .sum::<f64>();
        let theta = self.threshold;
        let mut kinks: Vec<f64> = self.u0.breakpoints().iter().map(|b| b - s).collect();
        kinks.extend([theta - s, theta]);
        BoundedFunction::analytic_with_kinks(move |x| this.eval(s, x), bound, kinks)
    }
}

fn convolution(phi: Arc<dyn Cumulative>, threshold: f64, t: f64) -> BoundedFunction {
    let bound = phi.abs_integral_to(t);
    BoundedFunction::analytic_with_kinks(
        move |x| phi.integral_to(ell(t, x, threshold)),
        bound,
        vec![threshold - t, threshold],
    )
}

/// Builds `φ₀, …, φ_N` on `[0, t]`.
///
/// Refuses to run when the smallness certificate fails.
pub fn dyson_phillips(
    pert: &DSPerturbation,
    u0: &BoundedFunction,
    t: f64,
    opts: &DysonPhillipsOptions,
) -> Result<DPState> {
    pert.ensure_small()?;
    if !(opts.dt > 0.0) || !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t > 0, got dt = {}, t = {t}",
            opts.dt
        )));
    }
    if opts.terms == 0 {
        return Err(Error::InvalidArgument(
            "need at least one series term".into(),
        ));
    }
    let m = grid_steps(t, opts.dt);
    let dt = t / m as f64;
    let theta = pert.threshold();
    let mu = pert.measure();

    let phi0 = opts
        .exec
        .map_range(m + 1, |j| pert.phi(&u0.translated(j as f64 * dt)));
    let mut traces = vec![Arc::new(Trace::new(dt, phi0))];
    for _ in 0..opts.terms {
        let prev = traces.last().expect("nonempty").clone();
        let next = opts.exec.map_range(m + 1, |j| {
            let s = j as f64 * dt;
            mu.integrate_fn(|x| prev.integral_to(ell(s, x, theta)), &[theta - s, theta])
        });
        traces.push(Arc::new(Trace::new(dt, next)));
    }

    let phi_sup = traces.iter().map(|tr| tr.sup_abs()).collect();
    let diagnostics = SeriesDiagnostics::new(phi_sup, t, u0.sup_bound());
    Ok(DPState {
        u0: u0.clone(),
        threshold: theta,
        t,
        traces,
        diagnostics,
    })
}

/// `S_N(t)u₀` recovered through [`extrapolated_convolution`] instead of the
/// cached kernel; both paths agree exactly.
pub fn term_via_convolution(
    pert: &DSPerturbation,
    state: &DPState,
    n: usize,
    s: f64,
) -> BoundedFunction {
    if n == 0 {
        return state.u0.translated(s);
    }
    extrapolated_convolution(pert, state.traces[n - 1].clone(), s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityAudit {
    /// Minimum of the truncated sum over the space-time grid.
    pub min_solution: f64,
    /// Minimum of each term `Sₙ` separately, `n = 0..=N`.
    pub min_terms: Vec<f64>,
    pub tail: f64,
}

impl PositivityAudit {
    pub fn min_overall(&self) -> f64 {
        self.min_terms
            .iter()
            .copied()
            .fold(self.min_solution, f64::min)
    }
}

/// Runs the series for a nonnegative `μ` and `u₀` and records the minimum of
/// the solution and of every term on `times × window`.
pub fn positivity_audit(
    pert: &DSPerturbation,
    u0: &BoundedFunction,
    times: &[f64],
    window: &CompactWindow,
    resolution: usize,
    opts: &DysonPhillipsOptions,
) -> Result<PositivityAudit> {
    if !pert.measure().is_positive() {
        return Err(Error::NotPositive("the measure has negative parts".into()));
    }
    let xs = linspace(window.a(), window.b(), resolution);
    let t_max = times.iter().copied().fold(0.0, f64::max);
    for &x in &xs {
        for &s in times.iter().chain(std::iter::once(&0.0)) {
            let v = u0.eval(x + s);
            if v < 0.0 {
                return Err(Error::NegativeOnGrid {
                    which: "u0",
                    x: x + s,
                    value: v,
                });
            }
        }
    }
    let state = dyson_phillips(pert, u0, t_max.max(opts.dt), opts)?;
    let n_terms = state.terms();
    let rows = opts.exec.map(times, |&s| {
        let mut mins = vec![f64::INFINITY; n_terms + 1];
        let mut min_sum = f64::INFINITY;
        for &x in &xs {
            let mut sum = 0.0;
            for (n, m) in mins.iter_mut().enumerate() {
                let v = state.term(n, s, x);
                *m = m.min(v);
                sum += v;
            }
            min_sum = min_sum.min(sum);
        }
        (min_sum, mins)
    });
    let mut min_terms = vec![f64::INFINITY; n_terms + 1];
    let mut min_solution = f64::INFINITY;
    for (s, mins) in rows {
        min_solution = min_solution.min(s);
        for (acc, m) in min_terms.iter_mut().zip(mins) {
            *acc = acc.min(m);
        }
    }
    Ok(PositivityAudit {
        min_solution,
        min_terms,
        tail: state.diagnostics.tail,
    })
}
