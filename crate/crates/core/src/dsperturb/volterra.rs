// SPDX-License-Identifier: Apache-2.0

//! Independent oracle: the trace `φ(t) = Φ(w(t, ·))` of the mild solution
//! solves `φ(t) = a(t) + ∫₀^t k(t − s) φ(s) ds` with `a(t) = Φ(T(t)u₀)` and
//! `k(r) = μ([θ − r, ∞))`.
//!
//! The kernel jumps wherever an atom enters the active region, so the
//! product-integration weights against piecewise-linear `φ` are taken from
//! the closed-form primitives of `k` rather than from samples of `k`.

use std::sync::Arc;

use super::series::grid_steps;
use super::trace::{Cumulative, Trace};
use super::{ell, DSPerturbation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::funcspace::BoundedFunction;

/// `w(t, x) = u₀(x + t) + ∫₀^{ℓ(t,x)} φ`.
#[derive(Debug, Clone)]
pub struct MildSolution {
    u0: BoundedFunction,
    threshold: f64,
    trace: Arc<Trace>,
}

impl MildSolution {
    /// `φ` on the grid.
    pub fn phi(&self) -> &Trace {
        &self.trace
    }

    pub fn horizon(&self) -> f64 {
        self.trace.horizon()
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.u0.eval(x + t) + self.trace.integral_to(ell(t, x, self.threshold))
    }

    pub fn function(&self, t: f64) -> BoundedFunction {
        let this = self.clone();
        let bound = self.u0.sup_bound() + self.trace.abs_integral_to(t);
        let mut kinks: Vec<f64> = self.u0.breakpoints().iter().map(|b| b - t).collect();
        kinks.extend([self.threshold - t, self.threshold]);
        BoundedFunction::analytic_with_kinks(move |x| this.eval(t, x), bound, kinks)
    }
}

/// Trapezoidal product integration, implicit in the diagonal weight.
pub fn volterra_oracle(
    pert: &DSPerturbation,
    u0: &BoundedFunction,
    t_max: f64,
    dt: f64,
    exec: Execution,
) -> Result<MildSolution> {
    if !(dt > 0.0) || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_max > 0, got dt = {dt}, t_max = {t_max}"
        )));
    }
    let m = grid_steps(t_max, dt);
    let dt = t_max / m as f64;
    let theta = pert.threshold();
    let mu = pert.measure();
    let k1 = |r: f64| mu.tail_kernel_primitive(theta, r, 1);
    let k2 = |r: f64| mu.tail_kernel_primitive(theta, r, 2);

    let a = exec.map_range(m + 1, |j| pert.phi(&u0.translated(j as f64 * dt)));
    let k2_grid: Vec<f64> = (0..=m + 1).map(|i| k2(i as f64 * dt)).collect();
    // interior[d - 1]: weight of the hat centred d steps back
    let interior: Vec<f64> = (1..=m)
        .map(|d| (k2_grid[d + 1] - 2.0 * k2_grid[d] + k2_grid[d - 1]) / dt)
        .collect();
    let diag = k2_grid[1] / dt;
    if diag >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "implicit weight {diag} ≥ 1; reduce dt"
        )));
    }

    let mut phi = Vec::with_capacity(m + 1);
    phi.push(a[0]);
    for i in 1..=m {
        let ti = i as f64 * dt;
        let end = k1(ti) - (k2_grid[i] - k2_grid[i - 1]) / dt;
        let mut acc = a[i] + end * phi[0];
        for (j, &pj) in phi.iter().enumerate().skip(1) {
            acc += interior[i - j - 1] * pj;
        }
        phi.push(acc / (1.0 - diag));
    }
    Ok(MildSolution {
        u0: u0.clone(),
        threshold: theta,
        trace: Arc::new(Trace::new(dt, phi)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::linspace;
    use crate::measures::RegularMeasure;

    #[test]
    fn zero_measure_returns_source_term() {
        let pert = DSPerturbation::new(RegularMeasure::zero());
        let u0 = BoundedFunction::rational_bump();
        let w = volterra_oracle(&pert, &u0, 1.0, 0.01, Execution::Sequential).unwrap();
        assert!(w.phi().values().iter().all(|&v| v == 0.0));
        for x in linspace(-3.0, 3.0, 13) {
            assert_eq!(w.eval(0.7, x), u0.eval(x + 0.7));
        }
    }

    #[test]
    fn constant_kernel_gives_exponential() {
        let c = 0.5;
        let pert = DSPerturbation::new(RegularMeasure::dirac(2.0, c));
        let w = volterra_oracle(
            &pert,
            &BoundedFunction::constant(1.0),
            2.0,
            1e-3,
            Execution::Parallel,
        )
        .unwrap();
        for (s, v) in w.phi().times().zip(w.phi().values()) {
            assert!((v - c * (c * s).exp()).abs() < 1e-6, "s = {s}");
        }
        for x in linspace(-2.0, 3.0, 21) {
            assert!((w.eval(2.0, x) - (c * ell(2.0, x, 1.0)).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn initial_condition_is_exact() {
        let pert = DSPerturbation::new("0.4*delta(0) + 0.1*uniform(0,1)".parse().unwrap());
        let u0 = BoundedFunction::rational_bump();
        let w = volterra_oracle(&pert, &u0, 1.0, 1e-2, Execution::Sequential).unwrap();
        for x in linspace(-5.0, 5.0, 41) {
            assert_eq!(w.eval(0.0, x), u0.eval(x));
            assert_eq!(w.function(0.0).eval(x), u0.eval(x));
        }
    }

    #[test]
    fn jump_kernel_substitution_check() {
        // atom at 0: k(r) = 0.4·1[r ≥ 1]; u₀ ≡ 1 gives a ≡ 0.4 and
        // φ = 0.4 on [0,1], 0.4 + 0.16 (t − 1) on [1,2]
        let pert = DSPerturbation::new(RegularMeasure::dirac(0.0, 0.4));
        let w = volterra_oracle(
            &pert,
            &BoundedFunction::constant(1.0),
            2.0,
            1e-3,
            Execution::Sequential,
        )
        .unwrap();
        for (s, v) in w.phi().times().zip(w.phi().values()) {
            let exact = if s <= 1.0 {
                0.4
            } else {
                0.4 + 0.16 * (s - 1.0)
            };
            assert!((v - exact).abs() < 1e-9, "s = {s}: {v} vs {exact}");
        }
        assert!(volterra_oracle(
            &pert,
            &BoundedFunction::constant(1.0),
            1.0,
            0.0,
            Execution::Sequential
        )
        .is_err());
    }
}
