// SPDX-License-Identifier: Apache-2.0

//! Integrals `∫₀^{t₀} T₋₁(t₀ − r) B u(r) dr` of step functions
//! `u = Σ xₙ 1_{Iₙ}`.

use std::sync::Arc;

use super::trace::StepTrace;
use super::{extrapolated_convolution, DSPerturbation};
use crate::error::{Error, Result};
use crate::funcspace::{linspace, BoundedFunction};

/// `Σ xₙ 1_[αₙ, βₙ)` on `[0, t₀]` with pairwise disjoint intervals.
#[derive(Debug, Clone)]
pub struct StepFunction {
    pieces: Vec<(f64, f64, BoundedFunction)>,
    t0: f64,
}

impl StepFunction {
    pub fn new(t0: f64, mut pieces: Vec<(f64, f64, BoundedFunction)>) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(Error::InvalidArgument(format!("t0 must be > 0, got {t0}")));
        }
        for (a, b, _) in &pieces {
            if !(0.0 <= *a && a < b && *b <= t0) {
                return Err(Error::InvalidArgument(format!(
                    "step [{a}, {b}) is not inside [0, {t0}]"
                )));
            }
        }
        pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
        for w in pieces.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::OverlappingSteps {
                    a0: w[0].0,
                    a1: w[0].1,
                    b0: w[1].0,
                    b1: w[1].1,
                });
            }
        }
        Ok(StepFunction { pieces, t0 })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn pieces(&self) -> &[(f64, f64, BoundedFunction)] {
        &self.pieces
    }

    /// `φ(r) = Φ(u(r))` as a step trace.
    fn trace(&self, pert: &DSPerturbation) -> StepTrace {
        StepTrace {
            steps: self
                .pieces
                .iter()
                .map(|(a, b, x)| (*a, *b, pert.phi(x)))
                .collect(),
            horizon: self.t0,
        }
    }

    /// `∫₀^{t₀} T₋₁(t₀ − r) B u(r) dr`.
    pub fn integral(&self, pert: &DSPerturbation) -> BoundedFunction {
        extrapolated_convolution(pert, Arc::new(self.trace(pert)), self.t0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepIntegralReport {
    /// Grid on which every check is evaluated.
    pub xs: Vec<f64>,
    pub min_value: f64,
    /// All `xₙ ≥ 0` on the grid and `μ ≥ 0`.
    pub nonnegative_expected: bool,
    pub nonnegative: bool,
    /// Largest `|w(x_{i+1}) − w(x_i)| − L·Δx` with `L = max |Φ(xₙ)|`.
    pub continuity_defect: f64,
    pub continuous: bool,
    /// `‖∫u − Σ ∫(xₙ 1_{Iₙ})‖` on the grid.
    pub additivity_error: f64,
    pub additive: bool,
    /// `∫₀^{t₀} e^{-s} T₋₁(s) B xₙ ds ≤ ∫₀^∞ e^{-s} T₋₁(s) B xₙ ds` for every
    /// nonnegative step value.
    pub monotone: bool,
    pub pass: bool,
}

/// `Φ(x)·(e^{-c} − e^{-t₀})⁺` with `c = max(0, θ − y)`: the damped
/// finite-horizon integral at `y`.
pub fn damped_finite_horizon(phi_x: f64, threshold: f64, t0: f64, y: f64) -> f64 {
    let c = (threshold - y).max(0.0);
    phi_x * ((-c).exp() - (-t0).exp()).max(0.0)
}

/// `Φ(x)·e^{-c}`, the damped infinite-horizon integral, i.e. `Φ(x)·h(y)`.
pub fn damped_infinite_horizon(phi_x: f64, threshold: f64, y: f64) -> f64 {
    phi_x * (-(threshold - y).max(0.0)).exp()
}

const STEP_TOL: f64 = 1e-12;

/// Evaluates the integral of `u` on `[θ − t₀ − 1, θ + 1]` with `resolution`
/// points and checks membership in `X` (Lipschitz continuity), positivity,
/// additivity over the steps and the monotone comparison with the damped
/// improper integral.
pub fn step_function_integral_checks(
    pert: &DSPerturbation,
    u: &StepFunction,
    resolution: usize,
) -> Result<StepIntegralReport> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("resolution must be ≥ 2".into()));
    }
    let theta = pert.threshold();
    let t0 = u.t0;
    let xs = linspace(theta - t0 - 1.0, theta + 1.0, resolution);
    let whole = u.integral(pert).sample(&xs);

    let min_value = whole.iter().copied().fold(f64::INFINITY, f64::min);
    let steps_nonneg = u
        .pieces
        .iter()
        .all(|(_, _, x)| xs.iter().all(|&y| x.eval(y) >= 0.0));
    let nonnegative_expected = steps_nonneg && pert.measure().is_positive();
    let nonnegative = min_value >= -STEP_TOL;

    let phis: Vec<f64> = u.pieces.iter().map(|(_, _, x)| pert.phi(x)).collect();
    let lip = phis.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let dx = xs[1] - xs[0];
    let continuity_defect = whole
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() - lip * dx)
        .fold(0.0f64, f64::max);
    let continuous = continuity_defect <= STEP_TOL;

    let mut sum = vec![0.0; xs.len()];
    for (a, b, x) in &u.pieces {
        let single = StepFunction {
            pieces: vec![(*a, *b, x.clone())],
            t0,
        };
        for (acc, v) in sum.iter_mut().zip(single.integral(pert).sample(&xs)) {
            *acc += v;
        }
    }
    let additivity_error = whole
        .iter()
        .zip(&sum)
        .map(|(w, s)| (w - s).abs())
        .fold(0.0, f64::max);
    let additive = additivity_error <= STEP_TOL;

    let monotone = u
        .pieces
        .iter()
        .zip(&phis)
        .filter(|(_, &p)| p >= 0.0)
        .all(|(_, &p)| {
            xs.iter().all(|&y| {
                damped_finite_horizon(p, theta, t0, y)
                    <= damped_infinite_horizon(p, theta, y) + STEP_TOL
            })
        });

    let pass = continuous && additive && monotone && (!nonnegative_expected || nonnegative);
    Ok(StepIntegralReport {
        xs,
        min_value,
        nonnegative_expected,
        nonnegative,
        continuity_defect,
        continuous,
        additivity_error,
        additive,
        monotone,
        pass,
    })
}

/// `∫₀^{t₀} e^{-s} χ_[θ,∞)(y + s) ds` by midpoint sums, an oracle for
/// [`damped_finite_horizon`] with `Φ(x) = 1`.
#[cfg(test)]
fn damped_brute(threshold: f64, t0: f64, y: f64, n: usize) -> f64 {
    let ds = t0 / n as f64;
    (0..n)
        .map(|i| (i as f64 + 0.5) * ds)
        .filter(|&s| y + s >= threshold)
        .map(|s| (-s).exp() * ds)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::RegularMeasure;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pert() -> DSPerturbation {
        DSPerturbation::new("0.3*delta(0) + 0.2*uniform(-1,2)".parse().unwrap())
    }

    #[test]
    fn single_nonnegative_step() {
        let u = StepFunction::new(1.5, vec![(0.0, 1.5, BoundedFunction::rational_bump())]).unwrap();
        let r = step_function_integral_checks(&pert(), &u, 801).unwrap();
        assert!(
            r.nonnegative_expected && r.nonnegative,
            "min {}",
            r.min_value
        );
        assert!(r.pass);
    }

    #[test]
    fn two_steps_are_additive() {
        let u = StepFunction::new(
            2.0,
            vec![
                (1.2, 2.0, BoundedFunction::constant(-0.5)),
                (0.0, 0.7, BoundedFunction::rational_bump()),
            ],
        )
        .unwrap();
        let r = step_function_integral_checks(&pert(), &u, 801).unwrap();
        assert!(r.additive && r.continuous && r.monotone);
        assert!(!r.nonnegative_expected);
        assert!(r.pass);
    }

    #[test]
    fn overlapping_steps_rejected() {
        let e = StepFunction::new(
            1.0,
            vec![
                (0.0, 0.6, BoundedFunction::constant(1.0)),
                (0.5, 1.0, BoundedFunction::constant(1.0)),
            ],
        );
        assert!(matches!(e, Err(Error::OverlappingSteps { .. })));
        assert!(StepFunction::new(1.0, vec![(0.5, 1.5, BoundedFunction::zero())]).is_err());
    }

    #[test]
    fn damped_closed_forms_match_brute_force() {
        for &(t0, y) in &[
            (0.5, 0.8),
            (2.0, -0.5),
            (1.0, 1.5),
            (3.0, -1.5),
            (1.0, -0.5),
        ] {
            let exact = damped_finite_horizon(1.0, 1.0, t0, y);
            assert!(
                (exact - damped_brute(1.0, t0, y, 200_000)).abs() < 1e-5,
                "t0 = {t0}, y = {y}"
            );
        }
        assert!((damped_infinite_horizon(1.0, 1.0, 0.0) - (-1f64).exp()).abs() < 1e-15);
        let h = crate::transgroup::h_function();
        for y in linspace(-3.0, 3.0, 13) {
            assert!((damped_infinite_horizon(0.7, 1.0, y) - 0.7 * h.eval(y)).abs() < 1e-15);
        }
    }

    #[test]
    fn monotone_comparison_on_random_positive_values() {
        let p = DSPerturbation::new(RegularMeasure::dirac(0.5, 0.6));
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let x = BoundedFunction::random_nonnegative_spline(&mut rng, -3.0, 3.0, 7);
            let t0 = rng.random_range(0.1..3.0);
            let u = StepFunction::new(t0, vec![(0.0, t0, x)]).unwrap();
            let r = step_function_integral_checks(&p, &u, 401).unwrap();
            assert!(r.monotone && r.nonnegative && r.pass);
        }
    }
}
