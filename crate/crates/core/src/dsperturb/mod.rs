// SPDX-License-Identifier: Apache-2.0

//! The rank-one Desch–Schappacher perturbation `B f = Φ(f)·g` of the
//! translation semigroup, with `Φ(f) = ∫ f dμ` and `g = χ_[1,∞)`.
//!
//! Because `T₋₁(r) g = χ_[1−r,∞)`, every convolution
//! `∫₀^t T₋₁(t−s) B v(s) ds` collapses to `x ↦ ∫₀^{ℓ(t,x)} Φ(v(s)) ds` with
//! `ℓ(t, x) = min(t, max(0, x + t − 1))`. Both the Dyson–Phillips series and
//! the Volterra oracle work with scalar traces of `Φ` only.

mod series;
mod steps;
mod trace;
mod volterra;

use std::sync::Arc;

pub use series::{
    dyson_phillips, positivity_audit, term_via_convolution, DPState, DysonPhillipsOptions,
    PositivityAudit, SeriesDiagnostics, TAIL_CERTIFY_RTOL,
};
pub use steps::{
    damped_finite_horizon, damped_infinite_horizon, step_function_integral_checks, StepFunction,
    StepIntegralReport,
};
pub use trace::{Cumulative, StepTrace, Trace};
pub use volterra::{volterra_oracle, MildSolution};

use crate::error::{Error, Result};
use crate::funcspace::{seminorm_pk, BoundedFunction, CompactWindow, SeminormSpec};
use crate::measures::RegularMeasure;
use crate::transgroup::{
    h_function, h_lambda, h_lambda_quadrature, ResolventQuadrature, G_THRESHOLD,
};

/// `ℓ(t, x) = min(t, max(0, x + t − θ))`: how long the indicator
/// `χ_[θ,∞)` has been active at `x` after transport over `[0, t]`.
#[inline]
pub fn ell(t: f64, x: f64, threshold: f64) -> f64 {
    (x + t - threshold).max(0.0).min(t)
}

/// `B f = Φ(f)·g`, carried through its resolvent image `Φ(f)·h`.
#[derive(Debug, Clone)]
pub struct DSPerturbation {
    mu: RegularMeasure,
    threshold: f64,
    h: BoundedFunction,
}

impl DSPerturbation {
    pub fn new(mu: RegularMeasure) -> Self {
        DSPerturbation {
            mu,
            threshold: G_THRESHOLD,
            h: h_function(),
        }
    }

    pub fn measure(&self) -> &RegularMeasure {
        &self.mu
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `h = R(1, A₋₁) g`.
    pub fn h(&self) -> &BoundedFunction {
        &self.h
    }

    /// `Φ(f) = ∫ f dμ`.
    pub fn phi(&self, f: &BoundedFunction) -> f64 {
        self.mu.integrate(f)
    }

    /// Certified bound `|μ|(ℝ)·‖h‖ ≥ ‖R(1, A₋₁) B‖`.
    pub fn smallness(&self) -> f64 {
        self.mu.total_variation() * self.h.sup_bound()
    }

    /// Fails unless the smallness bound is `< 1`.
    pub fn ensure_small(&self) -> Result<()> {
        let bound = self.smallness();
        if bound < 1.0 {
            Ok(())
        } else {
            Err(Error::Smallness {
                bound,
                detail: format!("|μ|(ℝ) = {} must be < 1", self.mu.total_variation()),
            })
        }
    }

    /// `|μ|(ℝ)·‖R(λ, A₋₁) g‖` in closed form (`‖h_λ‖ = 1/λ`).
    pub fn smallness_at(&self, lambda: f64) -> Result<f64> {
        Ok(self.mu.total_variation() * h_lambda(lambda)?.sup_bound())
    }

    /// Same bound with `h_λ` recomputed by Laplace quadrature and sampled on
    /// `[-8, 8]`.
    pub fn smallness_at_quadrature(&self, lambda: f64) -> Result<f64> {
        let h = h_lambda_quadrature(&ResolventQuadrature::new(lambda)?);
        Ok(self.mu.total_variation() * seminorm_pk(&h, &SeminormSpec::on(-8.0, 8.0, 1601)?))
    }

    /// `R(1, A₋₁) B f = Φ(f)·h`.
    pub fn apply_rb(&self, f: &BoundedFunction) -> BoundedFunction {
        self.h.scale(self.phi(f))
    }
}

/// Windows tried by [`locality_certificate`]: `[-2^k, 2^k]`, `k = 0..=30`.
pub fn locality_windows() -> impl Iterator<Item = CompactWindow> {
    (0..=30).map(|k| CompactWindow::symmetric(2f64.powi(k)).expect("valid window"))
}

/// Result of the locality estimate
/// `‖R B f‖ ≤ (|μ|(K′) p_{K′}(f) + ε‖f‖)·‖h‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityCertificate {
    pub window: CompactWindow,
    pub tail: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Picks the smallest configured window with `|μ|(ℝ \ K′) < ε` and checks
/// the locality estimate for `f`.
pub fn locality_certificate(
    pert: &DSPerturbation,
    eps: f64,
    f: &BoundedFunction,
) -> Result<LocalityCertificate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let window = locality_windows()
        .find(|k| pert.mu.tail_mass(k) < eps)
        .ok_or_else(|| {
            Error::InvalidArgument("measure mass escapes every configured window".into())
        })?;
    let tail = pert.mu.tail_mass(&window);
    let mut xs = window.linspace(4001);
    xs.extend(
        pert.mu
            .atoms()
            .iter()
            .map(|a| a.location)
            .filter(|&x| window.contains(x)),
    );
    let p_k = xs.iter().fold(0.0f64, |m, &x| m.max(f.eval(x).abs()));
    let h_norm = pert.h.sup_bound();
    let lhs = pert.phi(f).abs() * h_norm;
    let rhs = (pert.mu.variation_in(&window) * p_k + eps * f.sup_bound()) * h_norm;
    Ok(LocalityCertificate {
        window,
        tail,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// `x ↦ ∫₀^t T₋₁(t − s) B v(s) ds` given the trace `φ(s) = Φ(v(s))`:
/// the continuous function `x ↦ ∫₀^{ℓ(t,x)} φ`.
pub fn extrapolated_convolution(
    pert: &DSPerturbation,
    phi: Arc<dyn Cumulative>,
    t: f64,
) -> BoundedFunction {
    let theta = pert.threshold;
    let bound = phi.abs_integral_to(t);
    BoundedFunction::analytic_with_kinks(
        move |x| phi.integral_to(ell(t, x, theta)),
        bound,
        vec![theta - t, theta],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::linspace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_rb_examples() {
        let pert = DSPerturbation::new(RegularMeasure::dirac(0.0, 0.5));
        let z = pert.apply_rb(&BoundedFunction::zero());
        assert!(linspace(-3.0, 3.0, 7).iter().all(|&x| z.eval(x) == 0.0));
        let r = pert.apply_rb(&BoundedFunction::constant(1.0));
        for x in linspace(-3.0, 3.0, 7) {
            assert_eq!(r.eval(x), 0.5 * pert.h().eval(x));
        }
    }

    #[test]
    fn apply_rb_norm_bound_on_random_inputs() {
        let mu: RegularMeasure = "0.3*delta(-1) + 0.2*uniform(0,2) - 0.1*delta(4)"
            .parse()
            .unwrap();
        let pert = DSPerturbation::new(mu);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let f = BoundedFunction::random_nonnegative_spline(&mut rng, -5.0, 5.0, 11)
                .scale(rng.random_range(-3.0..3.0));
            let lhs = crate::funcspace::sampled_sup_norm(&pert.apply_rb(&f));
            let rhs = pert.measure().total_variation() * f.sup_bound() * pert.h().sup_bound();
            assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn smallness_certificate() {
        assert!(DSPerturbation::new(RegularMeasure::dirac(0.0, 0.5))
            .ensure_small()
            .is_ok());
        let big = DSPerturbation::new(RegularMeasure::dirac(0.0, 1.2));
        assert!(matches!(big.ensure_small(), Err(Error::Smallness { .. })));
        let signed: RegularMeasure = "0.6*delta(0) - 0.5*delta(1)".parse().unwrap();
        assert!(DSPerturbation::new(signed).ensure_small().is_err());
    }

    #[test]
    fn smallness_is_nonincreasing_in_lambda() {
        let pert = DSPerturbation::new("0.4*delta(0) + 0.1*uniform(0,1)".parse().unwrap());
        let mut prev = f64::INFINITY;
        for lambda in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let exact = pert.smallness_at(lambda).unwrap();
            let quad = pert.smallness_at_quadrature(lambda).unwrap();
            assert!((exact - quad).abs() < 1e-9, "λ = {lambda}");
            assert!(quad <= prev);
            prev = quad;
        }
        assert!((pert.smallness_at(1.0).unwrap() - pert.smallness()).abs() < 1e-15);
    }

    #[test]
    fn locality_examples() {
        let f = BoundedFunction::analytic(|x| (x * 0.3).cos(), 1.0);
        let pert = DSPerturbation::new(RegularMeasure::dirac(0.0, 0.5));
        let c = locality_certificate(&pert, 0.1, &f).unwrap();
        assert_eq!(c.window, CompactWindow::symmetric(1.0).unwrap());
        assert_eq!(c.tail, 0.0);
        assert!(c.holds);

        let spread = DSPerturbation::new(RegularMeasure::density(0.0, 10.0, 0.09).unwrap());
        let c = locality_certificate(&spread, 0.05, &f).unwrap();
        assert!(c.tail < 0.05);
        assert!(c.holds);
        // [-8, 8] still leaves 2·0.09 outside
        assert_eq!(c.window, CompactWindow::symmetric(16.0).unwrap());

        // f supported away from the atom: Φ(f) = 0
        let far = BoundedFunction::analytic(|x| (1.0 - (x - 50.0).abs()).max(0.0), 1.0);
        let c = locality_certificate(&pert, 0.1, &far).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
        assert!(locality_certificate(&pert, 0.0, &far).is_err());
    }

    #[test]
    fn extrapolated_convolution_examples() {
        let pert = DSPerturbation::new(RegularMeasure::zero());
        let t = 1.0;
        let ones = Arc::new(Trace::new(0.01, vec![1.0; 101]));
        let w = extrapolated_convolution(&pert, ones, t);
        assert_eq!(w.eval(-0.5), 0.0);
        assert_eq!(w.eval(0.0), 0.0);
        assert!((w.eval(0.5) - 0.5).abs() < 1e-14);
        assert!((w.eval(1.0) - 1.0).abs() < 1e-14);
        assert!((w.eval(7.0) - 1.0).abs() < 1e-14);

        // indicator oracle: ∫₀^t φ(s) χ(x + t − s ≥ 1) ds by brute-force midpoint sums
        let phi = Arc::new(Trace::new(
            0.001,
            (0..=1500).map(|j| (j as f64 * 0.001 * 3.0).sin()).collect(),
        ));
        let t = 1.5;
        let w = extrapolated_convolution(&pert, phi.clone(), t);
        for x in [-0.7, -0.2, 0.1, 0.6, 1.2] {
            let n = 150_000;
            let ds = t / n as f64;
            let brute: f64 = (0..n)
                .map(|i| {
                    let s = (i as f64 + 0.5) * ds;
                    if x + t - s >= 1.0 {
                        phi.value_at(s) * ds
                    } else {
                        0.0
                    }
                })
                .sum();
            assert!((w.eval(x) - brute).abs() < 1e-6, "x = {x}");
        }
    }
}
