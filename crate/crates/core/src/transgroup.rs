// SPDX-License-Identifier: Apache-2.0

//! Left translation `(T(t)f)(x) = f(x + t)` on `BC(ℝ)`, its resolvent as a
//! Laplace transform, and the functions `h`, `g = χ_[1,∞)`, `h_n` used to
//! realise the perturbation.
//!
//! Elements of the extrapolation space are never stored: `g` is represented by
//! its resolvent image `h = R(1, A₋₁) g` and the indicator threshold.

use crate::error::{Error, Result};
use crate::funcspace::{linspace, seminorm_pk, BoundedFunction, ExpPolyPiece, SeminormSpec};
use crate::quad::simpson_split;
use crate::specfun::{gamma_gap, lower_gamma_scaled};

/// Threshold of the indicator `g = χ_[1,∞)`.
pub const G_THRESHOLD: f64 = 1.0;

/// The translation semigroup. Contractive: type `(M, ω) = (1, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TranslationSemigroup;

impl TranslationSemigroup {
    pub const M: f64 = 1.0;
    pub const OMEGA: f64 = 0.0;

    pub fn apply(&self, t: f64, f: &BoundedFunction) -> Result<BoundedFunction> {
        apply_t(t, f)
    }
}

/// `T(t) f`, exact for every representation.
pub fn apply_t(t: f64, f: &BoundedFunction) -> Result<BoundedFunction> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "semigroup time must be >= 0, got {t}"
        )));
    }
    Ok(f.translated(t))
}

/// Parameters of the Laplace-transform quadrature for `R(λ, A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventQuadrature {
    pub lambda: f64,
    pub t_max: f64,
    pub panels: usize,
    /// Lower bound on Simpson panels for each smooth segment between kinks.
    pub min_segment_panels: usize,
}

impl ResolventQuadrature {
    /// Defaults: `t_max = 40/λ`, 4000 panels.
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "resolvent needs λ > 0, got {lambda}"
            )));
        }
        Ok(ResolventQuadrature {
            lambda,
            t_max: 40.0 / lambda,
            panels: 4000,
            min_segment_panels: 1024,
        })
    }

    /// `sup|f| e^{-λ t_max} / λ`.
    pub fn truncation_bound(&self, f: &BoundedFunction) -> f64 {
        f.sup_bound() * (-self.lambda * self.t_max).exp() / self.lambda
    }
}

/// A resolvent image together with its Laplace-truncation error bound.
#[derive(Debug, Clone)]
pub struct ResolventImage {
    pub function: BoundedFunction,
    pub truncation_bound: f64,
}

/// `x ↦ ∫₀^{t_max} e^{-λt} f(x+t) dt`, split at the kinks of `f`.
pub fn resolvent(q: &ResolventQuadrature, f: &BoundedFunction) -> Result<ResolventImage> {
    ResolventQuadrature::new(q.lambda)?;
    let q = *q;
    let g = f.clone();
    let kinks = g.breakpoints();
    let function = BoundedFunction::analytic(
        move |x| {
            let breaks: Vec<f64> = kinks.iter().map(|k| k - x).collect();
            simpson_split(
                |t| (-q.lambda * t).exp() * g.eval(x + t),
                0.0,
                q.t_max,
                &breaks,
                q.panels,
                q.min_segment_panels,
            )
        },
        f.sup_bound() / q.lambda,
    );
    Ok(ResolventImage {
        function,
        truncation_bound: q.truncation_bound(f),
    })
}

/// Closed form of `(R(1, A) h_n)(x)`.
pub fn resolvent_hn_analytic(n: u32, x: f64) -> f64 {
    if x > 1.0 {
        return 1.0;
    }
    let head = x.exp() * gamma_gap(n) + (x - 1.0).exp();
    if x <= 0.0 {
        head
    } else {
        // e^x (Γ(n+1,x) − Γ(n+1,1)) = e^x gap(n) − e^x γ(n+1,x)
        head - lower_gamma_scaled(n, x)
    }
}

/// `h_n`: `0` for `x ≤ 0`, `x^n` on `(0, 1]`, `1` beyond.
pub fn hn_family(n: u32) -> BoundedFunction {
    BoundedFunction::piecewise(
        vec![0.0, 1.0],
        vec![
            ExpPolyPiece::constant(0.0),
            ExpPolyPiece::monomial(n as usize),
            ExpPolyPiece::constant(1.0),
        ],
        1.0,
    )
    .expect("static shape")
}

/// `h(x) = e^{x-1}` for `x ≤ 1`, `1` beyond; `h = R(1, A₋₁) g`.
pub fn h_function() -> BoundedFunction {
    BoundedFunction::piecewise(
        vec![G_THRESHOLD],
        vec![
            ExpPolyPiece {
                coeffs: vec![(-G_THRESHOLD).exp()],
                rate: 1.0,
            },
            ExpPolyPiece::constant(1.0),
        ],
        1.0,
    )
    .expect("static shape")
}

/// Threshold of `g = χ_[1,∞)`; `g` itself lives in the extrapolation space.
pub fn g_kernel_indicator() -> f64 {
    G_THRESHOLD
}

/// `R(λ, A₋₁) g = x ↦ e^{-λ max(0, 1 − x)} / λ`, with norm `1/λ`.
pub fn h_lambda(lambda: f64) -> Result<BoundedFunction> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resolvent needs λ > 0, got {lambda}"
        )));
    }
    Ok(BoundedFunction::analytic_with_kinks(
        move |x| (-lambda * (G_THRESHOLD - x).max(0.0)).exp() / lambda,
        1.0 / lambda,
        vec![G_THRESHOLD],
    ))
}

/// `R(λ, A₋₁) g` by direct Laplace quadrature of the indicator.
pub fn h_lambda_quadrature(q: &ResolventQuadrature) -> BoundedFunction {
    let q = *q;
    BoundedFunction::analytic(
        move |x| {
            let start = (G_THRESHOLD - x).max(0.0);
            simpson_split(
                |t| (-q.lambda * t).exp(),
                start,
                q.t_max,
                &[],
                q.panels,
                q.min_segment_panels,
            )
        },
        1.0 / q.lambda,
    )
}

/// `p_K(R(1, A) h_n − h)`: the extrapolated seminorm of `h_n − g`.
pub fn extrapolated_gap(n: u32, k: &SeminormSpec) -> f64 {
    let h = h_function();
    k.points().into_iter().fold(0.0f64, |m, x| {
        m.max((resolvent_hn_analytic(n, x) - h.eval(x)).abs())
    })
}

/// Same quantity with the resolvent from Laplace quadrature.
pub fn extrapolated_gap_quadrature(
    n: u32,
    k: &SeminormSpec,
    q: &ResolventQuadrature,
) -> Result<f64> {
    let image = resolvent(q, &hn_family(n))?;
    Ok(seminorm_pk(&image.function.sub(&h_function()), k))
}

/// Outcome of the sampled bi-continuity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct BiContinuityReport {
    /// Largest `|T(s)T(t)f − T(s+t)f|` over the sampled `s, t, x`.
    pub semigroup_law_error: f64,
    /// `‖T(t)f‖ ≤ ‖f‖` on every sampled `t`.
    pub contractive: bool,
    /// `(t, p(T(t)f − f))` along `t = 2^{-k}`.
    pub continuity_table: Vec<(f64, f64)>,
    /// `(k, p(f_k), sup_{t ≤ t0} p(T(t) f_k))` for bumps escaping to `+∞`.
    pub equicontinuity_table: Vec<(usize, f64, f64)>,
    pub pass: bool,
}

/// Samples the axioms of a bi-continuous semigroup for translation.
pub fn check_bicontinuity_axioms(
    f: &BoundedFunction,
    t0: f64,
    p: &SeminormSpec,
) -> Result<BiContinuityReport> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidArgument(format!("t0 must be > 0, got {t0}")));
    }
    let xs = p.points();
    let times = [0.0, 0.125, 0.3, 0.5, 1.0, t0];

    let mut semigroup_law_error = 0.0f64;
    let mut contractive = true;
    for &t in &times {
        let tf = apply_t(t, f)?;
        contractive &= crate::funcspace::sampled_sup_norm(&tf) <= f.sup_bound();
        for &s in &times {
            let lhs = apply_t(s, &tf)?;
            let rhs = apply_t(s + t, f)?;
            for &x in &xs {
                semigroup_law_error = semigroup_law_error.max((lhs.eval(x) - rhs.eval(x)).abs());
            }
        }
    }

    let continuity_table: Vec<(f64, f64)> = (1..=12)
        .map(|k| {
            let t = 0.5f64.powi(k);
            (t, seminorm_pk(&f.translated(t).sub(f), p))
        })
        .collect();
    let first = continuity_table[0].1;
    let last = continuity_table[continuity_table.len() - 1].1;
    let continuous = last <= first / 16.0 + 1e-12;

    let b = p.window().b();
    let t_samples = linspace(0.0, t0, 65);
    let equicontinuity_table: Vec<(usize, f64, f64)> = (0..6)
        .map(|k| {
            let centre = b + t0 + k as f64;
            let bump = BoundedFunction::analytic_with_kinks(
                move |x| (1.0 - (x - centre).abs()).max(0.0),
                1.0,
                vec![centre - 1.0, centre, centre + 1.0],
            );
            let sup_t = t_samples
                .iter()
                .fold(0.0f64, |m, &t| m.max(seminorm_pk(&bump.translated(t), p)));
            (k, seminorm_pk(&bump, p), sup_t)
        })
        .collect();
    let equicontinuous = equicontinuity_table.last().is_some_and(|r| r.2 <= 1e-15);

    Ok(BiContinuityReport {
        pass: semigroup_law_error == 0.0 && contractive && continuous && equicontinuous,
        semigroup_law_error,
        contractive,
        continuity_table,
        equicontinuity_table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::CompactWindow;

    #[test]
    fn translation_examples() {
        let f = BoundedFunction::analytic(|x| x.sin(), 1.0);
        let id = apply_t(0.0, &f).unwrap();
        assert_eq!(id.eval(0.7), f.eval(0.7));
        assert_eq!(apply_t(1.0, &h_function()).unwrap().eval(0.0), 1.0);
        assert!(apply_t(-0.1, &f).is_err());
        let a = apply_t(0.3, &apply_t(1.1, &f).unwrap()).unwrap();
        let b = apply_t(0.3 + 1.1, &f).unwrap();
        for x in linspace(-3.0, 3.0, 13) {
            assert_eq!(a.eval(x), b.eval(x));
        }
    }

    #[test]
    fn resolvent_of_constants() {
        let one = BoundedFunction::constant(1.0);
        let r = resolvent(&ResolventQuadrature::new(1.0).unwrap(), &one).unwrap();
        assert!((r.function.eval(0.3) - 1.0).abs() < 1e-10);
        assert!(r.truncation_bound < 1e-17);
        let r = resolvent(
            &ResolventQuadrature::new(2.0).unwrap(),
            &BoundedFunction::constant(3.0),
        )
        .unwrap();
        assert!((r.function.eval(-4.0) - 1.5).abs() < 1e-10);
        assert_eq!(r.function.sup_bound(), 1.5);
        assert!(ResolventQuadrature::new(0.0).is_err());
        assert!(ResolventQuadrature::new(-1.0).is_err());
    }

    #[test]
    fn resolvent_of_h0_right_of_one() {
        let r = resolvent(&ResolventQuadrature::new(1.0).unwrap(), &hn_family(0)).unwrap();
        assert!((r.function.eval(1.5) - 1.0).abs() < 1e-10);
        assert!((r.function.eval(0.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn analytic_resolvent_examples() {
        for n in [0, 1, 3, 17] {
            assert_eq!(resolvent_hn_analytic(n, 1.5), 1.0);
            assert!((resolvent_hn_analytic(n, 1.0) - 1.0).abs() < 1e-15);
        }
        assert!((resolvent_hn_analytic(0, 0.0) - 1.0).abs() < 1e-15);
        // continuity across x = 0
        for n in [1, 4, 30] {
            let l = resolvent_hn_analytic(n, -1e-12);
            let r = resolvent_hn_analytic(n, 1e-12);
            assert!((l - r).abs() < 1e-11);
        }
    }

    #[test]
    fn analytic_resolvent_matches_quadrature() {
        let q = ResolventQuadrature::new(1.0).unwrap();
        for n in [0, 1, 2, 7] {
            let r = resolvent(&q, &hn_family(n)).unwrap();
            for x in linspace(-2.0, 2.0, 41) {
                let d = (r.function.eval(x) - resolvent_hn_analytic(n, x)).abs();
                assert!(d < 1e-10, "n = {n}, x = {x}: {d}");
            }
        }
    }

    #[test]
    fn family_examples() {
        assert_eq!(hn_family(2).eval(0.5), 0.25);
        assert_eq!(h_function().eval(1.0), 1.0);
        assert!((h_function().eval(0.0) - (-1f64).exp()).abs() < 1e-16);
        for n in [0, 1, 5, 100] {
            for x in [1.000001, 2.0, 50.0] {
                assert_eq!(hn_family(n).eval(x), 1.0);
            }
            assert_eq!(hn_family(n).eval(0.0), 0.0);
            assert_eq!(hn_family(n).eval(-3.0), 0.0);
        }
        assert_eq!(g_kernel_indicator(), 1.0);
    }

    #[test]
    fn h_is_the_resolvent_image_of_g() {
        let h1 = h_lambda(1.0).unwrap();
        let h = h_function();
        let quad = h_lambda_quadrature(&ResolventQuadrature::new(1.0).unwrap());
        for x in linspace(-4.0, 3.0, 71) {
            assert!((h1.eval(x) - h.eval(x)).abs() < 1e-15);
            assert!((quad.eval(x) - h.eval(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn extrapolated_gap_examples() {
        let right = SeminormSpec::on(2.0, 3.0, 11).unwrap();
        for n in [0, 1, 9] {
            assert_eq!(extrapolated_gap(n, &right), 0.0);
        }
        let k = SeminormSpec::on(-2.0, 2.0, 401).unwrap();
        let q = ResolventQuadrature::new(1.0).unwrap();
        let analytic = extrapolated_gap(1, &k);
        let quad = extrapolated_gap_quadrature(1, &k, &q).unwrap();
        assert!((analytic - quad).abs() < 1e-8);
        // x = 0 is in K, where the gap equals Γ(2) − Γ(2, 1)
        assert!(analytic >= gamma_gap(1));
    }

    #[test]
    fn resolvent_identity_probe() {
        // λ R f − (R f)' = f for smooth f
        let f = BoundedFunction::analytic(|x| (0.8 * x).sin() * 0.5 + 1.0 / (1.0 + x * x), 1.5);
        for lambda in [0.5, 1.0, 3.0] {
            let q = ResolventQuadrature::new(lambda).unwrap();
            let r = resolvent(&q, &f).unwrap().function;
            let step = 1e-3;
            for x in linspace(-3.0, 3.0, 13) {
                let deriv = (r.eval(x + step) - r.eval(x - step)) / (2.0 * step);
                let residual = lambda * r.eval(x) - deriv - f.eval(x);
                assert!(residual.abs() < 1e-6, "λ = {lambda}, x = {x}: {residual}");
            }
        }
    }

    #[test]
    fn bicontinuity_examples() {
        let p = SeminormSpec::new(CompactWindow::new(-1.0, 1.0).unwrap(), 201).unwrap();
        let r = check_bicontinuity_axioms(&BoundedFunction::constant(1.0), 1.0, &p).unwrap();
        assert!(r.pass);
        assert!(r.continuity_table.iter().all(|&(_, v)| v == 0.0));

        let r = check_bicontinuity_axioms(&h_function(), 1.0, &p).unwrap();
        assert!(r.pass, "{r:?}");
        for w in r.continuity_table.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        for &(t, v) in &r.continuity_table {
            assert!(v <= t + 1e-15);
        }
        assert_eq!(r.equicontinuity_table[0].2, 1.0);
        for &(k, pk, sup) in &r.equicontinuity_table[1..] {
            assert_eq!(pk, 0.0, "k = {k}");
            assert_eq!(sup, 0.0, "k = {k}");
        }
        assert!(check_bicontinuity_axioms(&h_function(), 0.0, &p).is_err());
    }
}
