// SPDX-License-Identifier: Apache-2.0

//! Property tests for the special functions, the translation semigroup and
//! the perturbed semigroup. Reference values are computed here by direct
//! summation or by recombining independent runs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semipert::dsperturb::{dyson_phillips, positivity_audit, DSPerturbation, DysonPhillipsOptions};
use semipert::exec::Execution;
use semipert::funcspace::{linspace, BoundedFunction, CompactWindow, SeminormSpec};
use semipert::measures::RegularMeasure;
use semipert::specfun::{gamma_gap, incomplete_gamma_int_f64, lower_gamma_scaled};
use semipert::transgroup::{apply_t, extrapolated_gap};

/// `n! Σ_{m>n} x^m/m!` summed term by term through the ratio `x/(n+k)`.
fn lower_scaled_direct(n: u32, x: f64) -> f64 {
    let mut term = x.powi(n as i32 + 1) / (n as f64 + 1.0);
    let mut sum = 0.0;
    let mut k = 1.0;
    while term > 1e-300 && term > 1e-20 * sum {
        sum += term;
        k += 1.0;
        term *= x / (n as f64 + k);
    }
    sum
}

fn coarse(terms: usize) -> DysonPhillipsOptions {
    DysonPhillipsOptions {
        terms,
        dt: 1e-2,
        exec: Execution::Sequential,
    }
}

#[test]
fn incomplete_gamma_at_zero_is_factorial() {
    let mut f = 1.0f64;
    for n in 0..=20u32 {
        if n > 0 {
            f *= n as f64;
        }
        assert_eq!(incomplete_gamma_int_f64(n, 0.0).unwrap(), f);
    }
}

#[test]
fn gamma_gap_corridor() {
    for n in 1..=100u32 {
        let g = gamma_gap(n);
        assert!(gamma_gap(n + 1) < g);
        assert!(g <= 1.0 / (n as f64 + 1.0));
        let scaled = g * (n as f64 + 1.0);
        assert!((0.3..=1.1).contains(&scaled), "n = {n}: {scaled}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incomplete_gamma_decreases_in_x(n in 0u32..40, x in 0.0f64..30.0, dx in 1e-3f64..5.0) {
        let a = incomplete_gamma_int_f64(n, x).unwrap();
        let b = incomplete_gamma_int_f64(n, x + dx).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn lower_tail_matches_direct_sum_and_bound(n in 0u32..80, x in 0.0f64..=1.0) {
        let lib = lower_gamma_scaled(n, x);
        let direct = lower_scaled_direct(n, x);
        prop_assert!((lib - direct).abs() <= 1e-13 * direct.max(f64::MIN_POSITIVE), "{lib} vs {direct}");
        let bound = x.powi(n as i32 + 1) / (n as f64 + 1.0) / (1.0 - x / (n as f64 + 2.0));
        prop_assert!(direct <= bound * (1.0 + 1e-14));
    }

    #[test]
    fn translation_law_is_exact(seed in any::<u64>(), s in 0.0f64..5.0, t in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = BoundedFunction::random_nonnegative_spline(&mut rng, -3.0, 3.0, 9);
        let lhs = apply_t(s, &apply_t(t, &f).unwrap()).unwrap();
        let rhs = apply_t(s + t, &f).unwrap();
        for x in linspace(-10.0, 10.0, 201) {
            prop_assert_eq!(lhs.eval(x).to_bits(), rhs.eval(x).to_bits());
        }
    }

    #[test]
    fn extrapolated_gap_monotone_on_subwindows(a in -2.0f64..1.9, w in 0.05f64..4.0) {
        let b = (a + w).min(2.0);
        let k = SeminormSpec::new(CompactWindow::new(a, b).unwrap(), 101).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..=60u32 {
            let g = extrapolated_gap(n, &k);
            prop_assert!(g <= prev);
            prop_assert!(g <= 3.0 / (n as f64 + 1.0));
            prev = g;
        }
    }

    #[test]
    fn smallness_nonincreasing_in_lambda(w in 0.0f64..0.9, l1 in 0.1f64..10.0, dl in 0.0f64..10.0) {
        let pert = DSPerturbation::new(RegularMeasure::dirac(0.3, w));
        prop_assert!(pert.smallness_at(l1 + dl).unwrap() <= pert.smallness_at(l1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_is_linear_in_the_datum(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let pert = DSPerturbation::new("0.3*delta(0.5) + 0.2*uniform(-1,1)".parse().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = BoundedFunction::random_nonnegative_spline(&mut rng, -3.0, 3.0, 7);
        let v = BoundedFunction::rational_bump();
        let combo = u.scale(alpha).add(&v.scale(beta));
        let t = 1.5;
        let su = dyson_phillips(&pert, &u, t, &coarse(8)).unwrap();
        let sv = dyson_phillips(&pert, &v, t, &coarse(8)).unwrap();
        let sc = dyson_phillips(&pert, &combo, t, &coarse(8)).unwrap();
        for s in [0.4, 1.0, 1.5] {
            for x in linspace(-4.0, 4.0, 41) {
                let expect = alpha * su.eval(s, x) + beta * sv.eval(s, x);
                prop_assert!((sc.eval(s, x) - expect).abs() < 1e-12, "s = {}, x = {}", s, x);
            }
        }
    }

    #[test]
    fn terms_stay_nonnegative(seed in any::<u64>(), w in 0.0f64..0.5, loc in -2.0f64..2.0, h in 0.0f64..0.2) {
        let mu = RegularMeasure::dirac(loc, w).plus(&RegularMeasure::density(-1.0, 1.0, h).unwrap());
        let pert = DSPerturbation::new(mu);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = BoundedFunction::random_nonnegative_spline(&mut rng, -4.0, 4.0, 9);
        let window = CompactWindow::symmetric(4.0).unwrap();
        let audit = positivity_audit(&pert, &u0, &[0.5, 1.0, 2.0], &window, 81, &coarse(10)).unwrap();
        prop_assert!(audit.min_overall() >= -1e-12, "{:?}", audit);
    }
}
