// SPDX-License-Identifier: Apache-2.0

//! Composite Simpson quadrature, optionally split at known kinks.

/// Composite Simpson rule on `[a, b]` with `panels` subintervals (rounded up
/// to an even count).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    simpson_with_ends(&f, a, b, panels, f(a), f(b))
}

fn simpson_with_ends<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    fa: f64,
    fb: f64,
) -> f64 {
    let panels = (panels.max(2) + 1) & !1;
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (fa + fb + 4.0 * odd + 2.0 * even)
}

/// Composite Simpson on `[a, b]`, split at every breakpoint strictly inside
/// the interval. Each segment gets a share of `panels` proportional to its
/// length, but never fewer than `min_panels`.
///
/// Segment ends are sampled one ulp inside the segment, so a jump at a
/// breakpoint contributes its one-sided limits.
pub fn simpson_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    panels: usize,
    min_panels: usize,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let len = b - a;
    let mut lo = a;
    let mut total = 0.0;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        let share = ((hi - lo) / len * panels as f64).ceil() as usize;
        let (fa, fb) = (f(lo.next_up().min(hi)), f(hi.next_down().max(lo)));
        total += simpson_with_ends(&f, lo, hi, share.max(min_panels), fa, fb);
        lo = hi;
    }
    total
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`, with
/// Richardson correction and a recursion cap of `max_depth`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 2);
        let exact = (16.0 / 4.0 - 4.0 + 2.0) - (1.0 / 4.0 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn odd_panel_count_is_rounded_up() {
        let v = simpson(|x| x.exp(), 0.0, 1.0, 7);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn splitting_recovers_accuracy_at_a_kink() {
        let f = |x: f64| (x - 0.3).abs();
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        let plain = simpson(f, 0.0, 1.0, 10);
        let split = simpson_split(f, 0.0, 1.0, &[0.3], 10, 2);
        assert!((split - exact).abs() < 1e-14);
        assert!((plain - exact).abs() > 1e-6);
    }

    #[test]
    fn jumps_take_one_sided_limits() {
        let step = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
        assert!((simpson_split(step, 0.0, 1.0, &[0.5], 4, 2) - 0.5).abs() < 1e-14);
        let left_closed = |x: f64| if x >= 0.5 { 1.0 } else { 0.0 };
        assert!((simpson_split(left_closed, 0.0, 1.0, &[0.5], 4, 2) - 0.5).abs() < 1e-14);
        assert!((simpson_split(step, 0.5, 1.0, &[], 4, 2) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn adaptive_reaches_tolerance() {
        let v = adaptive_simpson(|x| x.powi(5) * (-x).exp(), 2.0, 60.0, 1e-13, 50);
        let exact = 120.0 * (-2f64).exp() * (1.0 + 2.0 + 2.0 + 4.0 / 3.0 + 2.0 / 3.0 + 4.0 / 15.0);
        assert!((v - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(simpson(|_| 1.0, 1.0, 1.0, 4), 0.0);
        assert_eq!(simpson_split(|_| 1.0, 2.0, 1.0, &[], 4, 2), 0.0);
    }
}
