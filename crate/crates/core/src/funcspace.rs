// SPDX-License-Identifier: Apache-2.0

//! Bounded continuous functions on the real line, the compact-open seminorms
//! `p_K(f) = sup_{x∈K} |f(x)|`, mixed-topology seminorms and the lattice
//! operations of `BC(ℝ)`.
//!
//! Seminorms are evaluated on uniform sample grids, so every value returned
//! here is a lower bound for the true supremum (exact for piecewise-linear
//! functions whose nodes lie on the grid).

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Default tolerance for identities that hold exactly in exact arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Window and resolution of the sampled sup-norm.
pub const NORM_PROBE: (f64, f64, usize) = (-64.0, 64.0, 8193);

type Eval = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    AnalyticPrimitive,
    PiecewisePolyExp,
    GridSampled,
}

/// One piece `x ↦ (Σ c_k x^k) · e^{rate·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyPiece {
    pub coeffs: Vec<f64>,
    pub rate: f64,
}

impl ExpPolyPiece {
    pub fn constant(c: f64) -> Self {
        ExpPolyPiece {
            coeffs: vec![c],
            rate: 0.0,
        }
    }

    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        ExpPolyPiece { coeffs, rate: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let poly = if self.coeffs.len() > 1
            && self.coeffs[..self.coeffs.len() - 1]
                .iter()
                .all(|&c| c == 0.0)
        {
            // pure monomial: powi keeps x^n accurate for large n
            self.coeffs[self.coeffs.len() - 1] * x.powi(self.coeffs.len() as i32 - 1)
        } else {
            self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
        };
        if self.rate == 0.0 {
            poly
        } else {
            poly * (self.rate * x).exp()
        }
    }
}

/// Piecewise exp-polynomial. Piece `i` lives on `(b_{i-1}, b_i]`, with
/// `b_{-1} = -∞` and `b_{len} = +∞`.
#[derive(Debug, Clone, PartialEq)]
struct Piecewise {
    breaks: Vec<f64>,
    pieces: Vec<ExpPolyPiece>,
}

impl Piecewise {
    fn eval(&self, x: f64) -> f64 {
        let idx = self.breaks.partition_point(|&b| b < x);
        self.pieces[idx].eval(x)
    }
}

/// Linear interpolation between nodes, constant continuation outside.
#[derive(Debug, Clone, PartialEq)]
struct Grid {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl Grid {
    fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = self.nodes.partition_point(|&b| b <= x);
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

#[derive(Clone)]
enum Repr {
    Analytic { f: Arc<Eval>, kinks: Arc<[f64]> },
    Piecewise(Arc<Piecewise>),
    Grid(Arc<Grid>),
}

/// An element of `BC(ℝ)`: `x ↦ repr(x + shift)` together with a declared
/// bound on its sup-norm.
///
/// Translation only touches `shift`, so the translation semigroup acts
/// exactly on every representation.
#[derive(Clone)]
pub struct BoundedFunction {
    repr: Repr,
    shift: f64,
    sup_bound: f64,
}

impl fmt::Debug for BoundedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedFunction")
            .field("kind", &self.kind())
            .field("shift", &self.shift)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl BoundedFunction {
    /// A closed-form function. `sup_bound` must dominate `|f|` everywhere.
    pub fn analytic<F>(f: F, sup_bound: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::analytic_with_kinks(f, sup_bound, Vec::new())
    }

    /// Like [`BoundedFunction::analytic`], recording points where `f` is not
    /// smooth so quadrature can split there.
    pub fn analytic_with_kinks<F>(f: F, sup_bound: f64, kinks: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        BoundedFunction {
            repr: Repr::Analytic {
                f: Arc::new(f),
                kinks: kinks.into(),
            },
            shift: 0.0,
            sup_bound: sup_bound.abs(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::analytic(move |_| c, c.abs())
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `x ↦ 1 / (1 + x²)`.
    pub fn rational_bump() -> Self {
        Self::analytic(|x| 1.0 / (1.0 + x * x), 1.0)
    }

    /// Piecewise exp-polynomial with `pieces.len() == breaks.len() + 1`.
    pub fn piecewise(breaks: Vec<f64>, pieces: Vec<ExpPolyPiece>, sup_bound: f64) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breaks need {} pieces, got {}",
                breaks.len(),
                breaks.len() + 1,
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(BoundedFunction {
            repr: Repr::Piecewise(Arc::new(Piecewise { breaks, pieces })),
            shift: 0.0,
            sup_bound: sup_bound.abs(),
        })
    }

    /// Linear interpolation through `(nodes, values)` with constant extension.
    pub fn grid(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "grid needs matching non-empty nodes/values ({} vs {})",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        if values.iter().chain(&nodes).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid data must be finite".into()));
        }
        let sup_bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(BoundedFunction {
            repr: Repr::Grid(Arc::new(Grid { nodes, values })),
            shift: 0.0,
            sup_bound,
        })
    }

    /// A random nonnegative piecewise-linear function on `[a, b]` with
    /// `knots` equally spaced nodes and values in `[0, 1)`.
    pub fn random_nonnegative_spline<R: Rng + ?Sized>(
        rng: &mut R,
        a: f64,
        b: f64,
        knots: usize,
    ) -> Self {
        let knots = knots.max(2);
        let nodes: Vec<f64> = (0..knots)
            .map(|i| a + (b - a) * i as f64 / (knots - 1) as f64)
            .collect();
        let values: Vec<f64> = (0..knots).map(|_| rng.random::<f64>()).collect();
        Self::grid(nodes, values).expect("valid spline")
    }

    pub fn kind(&self) -> FunctionKind {
        match self.repr {
            Repr::Analytic { .. } => FunctionKind::AnalyticPrimitive,
            Repr::Piecewise(_) => FunctionKind::PiecewisePolyExp,
            Repr::Grid(_) => FunctionKind::GridSampled,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let y = x + self.shift;
        match &self.repr {
            Repr::Analytic { f, .. } => f(y),
            Repr::Piecewise(p) => p.eval(y),
            Repr::Grid(g) => g.eval(y),
        }
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Points (in `x` coordinates) where the function may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let raw: &[f64] = match &self.repr {
            Repr::Analytic { kinks, .. } => kinks,
            Repr::Piecewise(p) => &p.breaks,
            Repr::Grid(g) => &g.nodes,
        };
        raw.iter().map(|k| k - self.shift).collect()
    }

    /// `x ↦ f(x + t)` for any real `t`.
    pub fn translated(&self, t: f64) -> Self {
        BoundedFunction {
            repr: self.repr.clone(),
            shift: self.shift + t,
            sup_bound: self.sup_bound,
        }
    }

    /// Nodes and values of a grid-sampled function, in `x` coordinates.
    pub fn grid_data(&self) -> Option<(Vec<f64>, &[f64])> {
        match &self.repr {
            Repr::Grid(g) => Some((g.nodes.iter().map(|n| n - self.shift).collect(), &g.values)),
            _ => None,
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    fn combine<F>(&self, other: &Self, sup_bound: f64, op: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let (f, g) = (self.clone(), other.clone());
        let mut kinks = f.breakpoints();
        kinks.extend(g.breakpoints());
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        Self::analytic_with_kinks(move |x| op(f.eval(x), g.eval(x)), sup_bound, kinks)
    }

    fn map<F>(&self, sup_bound: f64, op: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = self.clone();
        let kinks = f.breakpoints();
        Self::analytic_with_kinks(move |x| op(f.eval(x)), sup_bound, kinks)
    }

    /// Pointwise maximum `f ∨ g`.
    pub fn sup(&self, other: &Self) -> Self {
        self.combine(other, self.sup_bound.max(other.sup_bound), f64::max)
    }

    /// Pointwise minimum `f ∧ g`.
    pub fn inf(&self, other: &Self) -> Self {
        self.combine(other, self.sup_bound.max(other.sup_bound), f64::min)
    }

    pub fn abs(&self) -> Self {
        self.map(self.sup_bound, f64::abs)
    }

    /// `f₊ = f ∨ 0`.
    pub fn pos_part(&self) -> Self {
        self.map(self.sup_bound, |v| v.max(0.0))
    }

    /// `f₋ = (-f) ∨ 0`.
    pub fn neg_part(&self) -> Self {
        self.map(self.sup_bound, |v| (-v).max(0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, self.sup_bound + other.sup_bound, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, self.sup_bound + other.sup_bound, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(self.sup_bound * c.abs(), move |v| c * v)
    }
}

/// A compact window `K = [a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactWindow {
    a: f64,
    b: f64,
}

impl CompactWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "window needs finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(CompactWindow { a, b })
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Result<Self> {
        Self::new(-r, r)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// `resolution` equally spaced points including both endpoints.
    pub fn linspace(&self, resolution: usize) -> Vec<f64> {
        linspace(self.a, self.b, resolution)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
                .collect()
        }
    }
}

/// A sampled compact-open seminorm `p_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormSpec {
    window: CompactWindow,
    resolution: usize,
}

impl SeminormSpec {
    pub fn new(window: CompactWindow, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution must be >= 2, got {resolution}"
            )));
        }
        Ok(SeminormSpec { window, resolution })
    }

    /// Convenience constructor for `[a, b]`.
    pub fn on(a: f64, b: f64, resolution: usize) -> Result<Self> {
        Self::new(CompactWindow::new(a, b)?, resolution)
    }

    pub fn window(&self) -> CompactWindow {
        self.window
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn points(&self) -> Vec<f64> {
        self.window.linspace(self.resolution)
    }
}

/// `p_K(f)` on the sample grid of `p`.
pub fn seminorm_pk(f: &BoundedFunction, p: &SeminormSpec) -> f64 {
    max_abs(f, &p.points())
}

fn max_abs(f: &BoundedFunction, xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, &x| m.max(f.eval(x).abs()))
}

/// Sup-norm sampled on [`NORM_PROBE`] together with the function's own
/// breakpoints inside the probe window.
pub fn sampled_sup_norm(f: &BoundedFunction) -> f64 {
    max_abs(f, &norm_probe_points(&[f]))
}

fn norm_probe_points(fs: &[&BoundedFunction]) -> Vec<f64> {
    let (a, b, n) = NORM_PROBE;
    let mut xs = linspace(a, b, n);
    for f in fs {
        xs.extend(f.breakpoints().into_iter().filter(|x| (a..=b).contains(x)));
    }
    xs
}

/// Truncated mixed seminorm `sup_n a_n p_n(f)` with `a_n ≥ 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixedSeminormSpec {
    terms: Vec<(f64, SeminormSpec)>,
}

impl MixedSeminormSpec {
    pub fn new(terms: Vec<(f64, SeminormSpec)>) -> Result<Self> {
        if let Some((w, _)) = terms.iter().find(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "mixed seminorm weights must be >= 0, got {w}"
            )));
        }
        Ok(MixedSeminormSpec { terms })
    }

    /// Index after which the sequence `a_n` is treated as zero.
    pub fn tail_index(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(f64, SeminormSpec)] {
        &self.terms
    }
}

pub fn mixed_seminorm(f: &BoundedFunction, m: &MixedSeminormSpec) -> f64 {
    m.terms
        .iter()
        .fold(0.0f64, |acc, (w, p)| acc.max(w * seminorm_pk(f, p)))
}

/// Both sides of the bi-AM identities for one pair of nonnegative functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BiAmReport {
    /// `max{p(f), p(g)}`
    pub seminorm_max: f64,
    /// `p(f ∨ g)`
    pub seminorm_of_sup: f64,
    /// `max{‖f‖, ‖g‖}` (sampled)
    pub norm_max: f64,
    /// `‖f ∨ g‖` (sampled)
    pub norm_of_sup: f64,
    pub holds: bool,
}

/// Checks `max{p(f), p(g)} = p(f ∨ g)` and the same identity for the sampled
/// sup-norm. Requires `f, g ≥ 0` on the sample grids.
pub fn check_bi_am(
    f: &BoundedFunction,
    g: &BoundedFunction,
    p: &SeminormSpec,
) -> Result<BiAmReport> {
    let xs = p.points();
    let probe = norm_probe_points(&[f, g]);
    for x in xs.iter().chain(&probe) {
        ensure_nonnegative("f", f, *x)?;
        ensure_nonnegative("g", g, *x)?;
    }
    let s = f.sup(g);
    let seminorm_max = max_abs(f, &xs).max(max_abs(g, &xs));
    let seminorm_of_sup = max_abs(&s, &xs);
    let norm_max = max_abs(f, &probe).max(max_abs(g, &probe));
    let norm_of_sup = max_abs(&s, &probe);
    let holds = (seminorm_max - seminorm_of_sup).abs() <= IDENTITY_TOL
        && (norm_max - norm_of_sup).abs() <= IDENTITY_TOL;
    Ok(BiAmReport {
        seminorm_max,
        seminorm_of_sup,
        norm_max,
        norm_of_sup,
        holds,
    })
}

fn ensure_nonnegative(which: &'static str, f: &BoundedFunction, x: f64) -> Result<()> {
    let value = f.eval(x);
    if value < 0.0 {
        return Err(Error::NegativeOnGrid { which, x, value });
    }
    Ok(())
}

/// Given `|f| ≤ |g|` on the grid of `p`, checks `p(f) ≤ p(g)`.
pub fn check_compatibility(
    f: &BoundedFunction,
    g: &BoundedFunction,
    p: &SeminormSpec,
) -> Result<bool> {
    let xs = p.points();
    for &x in &xs {
        let (lhs, rhs) = (f.eval(x).abs(), g.eval(x).abs());
        if lhs > rhs {
            return Err(Error::NotDominated { x, lhs, rhs });
        }
    }
    Ok(max_abs(f, &xs) <= max_abs(g, &xs) + IDENTITY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h() -> BoundedFunction {
        BoundedFunction::analytic(|x| (x - 1.0).exp().min(1.0), 1.0)
    }

    #[test]
    fn seminorm_examples() {
        let p = SeminormSpec::on(-2.0, 2.0, 401).unwrap();
        assert_eq!(seminorm_pk(&BoundedFunction::zero(), &p), 0.0);
        let id = BoundedFunction::analytic(|x| x, 1e300);
        assert_eq!(seminorm_pk(&id, &p), 2.0);
        assert_eq!(seminorm_pk(&h(), &p), 1.0);
    }

    #[test]
    fn mixed_seminorm_examples() {
        let one = BoundedFunction::constant(1.0);
        assert_eq!(mixed_seminorm(&one, &MixedSeminormSpec::default()), 0.0);
        let k = SeminormSpec::on(-1.0, 3.0, 50).unwrap();
        let single = MixedSeminormSpec::new(vec![(1.0, k.clone())]).unwrap();
        let f = BoundedFunction::analytic(|x| x.sin(), 1.0);
        assert_eq!(mixed_seminorm(&f, &single), seminorm_pk(&f, &k));
        let pair = MixedSeminormSpec::new(vec![
            (0.5, SeminormSpec::on(0.0, 1.0, 11).unwrap()),
            (0.25, SeminormSpec::on(0.0, 2.0, 11).unwrap()),
        ])
        .unwrap();
        assert_eq!(mixed_seminorm(&one, &pair), 0.5);
        assert_eq!(pair.tail_index(), 2);
        assert!(MixedSeminormSpec::new(vec![(-0.1, k)]).is_err());
    }

    #[test]
    fn lattice_examples() {
        let f = BoundedFunction::analytic(|x| x.cos(), 1.0);
        let s = f.sup(&f);
        for x in linspace(-3.0, 3.0, 31) {
            assert_eq!(s.eval(x), f.eval(x));
        }
        let ramp = BoundedFunction::analytic(|x| x, 10.0);
        assert_eq!(ramp.pos_part().eval(-1.0), 0.0);
        assert_eq!(ramp.pos_part().eval(1.0), 1.0);
        assert_eq!(ramp.neg_part().eval(-1.0), 1.0);
        let sin = BoundedFunction::analytic(f64::sin, 1.0);
        assert!((sin.abs().eval(1.5 * std::f64::consts::PI) - 1.0).abs() < 1e-15);
        let g = BoundedFunction::constant(-3.0);
        assert_eq!(f.sup(&g).sup_bound(), 3.0);
        assert_eq!(f.inf(&g).eval(0.0), -3.0);
    }

    #[test]
    fn grid_interpolates_and_extends_constantly() {
        let f = BoundedFunction::grid(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, -1.0]).unwrap();
        assert_eq!(f.kind(), FunctionKind::GridSampled);
        assert_eq!(f.eval(-5.0), 1.0);
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(10.0), -1.0);
        assert_eq!(f.sup_bound(), 3.0);
        assert_eq!(f.translated(1.0).eval(0.0), 3.0);
        assert_eq!(f.translated(1.0).breakpoints(), vec![-1.0, 0.0, 2.0]);
        assert!(BoundedFunction::grid(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(BoundedFunction::grid(vec![], vec![]).is_err());
    }

    #[test]
    fn piecewise_validates_shape() {
        assert!(
            BoundedFunction::piecewise(vec![0.0], vec![ExpPolyPiece::constant(1.0)], 1.0).is_err()
        );
        assert!(BoundedFunction::piecewise(
            vec![1.0, 0.0],
            vec![
                ExpPolyPiece::constant(0.0),
                ExpPolyPiece::constant(0.0),
                ExpPolyPiece::constant(0.0)
            ],
            1.0
        )
        .is_err());
        let f = BoundedFunction::piecewise(
            vec![0.0, 1.0],
            vec![
                ExpPolyPiece::constant(0.0),
                ExpPolyPiece::monomial(2),
                ExpPolyPiece::constant(1.0),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.5), 0.25);
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(7.0), 1.0);
    }

    #[test]
    fn window_and_spec_validation() {
        assert!(CompactWindow::new(1.0, 1.0).is_err());
        assert!(CompactWindow::new(f64::NAN, 1.0).is_err());
        assert!(SeminormSpec::on(0.0, 1.0, 1).is_err());
        let xs = CompactWindow::new(-1.0, 1.0).unwrap().linspace(5);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn bi_am_examples() {
        let p = SeminormSpec::on(0.0, 1.0, 101).unwrap();
        let r = check_bi_am(
            &BoundedFunction::constant(1.0),
            &BoundedFunction::constant(2.0),
            &p,
        )
        .unwrap();
        assert!(r.holds);
        assert_eq!(r.norm_of_sup, 2.0);
        assert_eq!(r.seminorm_of_sup, 2.0);

        let up = BoundedFunction::grid(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let down = BoundedFunction::grid(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let r = check_bi_am(&up, &down, &p).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.seminorm_max, 1.0);

        let neg = BoundedFunction::analytic(|x| x - 0.5, 100.0);
        assert!(matches!(
            check_bi_am(&neg, &up, &p),
            Err(Error::NegativeOnGrid { which: "f", .. })
        ));
    }

    #[test]
    fn compatibility_examples() {
        let p = SeminormSpec::on(-3.0, 3.0, 301).unwrap();
        let g = BoundedFunction::analytic(|x| (2.0 * x).sin() + 0.1, 1.1);
        assert!(check_compatibility(&BoundedFunction::zero(), &g, &p).unwrap());
        assert!(check_compatibility(&g.scale(0.5), &g, &p).unwrap());
        assert!(matches!(
            check_compatibility(&g, &g.scale(0.5), &p),
            Err(Error::NotDominated { .. })
        ));
    }

    #[test]
    fn random_compatibility_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = SeminormSpec::on(-4.0, 4.0, 161).unwrap();
        for _ in 0..100 {
            let g = BoundedFunction::random_nonnegative_spline(&mut rng, -4.0, 4.0, 9)
                .scale(2.0)
                .sub(&BoundedFunction::constant(1.0));
            // |f| <= |g| by construction: f = θ(x)·g(x) with θ ∈ [-1, 1]
            let theta = BoundedFunction::random_nonnegative_spline(&mut rng, -4.0, 4.0, 13)
                .scale(2.0)
                .sub(&BoundedFunction::constant(1.0));
            let (gg, th) = (g.clone(), theta.clone());
            let f = BoundedFunction::analytic(move |x| th.eval(x) * gg.eval(x), g.sup_bound());
            assert!(check_compatibility(&f, &g, &p).unwrap());
        }
    }

    proptest! {
        #[test]
        fn seminorm_is_a_seminorm(
            v1 in prop::collection::vec(-5.0f64..5.0, 6),
            v2 in prop::collection::vec(-5.0f64..5.0, 6),
            c in -3.0f64..3.0,
        ) {
            let nodes: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
            let f = BoundedFunction::grid(nodes.clone(), v1).unwrap();
            let g = BoundedFunction::grid(nodes, v2).unwrap();
            let p = SeminormSpec::on(-3.0, 3.0, 61).unwrap();
            let (pf, pg) = (seminorm_pk(&f, &p), seminorm_pk(&g, &p));
            prop_assert!(seminorm_pk(&f.add(&g), &p) <= pf + pg + 1e-12);
            prop_assert!((seminorm_pk(&f.scale(c), &p) - c.abs() * pf).abs() <= 1e-12 * (1.0 + pf));
            prop_assert!(pf <= f.sup_bound());
            prop_assert!(seminorm_pk(&f.sup(&g), &p) <= f.sup(&g).sup_bound());
        }

        #[test]
        fn bi_am_holds_exactly_for_nonnegative_grids(
            v1 in prop::collection::vec(0.0f64..5.0, 7),
            v2 in prop::collection::vec(0.0f64..5.0, 5),
        ) {
            let f = BoundedFunction::grid(linspace(-3.0, 3.0, 7), v1).unwrap();
            let g = BoundedFunction::grid(linspace(-1.0, 4.0, 5), v2).unwrap();
            let p = SeminormSpec::on(-2.0, 2.0, 81).unwrap();
            let r = check_bi_am(&f, &g, &p).unwrap();
            prop_assert_eq!(r.seminorm_max, r.seminorm_of_sup);
            prop_assert_eq!(r.norm_max, r.norm_of_sup);
            prop_assert!(r.holds);
        }
    }
}
