// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional implemented semigroups on `𝓛(ℓ¹(m), ℓ∞(n))`.
//!
//! `U(t)S = e^{tA}S` is perturbed by `𝒦S = BS`. In finite dimension the
//! extrapolation space coincides with the space itself, so `A₋₁ = A` and no
//! completion is built. Every series and every staged composition is checked
//! against [`expm`] of the perturbed generator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;

pub type Matrix = DMatrix<f64>;

/// Desk-scale cap on `n` and `m`.
pub const MAX_DIM: usize = 16;
/// Quadrature panels per unit time for the nested series integrals.
pub const PANELS_PER_UNIT_TIME: usize = 2048;
/// Entrywise slack for positivity of `e^{tA}`.
pub const POSITIVITY_TOL: f64 = 1e-12;
pub const POWER_ITERATION_TOL: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 100_000;
/// Power of the Gelfand estimate `‖M^k‖^{1/k}`.
pub const GELFAND_POWER: u32 = 64;

// ---------------------------------------------------------------- expm

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `ℓ∞`-induced operator norm: largest absolute row sum.
pub fn norm_inf(a: &Matrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry.
pub fn max_entry(a: &Matrix) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn min_entry(a: &Matrix) -> f64 {
    a.iter().copied().fold(f64::INFINITY, f64::min)
}

fn expm_unchecked(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let id = Matrix::identity(n, n);
    let norm = norm1(a);
    if norm == 0.0 {
        return id;
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-s);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `e^{tA}` by scaling and squaring around the degree-13 Padé approximant.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!(
            "expm needs a square matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("expm needs t ≥ 0, got {t}")));
    }
    Ok(expm_unchecked(&(a * t)))
}

// ------------------------------------------------------- positivity

/// Off-diagonal entries are nonnegative.
pub fn is_metzler(a: &Matrix) -> bool {
    a.is_square() && (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] >= 0.0))
}

pub fn is_nonnegative(a: &Matrix) -> bool {
    a.iter().all(|&v| v >= 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveGeneration {
    pub metzler: bool,
    /// Smallest entry of `e^{tA}` over the grid.
    pub min_entry: f64,
    /// `e^{tA} ≥ −1e-12` entrywise for every grid time.
    pub nonnegative: bool,
}

/// Compares `e^{tA} ≥ 0` on `t_grid` with the Metzler property.
pub fn check_positive_generation(a: &Matrix, t_grid: &[f64]) -> Result<PositiveGeneration> {
    let mut min = f64::INFINITY;
    for &t in t_grid {
        min = min.min(min_entry(&expm(a, t)?));
    }
    Ok(PositiveGeneration {
        metzler: is_metzler(a),
        min_entry: min,
        nonnegative: min >= -POSITIVITY_TOL,
    })
}

/// `(λI − A)⁻¹`.
pub fn resolvent(a: &Matrix, lambda: f64) -> Result<Matrix> {
    let n = a.nrows();
    (Matrix::identity(n, n) * lambda - a)
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("λI − A is not invertible at λ = {lambda}")))
}

/// `(λI − A)⁻¹ ≥ 0` entrywise at every `λ` supplied.
pub fn resolvent_positive_on(a: &Matrix, lambdas: &[f64]) -> Result<bool> {
    for &l in lambdas {
        if min_entry(&resolvent(a, l)?) < -POSITIVITY_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

// ------------------------------------------------- spectral radius

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRadius {
    /// Power-iteration estimate of `r(|M|)`; equals `r(M)` for `M ≥ 0`.
    pub value: f64,
    pub iterations: usize,
    /// `‖M^64‖_∞^{1/64}`.
    pub gelfand: f64,
}

fn gelfand_estimate(m: &Matrix) -> f64 {
    // repeated squaring with renormalisation: ‖M^{2^k}‖ = c·‖P‖
    let mut p = m.abs();
    let mut log_scale = 0.0;
    let mut k = 1u32;
    while k < GELFAND_POWER {
        p = &p * &p;
        log_scale *= 2.0;
        k *= 2;
        let nrm = norm_inf(&p);
        if nrm == 0.0 {
            return 0.0;
        }
        p /= nrm;
        log_scale += nrm.ln();
    }
    let nrm = norm_inf(&p);
    if nrm == 0.0 {
        0.0
    } else {
        ((log_scale + nrm.ln()) / f64::from(GELFAND_POWER)).exp()
    }
}

/// Power iteration on `|M|` from the all-ones vector. Each estimate is the
/// square root of a two-step growth factor, so period-two cycles converge.
pub fn spectral_radius(m: &Matrix) -> Result<SpectralRadius> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(
            "spectral radius needs a square matrix".into(),
        ));
    }
    let p = m.abs();
    let gelfand = gelfand_estimate(m);
    let mut x = DVector::from_element(m.nrows(), 1.0);
    let mut prev = f64::INFINITY;
    let mut change = f64::INFINITY;
    for it in 1..=POWER_ITERATION_MAX {
        let y = &p * (&p * &x);
        let ny = y.amax();
        if ny == 0.0 {
            return Ok(SpectralRadius {
                value: 0.0,
                iterations: it,
                gelfand,
            });
        }
        let est = ny.sqrt();
        x = y / ny;
        change = (est - prev).abs();
        if change <= POWER_ITERATION_TOL * est.max(1.0) {
            return Ok(SpectralRadius {
                value: est,
                iterations: it,
                gelfand,
            });
        }
        prev = est;
    }
    Err(Error::NonConvergence {
        iterations: POWER_ITERATION_MAX,
        last_change: change,
    })
}

/// Upper bound on the spectral abscissa from Gershgorin discs.
pub fn gershgorin_abscissa(a: &Matrix) -> f64 {
    (0..a.nrows())
        .map(|i| {
            a[(i, i)]
                + (0..a.ncols())
                    .filter(|&j| j != i)
                    .map(|j| a[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `s(A)` for Metzler `A`: `r(A + cI) − c` with `c` making `A + cI ≥ 0`.
/// Falls back to the Gershgorin bound when the iteration stalls.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    if !is_metzler(a) {
        return Err(Error::NotPositive(
            "spectral abscissa via Perron root needs a Metzler matrix".into(),
        ));
    }
    let c = (0..a.nrows()).map(|i| -a[(i, i)]).fold(0.0, f64::max);
    let n = a.nrows();
    let shifted = a + Matrix::identity(n, n) * c;
    match spectral_radius(&shifted) {
        Ok(r) => Ok(r.value - c),
        Err(Error::NonConvergence { .. }) => Ok(gershgorin_abscissa(a)),
        Err(e) => Err(e),
    }
}

/// `λ = s(A) + 1`.
pub fn default_lambda(a: &Matrix) -> Result<f64> {
    Ok(spectral_abscissa(a)? + 1.0)
}

// ------------------------------------------------ operator space

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNorms {
    /// `‖S‖_{ℓ¹→ℓ∞} = max |S_ij|`.
    pub norm: f64,
    /// `p_x(S) = ‖Sx‖_∞`, one per probe vector.
    pub seminorms: Vec<f64>,
}

pub fn operator_space_norms(s: &Matrix, probes: &[DVector<f64>]) -> Result<OperatorNorms> {
    let mut seminorms = Vec::with_capacity(probes.len());
    for x in probes {
        if x.len() != s.ncols() {
            return Err(Error::InvalidArgument(format!(
                "probe has length {}, expected {}",
                x.len(),
                s.ncols()
            )));
        }
        seminorms.push((s * x).amax());
    }
    Ok(OperatorNorms {
        norm: max_entry(s),
        seminorms,
    })
}

/// Both sides of the bi-AM identities for nonnegative `S, R`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBiAmReport {
    pub seminorm_max: f64,
    pub seminorm_of_sup: f64,
    pub norm_max: f64,
    pub norm_of_sup: f64,
    pub holds: bool,
}

fn single_support(x: &DVector<f64>) -> bool {
    x.iter().filter(|&&v| v != 0.0).count() <= 1
}

/// `max{p_x(S), p_x(R)} = p_x(S ∨ R)` and `max{‖S‖, ‖R‖} = ‖S ∨ R‖`, for
/// `S, R ≥ 0` and `x ≥ 0` with a single nonzero coordinate.
pub fn matrix_bi_am(s: &Matrix, r: &Matrix, x: &DVector<f64>) -> Result<MatrixBiAmReport> {
    if s.shape() != r.shape() {
        return Err(Error::InvalidArgument("bi-AM needs equal shapes".into()));
    }
    if !is_nonnegative(s) || !is_nonnegative(r) {
        return Err(Error::NotPositive("bi-AM check needs S, R ≥ 0".into()));
    }
    if x.iter().any(|&v| v < 0.0) || !single_support(x) {
        return Err(Error::InvalidArgument(
            "probe must be ≥ 0 with one nonzero coordinate".into(),
        ));
    }
    let sup = s.zip_map(r, f64::max);
    let a = operator_space_norms(s, std::slice::from_ref(x))?;
    let b = operator_space_norms(r, std::slice::from_ref(x))?;
    let c = operator_space_norms(&sup, std::slice::from_ref(x))?;
    let seminorm_max = a.seminorms[0].max(b.seminorms[0]);
    let norm_max = a.norm.max(b.norm);
    Ok(MatrixBiAmReport {
        seminorm_max,
        seminorm_of_sup: c.seminorms[0],
        norm_max,
        norm_of_sup: c.norm,
        holds: seminorm_max == c.seminorms[0] && norm_max == c.norm,
    })
}

/// Given `|S| ≤ |R|` entrywise, checks `p_x(S) ≤ p_x(R)` for a probe with
/// one nonzero coordinate.
pub fn matrix_compatibility(s: &Matrix, r: &Matrix, x: &DVector<f64>) -> Result<bool> {
    if s.shape() != r.shape() {
        return Err(Error::InvalidArgument(
            "compatibility needs equal shapes".into(),
        ));
    }
    if !single_support(x) {
        return Err(Error::InvalidArgument(
            "probe must have one nonzero coordinate".into(),
        ));
    }
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let (lhs, rhs) = (s[(i, j)].abs(), r[(i, j)].abs());
            if lhs > rhs {
                return Err(Error::NotDominated {
                    x: (i * s.ncols() + j) as f64,
                    lhs,
                    rhs,
                });
            }
        }
    }
    let p = operator_space_norms(s, std::slice::from_ref(x))?.seminorms[0];
    let q = operator_space_norms(r, std::slice::from_ref(x))?.seminorms[0];
    Ok(p <= q)
}

// -------------------------------------------------- matrix system

/// `(A, B, λ, S0)` with `A` Metzler, `B ≥ 0`, `(λI − A)⁻¹ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSystem {
    a: Matrix,
    b: Matrix,
    lambda: f64,
    s0: Matrix,
}

impl MatrixSystem {
    /// `lambda = None` selects `s(A) + 1`.
    pub fn new(a: Matrix, b: Matrix, s0: Matrix, lambda: Option<f64>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.shape() != (n, n) || s0.nrows() != n {
            return Err(Error::InvalidArgument(format!(
                "shapes A {:?}, B {:?}, S0 {:?} are inconsistent",
                a.shape(),
                b.shape(),
                s0.shape()
            )));
        }
        if n == 0 || n > MAX_DIM || s0.ncols() == 0 || s0.ncols() > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "dimensions must lie in 1..={MAX_DIM}"
            )));
        }
        if !is_metzler(&a) {
            return Err(Error::NotPositive(
                "A is not Metzler (negative off-diagonal entry)".into(),
            ));
        }
        if !is_nonnegative(&b) {
            return Err(Error::NotPositive("B has a negative entry".into()));
        }
        let s_a = spectral_abscissa(&a)?;
        let lambda = match lambda {
            Some(l) => l,
            None => s_a + 1.0,
        };
        if !(lambda > s_a) {
            return Err(Error::InvalidArgument(format!(
                "λ = {lambda} must exceed s(A) = {s_a}"
            )));
        }
        if min_entry(&resolvent(&a, lambda)?) < -POSITIVITY_TOL {
            return Err(Error::NotPositive(format!(
                "(λI − A)⁻¹ has a negative entry at λ = {lambda}"
            )));
        }
        Ok(MatrixSystem { a, b, lambda, s0 })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn s0(&self) -> &Matrix {
        &self.s0
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.a.nrows(), self.s0.ncols())
    }

    /// `(λI − A)⁻¹ B`.
    pub fn rb(&self) -> Matrix {
        resolvent(&self.a, self.lambda).expect("checked at construction") * &self.b
    }

    /// `‖(λI − A)⁻¹ B‖_∞`.
    pub fn smallness(&self) -> f64 {
        norm_inf(&self.rb())
    }

    /// `e^{t(A+B)} S0`.
    pub fn oracle(&self, t: f64) -> Result<Matrix> {
        Ok(expm(&(&self.a + &self.b), t)? * &self.s0)
    }
}

/// Random Metzler instance: off-diagonal entries in `[0, 1/n)`, diagonal in
/// `[-2, -1)`, `B ≥ 0` rescaled so that `‖(λI − A)⁻¹B‖_∞ = target`, and
/// `S0` with entries in `[0, 1)`.
pub fn random_system<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    target: f64,
) -> Result<MatrixSystem> {
    let off = 1.0 / n as f64;
    let a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.random_range(-2.0..-1.0)
        } else {
            rng.random_range(0.0..off)
        }
    });
    let b = Matrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
    let s0 = Matrix::from_fn(n, m, |_, _| rng.random_range(0.0..1.0));
    let lambda = default_lambda(&a)?;
    let scale = target / norm_inf(&(resolvent(&a, lambda)? * &b));
    MatrixSystem::new(a, b * scale, s0, Some(lambda))
}

// ------------------------------------------------------ series

/// Operators `E(s_i)` of a semigroup on the grid `s_i = i·h`, `i = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSemigroup {
    pub h: f64,
    pub values: Vec<Matrix>,
}

impl GridSemigroup {
    /// `e^{s_i A}` by powers of `e^{hA}`.
    pub fn from_generator(a: &Matrix, h: f64, steps: usize) -> Result<Self> {
        let e = expm(a, h)?;
        let n = a.nrows();
        let mut values = Vec::with_capacity(steps + 1);
        values.push(Matrix::identity(n, n));
        for i in 0..steps {
            let next = &values[i] * &e;
            values.push(next);
        }
        Ok(GridSemigroup { h, values })
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }
}

/// Grid steps and width for `[0, t]` at [`PANELS_PER_UNIT_TIME`].
pub fn time_grid(t: f64) -> (usize, f64) {
    let steps = ((t * PANELS_PER_UNIT_TIME as f64) * (1.0 - 1e-12))
        .ceil()
        .max(2.0) as usize;
    (steps, t / steps as f64)
}

/// `Σ_{n≤N} Vₙ(s_i)` on the grid together with per-term diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPath {
    pub sum: Vec<Matrix>,
    /// `max_i max |Vₙ(s_i)|`.
    pub term_sup: Vec<f64>,
    /// `min_i min Vₙ(s_i)`.
    pub term_min: Vec<f64>,
}

/// `V₀(s) = E(s)S0`, `Vₙ(s) = ∫₀^s E(s − r) B Vₙ₋₁(r) dr`.
///
/// `Vₙ(s_{i+2}) = E(2h)Vₙ(s_i) + ∫_{s_i}^{s_{i+2}} …` with Simpson on each
/// pair of panels; the odd chain starts from a three-point rule on `[0, h]`
/// that needs `E(−h) = E(h)⁻¹`.
pub fn series_on_grid(
    base: &GridSemigroup,
    b: &Matrix,
    s0: &Matrix,
    terms: usize,
    exec: Execution,
) -> Result<SeriesPath> {
    let steps = base.steps();
    if steps < 2 {
        return Err(Error::InvalidArgument(
            "series grid needs at least two steps".into(),
        ));
    }
    let h = base.h;
    let e1 = &base.values[1];
    let e2 = &base.values[2];
    let em1 = e1
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("E(h) is not invertible".into()))?;

    let mut prev: Vec<Matrix> = exec.map(&base.values, |e| e * s0);
    let mut sum = prev.clone();
    let sup_min = |v: &[Matrix]| {
        v.iter().fold((0.0f64, f64::INFINITY), |(s, m), x| {
            (s.max(max_entry(x)), m.min(min_entry(x)))
        })
    };
    let (s, m) = sup_min(&prev);
    let mut term_sup = vec![s];
    let mut term_min = vec![m];

    for _ in 0..terms {
        let w: Vec<Matrix> = exec.map(&prev, |v| b * v);
        let ew: Vec<Matrix> = exec.map(&w, |v| e1 * v);
        let mut cur = vec![Matrix::zeros(s0.nrows(), s0.ncols()); steps + 1];
        cur[1] = (&ew[0] * (5.0 / 12.0) + &w[1] * (8.0 / 12.0) - (&em1 * &w[2]) * (1.0 / 12.0)) * h;
        let mut carry = Matrix::zeros(s0.nrows(), s0.ncols());
        for i in 0..=steps - 2 {
            carry.copy_from(&cur[i]);
            carry.zip_apply(&w[i], |c, x| *c += h / 3.0 * x);
            let next = &mut cur[i + 2];
            next.gemm(1.0, e2, &carry, 0.0);
            next.zip_zip_apply(&ew[i + 1], &w[i + 2], |v, e, x| {
                *v += 4.0 * h / 3.0 * e + h / 3.0 * x
            });
        }
        let (s, m) = sup_min(&cur);
        term_sup.push(s);
        term_min.push(m);
        for (acc, v) in sum.iter_mut().zip(&cur) {
            *acc += v;
        }
        prev = cur;
    }
    Ok(SeriesPath {
        sum,
        term_sup,
        term_min,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpResult {
    pub t: f64,
    /// `Σ_{n≤N} Vₙ(t)`.
    pub value: Matrix,
    /// `e^{t(A+B)} S0`.
    pub oracle: Matrix,
    /// Max-entry distance between `value` and `oracle`.
    pub oracle_error: f64,
    /// Minimum entry of `value` and of every term over the grid.
    pub min_entry: f64,
    pub term_sup: Vec<f64>,
    pub smallness: f64,
}

/// Dyson–Phillips series for the implemented semigroup with `N = terms`.
///
/// Refuses when `‖(λI − A)⁻¹B‖_∞ ≥ 1`; [`staged_corollary`] covers that case.
pub fn dp_implemented(
    sys: &MatrixSystem,
    t: f64,
    terms: usize,
    exec: Execution,
) -> Result<DpResult> {
    let smallness = sys.smallness();
    if smallness >= 1.0 {
        return Err(Error::Smallness {
            bound: smallness,
            detail: "‖(λI − A)⁻¹B‖∞ ≥ 1; use the staged construction".into(),
        });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    let (steps, h) = time_grid(t);
    let base = GridSemigroup::from_generator(&sys.a, h, steps)?;
    let path = series_on_grid(&base, &sys.b, &sys.s0, terms, exec)?;
    let value = path.sum[steps].clone();
    let oracle = sys.oracle(t)?;
    let min_term = path.term_min.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DpResult {
        t,
        oracle_error: max_entry(&(&value - &oracle)),
        min_entry: min_entry(&value).min(min_term),
        value,
        oracle,
        term_sup: path.term_sup,
        smallness,
    })
}

/// [`dp_implemented`] at several times. Times that are whole multiples of
/// `1/PANELS_PER_UNIT_TIME` share one series path up to the largest of them
/// and yield the same values as separate calls; other times run separately.
/// `min_entry` and `term_sup` cover the shared path.
pub fn dp_implemented_at(
    sys: &MatrixSystem,
    times: &[f64],
    terms: usize,
    exec: Execution,
) -> Result<Vec<DpResult>> {
    let smallness = sys.smallness();
    if smallness >= 1.0 {
        return Err(Error::Smallness {
            bound: smallness,
            detail: "‖(λI − A)⁻¹B‖∞ ≥ 1; use the staged construction".into(),
        });
    }
    let p = PANELS_PER_UNIT_TIME as f64;
    let on_grid = |t: f64| t > 0.0 && (t * p).fract() == 0.0 && t * p >= 2.0;
    let t_shared = times
        .iter()
        .copied()
        .filter(|&t| on_grid(t))
        .fold(0.0, f64::max);
    let shared = if t_shared > 0.0 {
        let (steps, h) = time_grid(t_shared);
        let base = GridSemigroup::from_generator(&sys.a, h, steps)?;
        Some(series_on_grid(&base, &sys.b, &sys.s0, terms, exec)?)
    } else {
        None
    };
    times
        .iter()
        .map(|&t| match &shared {
            Some(path) if on_grid(t) => {
                let value = path.sum[(t * p) as usize].clone();
                let oracle = sys.oracle(t)?;
                let min_term = path.term_min.iter().copied().fold(f64::INFINITY, f64::min);
                Ok(DpResult {
                    t,
                    oracle_error: max_entry(&(&value - &oracle)),
                    min_entry: min_entry(&value).min(min_term),
                    value,
                    oracle,
                    term_sup: path.term_sup.clone(),
                    smallness,
                })
            }
            _ => dp_implemented(sys, t, terms, exec),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageCertificate {
    pub stage: usize,
    /// `‖(λI − A_j)⁻¹ B/n‖_∞` with `A_j = A + (j−1)/n·B`.
    pub norm: f64,
    /// `R(λ, A) ≤ R(λ, A + s B) ≤ R(λ, A + B)` at `s ∈ {0, j/n, 1}`.
    pub monotone_chain: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedResult {
    pub t: f64,
    pub value: Matrix,
    pub oracle: Matrix,
    pub oracle_error: f64,
    pub min_entry: f64,
    /// `r((λI − A)⁻¹B)`.
    pub spectral_radius: f64,
    pub certificates: Vec<StageCertificate>,
}

fn chain_holds(lower: &Matrix, upper: &Matrix) -> bool {
    let scale = max_entry(upper).max(1.0);
    lower
        .iter()
        .zip(upper.iter())
        .all(|(l, u)| *l <= *u + 1e-12 * scale)
}

/// Adds `B` in `n_stages` steps of `B/n`. Stage `j` perturbs the grid
/// semigroup produced by stage `j − 1`, starting from `e^{tA}`.
pub fn staged_corollary(
    sys: &MatrixSystem,
    n_stages: usize,
    t: f64,
    terms: usize,
    exec: Execution,
) -> Result<StagedResult> {
    if n_stages == 0 {
        return Err(Error::InvalidArgument("need at least one stage".into()));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    let rho = spectral_radius(&sys.rb())?.value;
    if rho >= 1.0 {
        return Err(Error::Smallness {
            bound: rho,
            detail: "r((λI − A)⁻¹B) ≥ 1".into(),
        });
    }
    let n = sys.a.nrows();
    let nf = n_stages as f64;
    let step_b = &sys.b / nf;
    let r_lo = resolvent(&sys.a, sys.lambda)?;
    let r_hi = resolvent(&(&sys.a + &sys.b), sys.lambda)?;
    let mut certificates = Vec::with_capacity(n_stages);
    for j in 1..=n_stages {
        let aj = &sys.a + &sys.b * ((j - 1) as f64 / nf);
        let rj = resolvent(&aj, sys.lambda).map_err(|e| Error::StageCertificate {
            stage: j,
            detail: e.to_string(),
        })?;
        let norm = norm_inf(&(&rj * &step_b));
        let r_mid = resolvent(&(&sys.a + &sys.b * (j as f64 / nf)), sys.lambda).map_err(|e| {
            Error::StageCertificate {
                stage: j,
                detail: e.to_string(),
            }
        })?;
        let monotone_chain =
            is_nonnegative(&r_lo) && chain_holds(&r_lo, &r_mid) && chain_holds(&r_mid, &r_hi);
        if !(norm < 1.0) {
            return Err(Error::StageCertificate {
                stage: j,
                detail: format!("‖(λI − A_j)⁻¹B/n‖∞ = {norm} ≥ 1"),
            });
        }
        if !monotone_chain {
            return Err(Error::StageCertificate {
                stage: j,
                detail: "resolvent chain is not monotone".into(),
            });
        }
        certificates.push(StageCertificate {
            stage: j,
            norm,
            monotone_chain,
        });
    }
    // a posteriori: λ > s(A + B)
    let s_ab = spectral_abscissa(&(&sys.a + &sys.b))?;
    if !(sys.lambda > s_ab) {
        return Err(Error::StageCertificate {
            stage: n_stages,
            detail: format!("λ ≤ s(A+B) = {s_ab}"),
        });
    }

    let (steps, h) = time_grid(t);
    let mut base = GridSemigroup::from_generator(&sys.a, h, steps)?;
    let id = Matrix::identity(n, n);
    let mut min_term = f64::INFINITY;
    for _ in 0..n_stages {
        let path = series_on_grid(&base, &step_b, &id, terms, exec)?;
        min_term = path.term_min.iter().copied().fold(min_term, f64::min);
        base = GridSemigroup {
            h,
            values: path.sum,
        };
    }
    let value = &base.values[steps] * &sys.s0;
    let oracle = sys.oracle(t)?;
    Ok(StagedResult {
        t,
        oracle_error: max_entry(&(&value - &oracle)),
        min_entry: min_entry(&value).min(min_term),
        value,
        oracle,
        spectral_radius: rho,
        certificates,
    })
}
