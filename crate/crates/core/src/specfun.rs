// SPDX-License-Identifier: Apache-2.0

//! Integer-order incomplete Gamma function `Γ(n+1, x) = n! e^{-x} Σ_{m≤n} x^m/m!`
//! and the gap `Γ(n+1) − Γ(n+1, 1)`.
//!
//! `n!` is never formed in floating point: the finite sum is accumulated in
//! a mantissa/exponent representation and the gap comes from its convergent
//! tail series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative stopping threshold for tail series.
pub const TAIL_RTOL: f64 = 1e-18;

/// `mantissa · 2^exponent` with `mantissa ∈ [0.5, 1)` (or zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub exponent: i64,
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue {
        mantissa: 0.0,
        exponent: 0,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 || !v.is_finite() {
            return ScaledValue {
                mantissa: v,
                exponent: 0,
            };
        }
        let (m, e) = frexp(v);
        ScaledValue {
            mantissa: m,
            exponent: e,
        }
    }

    /// `e^{ln_value}` without overflow.
    pub fn from_ln(ln_value: f64) -> Self {
        let e2 = (ln_value / std::f64::consts::LN_2).floor();
        let rest = ln_value - e2 * std::f64::consts::LN_2;
        let mut s = Self::from_f64(rest.exp());
        s.exponent += e2 as i64;
        s
    }

    fn normalized(mantissa: f64, exponent: i64) -> Self {
        let mut s = Self::from_f64(mantissa);
        if s.mantissa != 0.0 {
            s.exponent += exponent;
        }
        s
    }

    pub fn scale(self, k: f64) -> Self {
        Self::normalized(self.mantissa * k, self.exponent)
    }

    /// Plain value; `±inf` or `0` when out of range.
    pub fn to_f64(self) -> f64 {
        if self.exponent > 1100 {
            return self.mantissa.signum() * f64::INFINITY;
        }
        if self.exponent < -1100 {
            return 0.0;
        }
        ldexp(self.mantissa, self.exponent)
    }

    pub fn ln(self) -> f64 {
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
    }
}

impl std::ops::Mul for ScaledValue {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::normalized(
            self.mantissa * other.mantissa,
            self.exponent + other.exponent,
        )
    }
}

impl std::ops::Add for ScaledValue {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.mantissa == 0.0 {
            return other;
        }
        if other.mantissa == 0.0 {
            return self;
        }
        let (hi, lo) = if self.exponent >= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        let d = lo.exponent - hi.exponent;
        let lo_m = if d < -1100 {
            0.0
        } else {
            ldexp(lo.mantissa, d)
        };
        Self::normalized(hi.mantissa + lo_m, hi.exponent)
    }
}

fn frexp(v: f64) -> (f64, i64) {
    let bits = v.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    if exp_bits == 0 {
        // subnormal
        let (m, e) = frexp(v * 2f64.powi(64));
        return (m, e - 64);
    }
    let e = exp_bits - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, e)
}

fn ldexp(m: f64, e: i64) -> f64 {
    // split so the intermediate power of two never overflows on its own
    let e = e.clamp(-2200, 2200) as i32;
    let half = e / 2;
    m * 2f64.powi(half) * 2f64.powi(e - half)
}

/// `Γ(n+1, x)` for integer `n ≥ 0` and `x ≥ 0`, in scaled form.
///
/// Uses `P_n(x) = Σ_{m≤n} x^m n!/m!` via `P_n = x^n + n P_{n-1}`, so the
/// value at `x = 0` is `n!` exactly whenever `n!` is representable.
pub fn incomplete_gamma_int(n: u32, x: f64) -> Result<ScaledValue> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "incomplete Gamma needs finite x >= 0, got {x}"
        )));
    }
    let mut p = ScaledValue::from_f64(1.0);
    let mut xm = ScaledValue::from_f64(1.0);
    for m in 1..=n {
        xm = xm.scale(x);
        p = xm + p.scale(f64::from(m));
    }
    Ok(if x == 0.0 {
        p
    } else {
        p * ScaledValue::from_ln(-x)
    })
}

/// Plain-valued convenience wrapper around [`incomplete_gamma_int`].
pub fn incomplete_gamma_int_f64(n: u32, x: f64) -> Result<f64> {
    incomplete_gamma_int(n, x).map(ScaledValue::to_f64)
}

/// `e^x γ(n+1, x) = n! Σ_{m>n} x^m/m! = Σ_{k≥1} x^{n+k} / ((n+1)(n+2)⋯(n+k))`,
/// the scaled lower incomplete Gamma function, for `x ≥ 0`.
pub fn lower_gamma_scaled(n: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    let nf = f64::from(n);
    // x^{n+1} · Σ_{k≥1} x^{k-1} / ((n+1)⋯(n+k))
    let lead = ScaledValue::from_ln((nf + 1.0) * x.ln());
    let mut term = 1.0 / (nf + 1.0);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        k += 1.0;
        let ratio = x / (nf + k);
        term *= ratio;
        sum += term;
        if ratio < 1.0 && term < TAIL_RTOL * sum {
            break;
        }
    }
    lead.scale(sum).to_f64()
}

/// `Γ(n+1) − Γ(n+1, 1) = e^{-1} Σ_{k≥1} 1/((n+1)⋯(n+k))`.
pub fn gamma_gap(n: u32) -> f64 {
    (-1f64).exp() * lower_gamma_scaled(n, 1.0)
}

/// A value of [`gamma_gap`] tagged with its index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGapValue {
    pub n: u32,
    pub value: f64,
}

impl GammaGapValue {
    pub fn new(n: u32) -> Self {
        GammaGapValue {
            n,
            value: gamma_gap(n),
        }
    }
}

/// Outcome of checking `Γ(n+1) − Γ(n+1, 1) = n! − ⌊e·n!⌋/e` in exact
/// rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorIdentityReport {
    pub n: u32,
    /// Left side, from the tail series.
    pub gap: f64,
    /// `⌊e·n!⌋`.
    pub floor_e_factorial: BigInt,
    /// `Σ_{m≤n} n!/m!`, which equals `⌊e·n!⌋` for `n ≥ 1`.
    pub partial_sum: BigInt,
    /// Right side `n! − ⌊e·n!⌋/e`.
    pub rhs: f64,
    /// `|gap − rhs| / |rhs|`.
    pub relative_residual: f64,
    pub holds: bool,
}

/// Relative tolerance of the floor identity check.
pub const FLOOR_IDENTITY_RTOL: f64 = 1e-10;

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `e` as a rational with absolute error below `1 / (terms · terms!)`.
fn euler_rational(terms: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut inv_fact = BigRational::one();
    for m in 0..=terms {
        if m > 0 {
            inv_fact /= BigRational::from_integer(BigInt::from(m));
        }
        sum += &inv_fact;
    }
    sum
}

/// Verifies the floor identity for one `n`. Fails at `n = 0`, where
/// `⌊e⌋ = 2` but `Σ_{m≤0} 0!/m! = 1`; the report then carries the
/// discrepancy.
pub fn gamma_gap_floor_identity_check(n: u32) -> FloorIdentityReport {
    let e = euler_rational(n + 60);
    let nf = factorial(n);
    let e_nf = BigRational::from_integer(nf.clone()) * &e;
    let floor_e_factorial = e_nf.floor().to_integer();
    let partial_sum = (0..=n).fold(BigInt::zero(), |acc, m| acc + &nf / factorial(m));
    let rhs_exact =
        BigRational::from_integer(nf) - BigRational::from_integer(floor_e_factorial.clone()) / &e;
    let rhs = rhs_exact.to_f64().unwrap_or(f64::NAN);
    let gap = gamma_gap(n);
    let relative_residual = (gap - rhs).abs() / rhs.abs();
    FloorIdentityReport {
        n,
        gap,
        holds: relative_residual <= FLOOR_IDENTITY_RTOL && floor_e_factorial == partial_sum,
        floor_e_factorial,
        partial_sum,
        rhs,
        relative_residual,
    }
}
