// SPDX-License-Identifier: Apache-2.0

//! Finitely parameterized bounded regular Borel measures on ℝ: signed atoms
//! plus piecewise-constant densities.
//!
//! Literal syntax (used by the CLI configuration):
//!
//! ```text
//! 0.4*delta(0) + 0.1*uniform(0,1) - 0.05*delta(3)
//! ```
//!
//! `w*delta(x)` is an atom of weight `w` at `x`; `w*uniform(a,b)` spreads mass
//! `w` uniformly over `[a, b]` (height `w / (b - a)`). A missing weight means
//! `1`, and the literal `0` is the zero measure.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::funcspace::{BoundedFunction, CompactWindow};
use crate::quad::simpson_split;

/// Simpson panels per density piece used by [`RegularMeasure::integrate`].
pub const DEFAULT_PANELS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Constant density `height` on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub height: f64,
}

impl DensityPiece {
    pub fn mass(&self) -> f64 {
        self.height * (self.b - self.a)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegularMeasure {
    atoms: Vec<Atom>,
    densities: Vec<DensityPiece>,
    panels: usize,
}

/// Length of `[lo, hi] ∩ [a, b]`.
fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

impl RegularMeasure {
    pub fn new(atoms: Vec<Atom>, densities: Vec<DensityPiece>) -> Result<Self> {
        for a in &atoms {
            if !a.location.is_finite() || !a.weight.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite atom {a:?}")));
            }
        }
        for d in &densities {
            if !(d.a < d.b) || !d.a.is_finite() || !d.b.is_finite() || !d.height.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "density piece needs finite a < b, got {d:?}"
                )));
            }
        }
        Ok(RegularMeasure {
            atoms,
            densities,
            panels: DEFAULT_PANELS,
        })
    }

    pub fn zero() -> Self {
        RegularMeasure {
            panels: DEFAULT_PANELS,
            ..Default::default()
        }
    }

    /// `weight · δ_location`.
    pub fn dirac(location: f64, weight: f64) -> Self {
        Self::new(vec![Atom { location, weight }], Vec::new()).expect("finite atom")
    }

    /// Constant density `height` on `[a, b]`.
    pub fn density(a: f64, b: f64, height: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![DensityPiece { a, b, height }])
    }

    /// Sum of two measures.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.atoms.extend_from_slice(&other.atoms);
        out.densities.extend_from_slice(&other.densities);
        out
    }

    /// Simpson panel count per density piece used by [`Self::integrate`].
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(2);
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    /// `μ ≥ 0`: every atom weight and density height is nonnegative.
    pub fn is_positive(&self) -> bool {
        self.atoms.iter().all(|a| a.weight >= 0.0) && self.densities.iter().all(|d| d.height >= 0.0)
    }

    /// `|μ|(ℝ)`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum::<f64>()
            + self.densities.iter().map(|d| d.mass().abs()).sum::<f64>()
    }

    /// `|μ|(ℝ \ K)`.
    pub fn tail_mass(&self, k: &CompactWindow) -> f64 {
        self.total_variation() - self.variation_in(k)
    }

    /// `|μ|(K)`.
    pub fn variation_in(&self, k: &CompactWindow) -> f64 {
        self.atoms
            .iter()
            .filter(|a| k.contains(a.location))
            .map(|a| a.weight.abs())
            .sum::<f64>()
            + self
                .densities
                .iter()
                .map(|d| d.height.abs() * overlap(d.a, d.b, k.a(), k.b()))
                .sum::<f64>()
    }

    /// `μ([c, ∞))`, atoms at `c` included.
    pub fn upper_tail(&self, c: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location >= c)
            .map(|a| a.weight)
            .sum::<f64>()
            + self
                .densities
                .iter()
                .map(|d| d.height * overlap(d.a, d.b, c, f64::INFINITY))
                .sum::<f64>()
    }

    /// `∫ f dμ`, exact on atoms, composite Simpson on density pieces split at
    /// the breakpoints of `f`.
    pub fn integrate(&self, f: &BoundedFunction) -> f64 {
        let breaks = if self.densities.is_empty() {
            Vec::new()
        } else {
            f.breakpoints()
        };
        self.integrate_fn(|x| f.eval(x), &breaks)
    }

    /// `∫ f dμ` for a plain closure with known kinks.
    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * f(a.location)).sum();
        let dens: f64 = self
            .densities
            .iter()
            .map(|d| d.height * simpson_split(&f, d.a, d.b, breaks, self.panels, 2))
            .sum();
        atoms + dens
    }

    /// Iterated integrals of the shifted tail kernel `k(r) = μ([θ - r, ∞))`:
    /// `order = 0` gives `k(r)`, `order = 1` gives `∫₀^r k`, `order = 2`
    /// gives `∫₀^r ∫₀^ρ k`. Closed form, valid for `r ≥ 0`.
    pub fn tail_kernel_primitive(&self, threshold: f64, r: f64, order: u32) -> f64 {
        let fact = |q: u32| (1..=q).map(f64::from).product::<f64>();
        let ramp = |u: f64, q: u32| -> f64 {
            if q == 0 {
                if u >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                u.max(0.0).powi(q as i32) / fact(q)
            }
        };
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * ramp(r - (threshold - a.location).max(0.0), order))
            .sum();
        let dens: f64 = self
            .densities
            .iter()
            .map(|d| {
                // mass at y ≥ θ is active from ρ = 0
                let always = overlap(d.a, d.b, threshold, f64::INFINITY) * ramp(r, order);
                // mass at y < θ is active once ρ ≥ θ - y
                let hi = d.b.min(threshold);
                let delayed = if hi > d.a {
                    ramp(r - threshold + hi, order + 1) - ramp(r - threshold + d.a, order + 1)
                } else {
                    0.0
                };
                d.height * (always + delayed)
            })
            .sum();
        atoms + dens
    }
}

impl fmt::Display for RegularMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .atoms
            .iter()
            .map(|a| (a.weight, format!("delta({:?})", a.location)))
            .chain(
                self.densities
                    .iter()
                    .map(|d| (d.mass(), format!("uniform({:?},{:?})", d.a, d.b))),
            );
        let mut first = true;
        for (w, body) in terms {
            let sign = match (first, w < 0.0) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            write!(f, "{sign}{:?}*{body}", w.abs())?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for RegularMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LiteralParser { src: s, pos: 0 }.parse()
    }
}

struct LiteralParser<'a> {
    src: &'a str,
    pos: usize,
}

impl LiteralParser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() {
            let c = bytes[end] as char;
            let sign_ok = (c == '-' || c == '+')
                && (end == start || matches!(bytes[end - 1] as char, 'e' | 'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || sign_ok {
                end += 1;
            } else {
                break;
            }
        }
        match self.src[start..end].parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(v)
            }
            _ => self.err("expected a number"),
        }
    }

    /// Returns the start offset and the identifier.
    fn ident(&mut self) -> (usize, String) {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        (start, self.src[start..self.pos].to_owned())
    }

    fn parse(mut self) -> Result<RegularMeasure> {
        let mut atoms = Vec::new();
        let mut densities = Vec::new();
        self.skip_ws();
        if self.src[self.pos..].trim() == "0" {
            return Ok(RegularMeasure::zero());
        }
        let mut sign = if self.eat('-') { -1.0 } else { 1.0 };
        loop {
            self.skip_ws();
            let weight = if self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                let w = self.number()?;
                self.expect('*')?;
                w
            } else {
                1.0
            } * sign;
            let (name_col, name) = self.ident();
            match name.as_str() {
                "delta" => {
                    self.expect('(')?;
                    let location = self.number()?;
                    self.expect(')')?;
                    atoms.push(Atom { location, weight });
                }
                "uniform" => {
                    self.expect('(')?;
                    let a = self.number()?;
                    self.expect(',')?;
                    let b = self.number()?;
                    self.expect(')')?;
                    if !(a < b) {
                        return self.err(format!("uniform({a},{b}) needs a < b"));
                    }
                    densities.push(DensityPiece {
                        a,
                        b,
                        height: weight / (b - a),
                    });
                }
                other => {
                    self.pos = name_col;
                    return self.err(format!(
                        "unknown term '{other}', expected delta(..) or uniform(..)"
                    ));
                }
            }
            self.skip_ws();
            if self.pos == self.src.len() {
                break;
            }
            sign = if self.eat('+') {
                1.0
            } else if self.eat('-') {
                -1.0
            } else {
                return self.err("expected '+' or '-'");
            };
        }
        RegularMeasure::new(atoms, densities)
    }
}
