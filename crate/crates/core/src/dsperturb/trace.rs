// SPDX-License-Identifier: Apache-2.0

//! Scalar time traces `φ` and their running integrals `Ψ(r) = ∫₀^r φ`.

/// Anything that can report `∫₀^r φ` for `0 ≤ r ≤ horizon`.
pub trait Cumulative: Send + Sync {
    /// `∫₀^r φ`, with `r` clamped to `[0, horizon]`.
    fn integral_to(&self, r: f64) -> f64;

    /// An upper bound for `∫₀^r |φ|`.
    fn abs_integral_to(&self, r: f64) -> f64;

    fn horizon(&self) -> f64;
}

/// `φ` sampled on the uniform grid `s_j = j·dt`, interpolated linearly.
///
/// The running integral is the exact integral of the interpolant, so it is
/// the trapezoidal rule at grid nodes and a quadratic in between.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dt: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
    abs_cumulative: Vec<f64>,
}

impl Trace {
    /// Panics when `values` is empty or `dt` is not positive.
    pub fn new(dt: f64, values: Vec<f64>) -> Self {
        assert!(
            dt > 0.0 && !values.is_empty(),
            "trace needs dt > 0 and at least one sample"
        );
        let mut cumulative = Vec::with_capacity(values.len());
        let mut abs_cumulative = Vec::with_capacity(values.len());
        let (mut acc, mut abs_acc) = (0.0, 0.0);
        cumulative.push(0.0);
        abs_cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * dt * (w[0] + w[1]);
            abs_acc += 0.5 * dt * (w[0].abs() + w[1].abs());
            cumulative.push(acc);
            abs_cumulative.push(abs_acc);
        }
        Trace {
            dt,
            values,
            cumulative,
            abs_cumulative,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |j| j as f64 * self.dt)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn locate(&self, r: f64) -> Option<(usize, f64)> {
        if self.values.len() == 1 || r <= 0.0 {
            return None;
        }
        let r = r.min(self.horizon());
        let j = ((r / self.dt).floor() as usize).min(self.values.len() - 2);
        Some((j, r - j as f64 * self.dt))
    }

    /// Linear interpolation of `φ`.
    pub fn value_at(&self, r: f64) -> f64 {
        match self.locate(r) {
            None => self.values[0],
            Some((j, u)) => self.values[j] + (self.values[j + 1] - self.values[j]) * u / self.dt,
        }
    }
}

impl Cumulative for Trace {
    fn integral_to(&self, r: f64) -> f64 {
        match self.locate(r) {
            None => 0.0,
            Some((j, u)) => {
                let (a, b) = (self.values[j], self.values[j + 1]);
                self.cumulative[j] + u * a + u * u / (2.0 * self.dt) * (b - a)
            }
        }
    }

    fn abs_integral_to(&self, r: f64) -> f64 {
        match self.locate(r) {
            None => 0.0,
            Some((j, _)) => self.abs_cumulative[j + 1],
        }
    }

    fn horizon(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }
}

/// Piecewise-constant `φ = Σ c_k 1_[α_k, β_k)` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub steps: Vec<(f64, f64, f64)>,
    pub horizon: f64,
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

impl Cumulative for StepTrace {
    fn integral_to(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.horizon);
        self.steps
            .iter()
            .map(|&(a, b, c)| c * overlap(0.0, r, a, b))
            .sum()
    }

    fn abs_integral_to(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.horizon);
        self.steps
            .iter()
            .map(|&(a, b, c)| c.abs() * overlap(0.0, r, a, b))
            .sum()
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }
}
