// SPDX-License-Identifier: Apache-2.0

//! Numerical toolkit for positive Desch–Schappacher perturbations of
//! bi-continuous semigroups.
//!
//! Two concrete instances are covered:
//!
//! * the left-translation semigroup on bounded continuous functions on the
//!   line, perturbed by the rank-one operator `B f = (∫ f dμ) · χ_[1,∞)`
//!   (modules [`funcspace`], [`measures`], [`specfun`], [`transgroup`],
//!   [`dsperturb`]);
//! * the left-implemented semigroup `U(t)S = e^{tA} S` on `n × m` matrices,
//!   perturbed by `S ↦ B S` (module [`matrixlab`]).
//!
//! In both cases the perturbed semigroup is built from its Dyson–Phillips
//! series and checked against an independent oracle.

// `!(x > 0.0)` is the idiom for rejecting NaN alongside non-positive input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsperturb;
pub mod error;
pub mod exec;
pub mod funcspace;
pub mod matrixlab;
pub mod measures;
pub mod quad;
pub mod specfun;
pub mod transgroup;

pub use error::{Error, Result};
pub use exec::Execution;
