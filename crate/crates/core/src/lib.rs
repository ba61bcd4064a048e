//! Numerics for the two-parameter Bell function
//! `B(p, β) = e^{-β} Σ_k k^p β^k / k!`, the `p`-th moment of a Poisson(β)
//! variable.
//!
//! * [`series`] evaluates `B(p, β)` in log-space with a certified tail and
//!   carries the exact Stirling-number oracle.
//! * [`bounds`] holds the non-asymptotic lower and upper estimates of
//!   `B(p, β)^{1/p}` and dispatches them per regime.
//! * [`asymptotics`] has the de Bruijn expansion and the Lambert-W
//!   approximation.
//! * [`applications`] applies `B` to moment inequalities for sums of
//!   non-negative independent variables and ships enumeration and Monte
//!   Carlo oracles for them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod asymptotics;
pub mod bounds;
mod error;
mod optimize;
pub mod series;

pub use error::{BellError, Result};
pub use series::{BellQuery, EvalResult, Regime, SeriesConfig};
