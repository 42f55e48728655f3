//! Simulation and estimation toolkit for unstable INAR(2) integer-valued
//! time series.
//!
//! An INAR(2) process evolves as
//!
//! ```text
//! X_k = alpha ∘ X_{k-1} + beta ∘ X_{k-2} + eps_k,      X_0 = X_{-1} = 0,
//! ```
//!
//! where `∘` is binomial thinning (each of the counted individuals
//! survives independently with the given probability) and `eps_k` are
//! i.i.d. nonnegative integer innovations with known mean. The process is
//! *unstable* when `alpha + beta = 1`. This crate focuses on the two
//! nonprimitive unstable corners:
//!
//! * `(alpha, beta) = (1, 0)`: the path is a drifted random walk
//!   `X_k = eps_1 + ... + eps_k`.
//! * `(alpha, beta) = (0, 1)`: the even- and odd-indexed observations
//!   form two independent drifted random walks that interleave.
//!
//! The central object is the closed-form conditional least squares
//! estimator of `(alpha, beta)` with the innovation mean treated as a
//! known quantity ([`cls`]). The [`montecarlo`] module verifies its limit
//! laws by simulation: a degenerate two-dimensional Gaussian along the
//! line `x + y = 0` at rate `sqrt(n)` in the `(1, 0)` case, and a
//! Dickey–Fuller-type functional of Brownian motion at rate `n` in the
//! `(0, 1)` case. Almost-sure scaling limits of the design matrix are
//! exposed through [`cls::det_scaling`], [`cls::sum_sq_scaling`] and
//! [`cls::building_blocks`].
//!
//! Everything is deterministic given a master seed: replications use
//! independent, order-independent RNG streams, so serial and parallel
//! runs produce bit-identical results.

pub mod cli;
pub mod cls;
mod error;
pub mod innovations;
pub mod limit_laws;
pub mod montecarlo;
pub mod process;

pub use error::{Error, Result};
