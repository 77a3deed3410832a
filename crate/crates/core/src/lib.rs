//! Deep Operator Network laboratory.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense feed-forward networks over a flat parameter vector, exact
//!   reverse-mode gradients and an Adam optimizer.
//! - [`deeponet`]: the branch/trunk model `h(s, p) = <Branch(s), Trunk(p)>`, its
//!   empirical risk and gradients, training, checkpoints and weight-Lipschitz
//!   constants.
//! - [`datagen`]: Gaussian random field forcings, the advection-diffusion-reaction
//!   and forced-pendulum reference solvers, dataset assembly and CSV I/O.
//! - [`bounds`]: covering numbers, the data-dependent lower bounds on the shared
//!   output dimension `q`, and Monte Carlo / brute-force verifiers.
//! - [`scaling`]: fixed-ratio `(q, n)` experiment plans, architecture sizing,
//!   training cells, suites and monotonicity verdicts.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod datagen;
pub mod deeponet;
mod error;
pub mod nn;
pub mod rng;
pub mod scaling;

pub use error::{Error, Result};
