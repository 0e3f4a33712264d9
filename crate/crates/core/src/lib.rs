//! Numerical one-sided fractional calculus.
//!
//! The core object is the left-sided Marchaud derivative
//! `D^a u(t) = a/Gamma(1-a) * int_0^inf (u(t) - u(t-s)) s^{-1-a} ds`,
//! the fractional power of the derivative that only looks into the past.
//! Around it sit three memory models built on the same operator:
//!
//! - [`relaxation`] and [`fitting`]: `D^a u = lambda u` with a prescribed
//!   history, solved in closed form by Mittag-Leffler functions or by
//!   time marching, and fitted to data;
//! - [`visco`]: Boltzmann superposition with a power-law relaxation modulus;
//! - [`ctrw`] and [`diffusion`]: random walks with heavy-tailed waiting
//!   times and the time-fractional diffusion equation they converge to.
//!
//! [`extension`] recovers the derivative as the weighted Neumann trace of a
//! local degenerate PDE.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ctrw;
pub mod diffusion;
pub mod error;
pub mod extension;
pub mod fitting;
pub mod frac_ops;
pub mod io;
pub mod parallel;
pub mod quad;
pub mod relaxation;
pub mod special_fn;
pub mod visco;

pub use error::{Error, Result};
