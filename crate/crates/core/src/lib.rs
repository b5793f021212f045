//! Quantum effective potential of a particle on a warped product
//! `ds² = dx² + b(x)² g̃`: geometry and potentials, classical and quantum
//! evolution of the full and reduced problems, Ehrenfest diagnostics, and a
//! reducibility test for sampled metrics.

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod comparison;
pub mod config;
pub mod ehrenfest;
pub mod error;
pub mod geometry;
pub mod potentials;
pub mod quantum;
pub mod reducibility;
pub mod spline;
pub mod tridiag;

pub use error::{Error, Result};
