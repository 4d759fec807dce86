//! Eigenvalue statistics for products of truncated Haar-unitary random
//! matrices.
//!
//! The crate provides three layers:
//!
//! * exact finite-N objects — the one-point weight, the determinantal
//!   kernel, level density and k-point correlation functions
//!   ([`weights`], [`kernel`]);
//! * the large-N limiting densities and kernels in the strong and weak
//!   non-unitarity regimes, with the special functions they need
//!   ([`asymptotics`]);
//! * a Monte Carlo sampler of the actual matrix ensemble plus a
//!   verification harness that compares empirical spectra against the
//!   analytic formulas with statistical tests ([`sampler`], [`harness`]).
//!
//! Batch sampling is data parallel over RNG streams (rayon, behind the
//! default `parallel` feature, with a sequential fallback).

pub mod asymptotics;
pub mod defaults;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod logspace;
pub mod params;
pub mod quad;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use params::EnsembleParams;
