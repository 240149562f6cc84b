//! Real-space topology diagnostics for finite tight-binding lattices.
//!
//! The crate builds Hamiltonians on finite samples, extracts gapped spectral
//! projectors, evaluates the local Chern marker and its large-box limit,
//! constructs generalized Wannier bases from compressed position operators
//! and measures how well localized those bases are.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chern;
pub mod dichotomy;
pub mod error;
pub mod fit;
pub mod gallery;
pub mod gwb;
pub mod lattice;
pub mod linalg;
pub mod pipeline;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
