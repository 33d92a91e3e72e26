//! Continuous majorization of Wigner functions.
//!
//! Gaussian criteria, majorization proposals for Wigner-negative states,
//! Gaussian channels with their convolution kernels, and negativity monotones.
#![no_std]

// Modules import `num_traits::Float` for libm-backed math; when another
// dependency links std, the inherent methods win and the import goes unused.

extern crate alloc;

pub mod channels;
pub mod error;
pub mod gaussian_algebra;
pub mod majorization;
pub mod negativity;
pub mod phase_space;
pub mod quadrature;
pub mod symplectic;
pub mod tolerance;
pub mod verdict;

pub use error::{Error, Result};
pub use tolerance::ToleranceConfig;
pub use verdict::{MajorizationVerdict, MarginCurve, Proposal, Relation};
