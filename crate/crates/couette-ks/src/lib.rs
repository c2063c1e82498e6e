//! Keller-Segel chemotaxis in a background Couette shear.
//!
//! The crate bundles closed-form kernels and envelopes ([`kernels`]), an
//! exact-propagator pseudo-spectral solver ([`solver`]), a quadrature reference
//! implementation of the Duhamel representation ([`oracle`]), a numerical
//! verifier for the pointwise estimates ([`lemma_lab`]) and experiment drivers
//! ([`experiments`]).

// Domain checks are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod kernels;
pub mod lemma_lab;
pub mod oracle;
pub mod quad;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
