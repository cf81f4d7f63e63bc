//! Radial spherical Fourier analysis on Damek-Ricci spaces and on real
//! hyperbolic 3-space.
//!
//! The crate evaluates spherical functions, the Harish-Chandra c-function,
//! the forward and inverse spherical transforms, Sobolev norms and the
//! Schrödinger propagator, and runs the maximal-function experiments built on
//! top of them.

// `!(x > 0.0)` is used on purpose so that NaN fails validation; reference
// constants keep all the digits they were computed with.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod experiments;
pub mod h3;
pub mod ode;
pub mod quadrature;
pub mod space;
pub mod specfun;
pub mod spherical;
pub mod transform;

pub use error::{Error, Result};
pub use space::{SpaceKind, SpaceParams};
