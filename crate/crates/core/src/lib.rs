//! Moving least squares (MLS) approximation of scattered data, with analytic
//! derivatives of the approximant, a manifold-MLS projector, and a harness of
//! seeded experiments that measure how MLS behaves under i.i.d. random
//! sampling: fill distance, separation, neighbor counts, conditioning of the
//! local moment matrix, derivative error decay and manifold reconstruction
//! error.
//!
//! Modules, bottom-up:
//!
//! - [`geometry`]: domains, point clouds with a k-d tree, multi-indices, and
//!   the set statistics (fill distance, separation, Hausdorff distance).
//! - [`sampling`]: reproducible samplers for bounded-ratio densities on
//!   domains and for reference manifolds.
//! - [`mls`]: weight functions, the scaled monomial basis, local fits,
//!   shape functions and their derivatives.
//! - [`lab`]: rate experiments and log-log slope fits.
//! - [`mmls`]: local frames, local vector-valued polynomial fits, and the
//!   manifold projection.

pub mod error;
pub mod geometry;
pub mod lab;
pub mod mls;
pub mod mmls;
pub mod sampling;

pub use error::{Error, Result};
