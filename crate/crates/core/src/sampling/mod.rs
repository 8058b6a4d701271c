//! Reproducible i.i.d. samplers: bounded-ratio densities on domains and the
//! uniform (area) measure on reference manifolds.

mod density;
mod manifold;
mod rng;

pub use density::{sample_iid, sample_iid_with, Density, DensityKind, MIN_ACCEPTANCE};
pub use manifold::{sample_manifold, ManifoldKind, ManifoldSample, ReferenceManifold};
pub use rng::{derive_rng, derive_seed, SampleRng};
