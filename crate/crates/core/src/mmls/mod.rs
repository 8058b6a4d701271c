//! Manifold MLS: a local affine frame from a weighted plane fit, a local
//! vector-valued polynomial over that frame, and the projection given by the
//! polynomial's value at the frame origin.

mod config;
mod fit;
mod frame;
mod project;

pub use config::MmlsConfig;
pub use fit::{local_poly_fit, VectorPolynomial};
pub use frame::{find_local_frame, LocalFrame};
pub use project::{
    mmls_project, mmls_rate_experiment, reconstruct_manifold, MmlsProjector, MmlsRatePlan, ProbeDiagnostic,
    Reconstruction,
};
