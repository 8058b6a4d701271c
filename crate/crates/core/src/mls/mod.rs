//! The MLS engine: weights, the scaled monomial basis, local fits, shape
//! functions and their analytic derivatives.

mod basis;
mod jet;
mod model;
mod operator;
mod weight;

pub use basis::{basis_values, scaled_monomial};
pub use model::{
    assemble_gram, lambda_min, local_fit, mls_eval, mls_eval_derivative, mls_eval_operator, Bandwidth, LocalFit,
    MlsConfig, MlsModel, Normalization, ShapeDerivatives,
};
pub use operator::DifferentialOperator;
pub use weight::{weight_eval, Profile, WeightFunction, MAX_WEIGHT_DERIVATIVE};
