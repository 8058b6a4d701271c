//! Domains, point clouds with a spatial index, multi-indices, and the
//! geometric statistics of point sets.

mod cloud;
mod domain;
pub mod io;
mod kdtree;
mod multi_index;
mod stats;

pub use cloud::{Metric, PointCloud};
pub use domain::{unit_ball_volume, ConeCondition, Domain, DomainShape};
pub use kdtree::KdTree;
pub use multi_index::{enumerate_multi_indices, MultiIndex};
pub use stats::{candidate_grid, fill_distance, fill_distance_over, hausdorff_distance, separation};

/// Euclidean distance between two equal-length slices.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
