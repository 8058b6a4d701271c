use rayon::prelude::*;

use super::cloud::PointCloud;
use super::domain::{Domain, DomainShape};
use crate::error::{Error, Result};

/// Deterministic candidate grid used to approximate the fill distance.
///
/// A tensor grid with `resolution` nodes per axis over the bounding box,
/// endpoints included, filtered by domain membership. The periodic cube uses
/// `resolution` nodes at spacing `1/resolution` (the far face is the near one).
pub fn candidate_grid(domain: &Domain, resolution: usize) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(Error::arg(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let d = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let axis: Vec<Vec<f64>> = (0..d)
        .map(|j| match domain.shape() {
            DomainShape::PeriodicCube => (0..resolution).map(|k| k as f64 / resolution as f64).collect(),
            _ => (0..resolution).map(|k| lo[j] + (hi[j] - lo[j]) * k as f64 / (resolution - 1) as f64).collect(),
        })
        .collect();
    let total = resolution.checked_pow(d as u32).ok_or_else(|| Error::arg("candidate grid too large"))?;
    let mut out = Vec::with_capacity(total * d);
    let mut point = vec![0.0; d];
    for flat in 0..total {
        let mut rem = flat;
        for j in (0..d).rev() {
            point[j] = axis[j][rem % resolution];
            rem /= resolution;
        }
        if let DomainShape::Ball { radius } = domain.shape() {
            let r2: f64 = point.iter().map(|v| v * v).sum();
            if r2 > radius * radius {
                continue;
            }
        }
        out.extend_from_slice(&point);
    }
    Ok(out)
}

/// Fill distance `sup_{x∈Ω} min_i ‖x − x_i‖`, approximated from below by the
/// maximum over [`candidate_grid`]. The grid error is at most the diameter of
/// one grid cell.
pub fn fill_distance(cloud: &PointCloud, domain: &Domain, resolution: usize) -> Result<f64> {
    if cloud.dim() != domain.dim() {
        return Err(Error::arg("cloud and domain dimensions differ"));
    }
    let grid = candidate_grid(domain, resolution)?;
    fill_distance_over(cloud, &grid)
}

/// Max over the candidate points in `candidates` (row-major) of the distance
/// to the nearest cloud point.
pub fn fill_distance_over(cloud: &PointCloud, candidates: &[f64]) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::domain("fill distance of an empty cloud"));
    }
    let d = cloud.dim();
    if !candidates.len().is_multiple_of(d) {
        return Err(Error::arg("candidate buffer does not match cloud dimension"));
    }
    Ok(candidates
        .par_chunks_exact(d)
        .map(|g| cloud.nearest_excluding(g, None).map_or(0.0, |(_, dist)| dist))
        .reduce(|| 0.0, f64::max))
}

/// Separation `min_{i<j} dist(x_i, x_j)`, via one nearest-neighbor query per point.
pub fn separation(cloud: &PointCloud) -> Result<f64> {
    if cloud.len() < 2 {
        return Err(Error::domain("separation needs at least two points"));
    }
    Ok((0..cloud.len())
        .into_par_iter()
        .map(|i| cloud.nearest_excluding(cloud.point(i), Some(i)).map_or(f64::INFINITY, |(_, d)| d))
        .reduce(|| f64::INFINITY, f64::min))
}

/// Symmetric Hausdorff distance between two clouds in the same ambient space.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("Hausdorff distance of an empty cloud"));
    }
    if a.dim() != b.dim() {
        return Err(Error::arg(format!("ambient dimensions differ: {} vs {}", a.dim(), b.dim())));
    }
    let one_sided = |from: &PointCloud, to: &PointCloud| {
        from.coords()
            .par_chunks_exact(from.dim())
            .map(|p| to.nearest_excluding(p, None).map_or(0.0, |(_, d)| d))
            .reduce(|| 0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}
