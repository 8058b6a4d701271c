use crate::geometry::{Domain, DomainShape};

/// Tensor grid of cell centres `(k + ½)/m` on each axis of the bounding box,
/// kept if the point lies in the domain. All points sit at least `1/(2m)`
/// (relative to the box) away from the box faces.
pub fn interior_probes(domain: &Domain, m: usize) -> Vec<Vec<f64>> {
    let d = domain.dim();
    let m = m.max(1);
    let (lo, hi) = domain.bounding_box();
    let total = m.pow(d as u32);
    (0..total)
        .filter_map(|flat| {
            let mut rem = flat;
            let mut p = vec![0.0; d];
            for j in (0..d).rev() {
                let k = rem % m;
                rem /= m;
                p[j] = lo[j] + (hi[j] - lo[j]) * (k as f64 + 0.5) / m as f64;
            }
            domain.contains(&p).then_some(p)
        })
        .collect()
}

/// Designated boundary probes: cube corners, the two poles of a ball on the
/// first axis; none for the periodic cube.
pub fn boundary_probes(domain: &Domain) -> Vec<Vec<f64>> {
    let d = domain.dim();
    match domain.shape() {
        DomainShape::UnitCube => {
            (0..1usize << d).map(|bits| (0..d).map(|j| ((bits >> j) & 1) as f64).collect()).collect()
        }
        DomainShape::Ball { radius } => {
            let mut a = vec![0.0; d];
            a[0] = radius;
            let mut b = vec![0.0; d];
            b[0] = -radius;
            vec![a, b]
        }
        DomainShape::PeriodicCube => Vec::new(),
    }
}
