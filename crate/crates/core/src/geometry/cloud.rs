use super::domain::Domain;
use super::kdtree::KdTree;
use crate::error::{Error, Result};

/// Distance convention attached to a cloud.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Minimum-image distance on the unit torus [0, 1)^d.
    PeriodicUnit,
}

/// An immutable set of points in ℝ^d with a k-d tree index.
#[derive(Clone, Debug)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    metric: Metric,
    tree: KdTree,
}

impl PointCloud {
    /// Euclidean cloud from a list of points; all points must share dimension `dim`.
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::arg(format!("point {i} has dimension {}, expected {dim}", p.len())));
            }
            coords.extend_from_slice(p);
        }
        PointCloud::from_flat(dim, coords)
    }

    /// Euclidean cloud from a row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        PointCloud::with_metric(dim, coords, Metric::Euclidean)
    }

    pub fn with_metric(dim: usize, coords: Vec<f64>, metric: Metric) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("point dimension must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::arg(format!("{} coordinates do not split into {dim}-vectors", coords.len())));
        }
        if let Some(bad) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite coordinate in point {}", bad / dim)));
        }
        let tree = KdTree::build(&coords, dim);
        Ok(PointCloud { dim, coords, metric, tree })
    }

    /// Cloud owned by `domain`: every point must pass the membership test, and
    /// the periodic cube switches on minimum-image distances.
    pub fn in_domain(domain: &Domain, coords: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        let metric = if domain.is_periodic() { Metric::PeriodicUnit } else { Metric::Euclidean };
        let cloud = PointCloud::with_metric(dim, coords, metric)?;
        if let Some(i) = (0..cloud.len()).find(|&i| !domain.contains(cloud.point(i))) {
            return Err(Error::domain(format!("point {i} {:?} lies outside the domain", cloud.point(i))));
        }
        Ok(cloud)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Distance between two coordinate vectors under this cloud's metric.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.metric {
            Metric::Euclidean => super::euclidean(a, b),
            Metric::PeriodicUnit => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let mut d = (x - y).abs();
                    d -= d.floor();
                    let d = d.min(1.0 - d);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// `to − from`, taking the minimum image on the periodic cube.
    pub fn displacement(&self, from: &[f64], to: &[f64]) -> Vec<f64> {
        match self.metric {
            Metric::Euclidean => to.iter().zip(from).map(|(t, f)| t - f).collect(),
            Metric::PeriodicUnit => to
                .iter()
                .zip(from)
                .map(|(t, f)| {
                    let d = t - f;
                    d - d.round()
                })
                .collect(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::arg(format!("query has dimension {}, cloud has {}", x.len(), self.dim)));
        }
        Ok(())
    }

    /// Indices `i` with `dist(x_i, center) ≤ radius`, ascending.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Result<Vec<usize>> {
        self.check_dim(center)?;
        if !(radius >= 0.0) {
            return Err(Error::arg(format!("radius must be nonnegative, got {radius}")));
        }
        let mut out = Vec::new();
        match self.metric {
            Metric::Euclidean => self.tree.within(&self.coords, center, radius, &mut out),
            Metric::PeriodicUnit => {
                if radius >= 0.5 {
                    out.extend((0..self.len()).filter(|&i| self.distance(self.point(i), center) <= radius));
                } else {
                    for shift in image_shifts(self.dim) {
                        let c: Vec<f64> = center.iter().zip(&shift).map(|(a, s)| a + s).collect();
                        self.tree.within(&self.coords, &c, radius, &mut out);
                    }
                    out.sort_unstable();
                    out.dedup();
                    // images can land a hair inside the radius after the shift; recheck with the metric
                    out.retain(|&i| self.distance(self.point(i), center) <= radius);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Nearest sample to `query` (lowest index on ties), with its distance.
    pub fn nearest(&self, query: &[f64]) -> Result<Option<(usize, f64)>> {
        self.check_dim(query)?;
        Ok(self.nearest_excluding(query, None))
    }

    pub(crate) fn nearest_excluding(&self, query: &[f64], exclude: Option<usize>) -> Option<(usize, f64)> {
        match self.metric {
            Metric::Euclidean => self.tree.nearest(&self.coords, query, exclude).map(|(i, d2)| (i, d2.sqrt())),
            Metric::PeriodicUnit => {
                let mut best: Option<(usize, f64)> = None;
                for shift in image_shifts(self.dim) {
                    let q: Vec<f64> = query.iter().zip(&shift).map(|(a, s)| a + s).collect();
                    if let Some((i, d2)) = self.tree.nearest(&self.coords, &q, exclude) {
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d2 < bd || (d2 == bd && i < bi),
                        };
                        if better {
                            best = Some((i, d2));
                        }
                    }
                }
                best.map(|(i, d2)| (i, d2.sqrt()))
            }
        }
    }
}

/// All shifts in {-1, 0, 1}^d, zero shift first.
fn image_shifts(dim: usize) -> Vec<Vec<f64>> {
    let mut shifts = vec![vec![]];
    for _ in 0..dim {
        shifts = shifts
            .into_iter()
            .flat_map(|s: Vec<f64>| {
                [0.0, -1.0, 1.0].into_iter().map(move |v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    shifts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_flat(1, xs.to_vec()).unwrap()
    }

    fn brute(cloud: &PointCloud, c: &[f64], r: f64) -> Vec<usize> {
        (0..cloud.len()).filter(|&i| cloud.distance(cloud.point(i), c) <= r).collect()
    }

    #[test]
    fn range_query_examples() {
        let cloud = line(&[0.0, 0.3, 1.0]);
        assert_eq!(cloud.range_query(&[0.0], 0.5).unwrap(), vec![0, 1]);
        let cloud = line(&[0.9, 0.2, 0.4, 0.7, 0.1]);
        assert_eq!(cloud.range_query(&[0.7], 0.0).unwrap(), vec![3]);
    }

    #[test]
    fn range_query_rejects_bad_input() {
        let cloud = line(&[0.0, 1.0]);
        assert!(matches!(cloud.range_query(&[0.0, 0.0], 0.1), Err(Error::Argument(_))));
        assert!(cloud.range_query(&[0.0], -1.0).is_err());
    }

    #[test]
    fn membership_enforced() {
        let d = Domain::unit_cube(1).unwrap();
        assert!(PointCloud::in_domain(&d, vec![0.5, 1.5]).is_err());
        assert!(PointCloud::from_flat(2, vec![0.0, 1.0, 2.0]).is_err());
        assert!(PointCloud::from_flat(1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn periodic_wraps_around() {
        let d = Domain::periodic_cube(1).unwrap();
        let cloud = PointCloud::in_domain(&d, vec![0.02, 0.5, 0.97]).unwrap();
        assert_eq!(cloud.range_query(&[0.0], 0.05).unwrap(), vec![0, 2]);
        let (i, dist) = cloud.nearest(&[0.99]).unwrap().unwrap();
        assert_eq!(i, 2);
        assert!((dist - 0.02).abs() < 1e-12);
        let (i, _) = cloud.nearest(&[0.005]).unwrap().unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn nearest_ties_go_to_lowest_index() {
        let cloud = line(&[1.0, -1.0, 1.0]);
        assert_eq!(cloud.nearest(&[0.0]).unwrap().unwrap().0, 0);
    }

    proptest! {
        #[test]
        fn range_query_matches_brute_force(
            pts in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 2), 1..500),
            cx in -0.2f64..1.2, cy in -0.2f64..1.2, r in 0.0f64..0.6,
        ) {
            let cloud = PointCloud::new(2, &pts).unwrap();
            prop_assert_eq!(cloud.range_query(&[cx, cy], r).unwrap(), brute(&cloud, &[cx, cy], r));
        }

        #[test]
        fn periodic_range_query_matches_brute_force(
            pts in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 2), 1..300),
            cx in 0.0f64..1.0, cy in 0.0f64..1.0, r in 0.0f64..0.7,
        ) {
            let d = Domain::periodic_cube(2).unwrap();
            let flat: Vec<f64> = pts.concat();
            let cloud = PointCloud::in_domain(&d, flat).unwrap();
            prop_assert_eq!(cloud.range_query(&[cx, cy], r).unwrap(), brute(&cloud, &[cx, cy], r));
        }

        #[test]
        fn nearest_matches_brute_force(
            pts in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 1..300),
            q in proptest::collection::vec(-1.5f64..1.5, 3),
        ) {
            let cloud = PointCloud::new(3, &pts).unwrap();
            let (i, d) = cloud.nearest(&q).unwrap().unwrap();
            let best = (0..cloud.len())
                .map(|j| cloud.distance(cloud.point(j), &q))
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(d, best);
            prop_assert_eq!(cloud.distance(cloud.point(i), &q), best);
        }
    }
}
