use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::config::MmlsConfig;
use crate::error::{Error, Result};
use crate::geometry::{enumerate_multi_indices, PointCloud};
use crate::mls::WeightFunction;

/// A local affine frame `q + span(E)`.
#[derive(Clone, Debug)]
pub struct LocalFrame {
    pub origin: Vec<f64>,
    /// D×d with orthonormal columns.
    pub basis: DMatrix<f64>,
    /// The frame objective at the returned frame.
    pub residual: f64,
    pub iterations: usize,
    /// Objective after each accepted iteration (nonincreasing).
    pub history: Vec<f64>,
    /// Samples in the support ball around the origin.
    pub neighbors: usize,
}

impl LocalFrame {
    /// A frame given directly, e.g. a known tangent plane.
    pub fn new(origin: Vec<f64>, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != origin.len() || basis.ncols() == 0 || basis.ncols() >= origin.len() {
            return Err(Error::arg("frame basis must be D×d with 0 < d < D"));
        }
        let gram = basis.transpose() * &basis;
        if (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax() > 1e-12 {
            return Err(Error::arg("frame basis columns must be orthonormal"));
        }
        Ok(LocalFrame { origin, basis, residual: f64::NAN, iterations: 0, history: Vec::new(), neighbors: 0 })
    }

    /// Local coordinates `Eᵀ(p − q)`.
    pub fn coordinates(&self, p: &[f64]) -> Vec<f64> {
        let diff = DVector::from_iterator(p.len(), p.iter().zip(&self.origin).map(|(a, b)| a - b));
        (self.basis.transpose() * diff).iter().copied().collect()
    }
}

pub(crate) struct FrameContext<'a> {
    pub cloud: &'a PointCloud,
    pub cfg: &'a MmlsConfig,
    pub h: f64,
    pub mu: f64,
    pub weight: WeightFunction,
}

fn sub(a: &[f64], b: &[f64]) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x - y))
}

impl FrameContext<'_> {
    fn neighbors(&self, q: &[f64]) -> Result<Vec<(DVector<f64>, f64)>> {
        let idx = self.cloud.range_query(q, self.weight.radius())?;
        Ok(idx
            .into_iter()
            .map(|i| {
                let diff = sub(self.cloud.point(i), q);
                let w = self.weight.value(diff.as_slice());
                (diff, w)
            })
            .collect())
    }

    fn objective(&self, q: &[f64], e: &DMatrix<f64>) -> Result<f64> {
        Ok(self
            .neighbors(q)?
            .iter()
            .map(|(diff, w)| {
                let normal = diff - e * (e.transpose() * diff);
                w * normal.norm_squared()
            })
            .sum())
    }

    /// Top-d eigenvectors of the weighted second moment about `q`, with the
    /// first clearly nonzero entry of each made positive.
    fn plane(&self, q: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let big_d = q.len();
        let nb = self.neighbors(q)?;
        let mut cov = DMatrix::zeros(big_d, big_d);
        let mut mean = DVector::zeros(big_d);
        let mut total = 0.0;
        for (diff, w) in &nb {
            cov += *w * diff * diff.transpose();
            mean += *w * diff;
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::Infeasible("no sample carries positive weight near the frame origin".into()));
        }
        cov = (&cov + cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..big_d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let d = self.cfg.intrinsic_dim;
        let mut e = DMatrix::zeros(big_d, d);
        for (c, &k) in order.iter().take(d).enumerate() {
            let mut v = eig.eigenvectors.column(k).into_owned();
            let scale = v.amax();
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
                if *first < 0.0 {
                    v = -v;
                }
            }
            e.set_column(c, &v);
        }
        let m = DVector::from_column_slice(q) + mean / total;
        Ok((e, m))
    }

    /// `q = r + (I − EEᵀ)(m − r)`, clamped to `‖q − r‖ ≤ μ`. The normal
    /// component is projected twice so `Eᵀ(q − r)` is at rounding level
    /// relative to `‖q − r‖` rather than to `‖m − r‖`.
    fn origin(&self, r: &[f64], e: &DMatrix<f64>, m: &DVector<f64>) -> Vec<f64> {
        let mut u = m - DVector::from_column_slice(r);
        for _ in 0..2 {
            let t = e.transpose() * &u;
            u -= e * t;
        }
        let len = u.norm();
        if len > self.mu {
            u *= self.mu / len;
        }
        r.iter().zip(u.iter()).map(|(a, b)| a + b).collect()
    }

    pub fn find(&self, r: &[f64]) -> Result<LocalFrame> {
        if r.len() != self.cloud.dim() {
            return Err(Error::arg("query dimension does not match the cloud"));
        }
        let Some((nearest, dist)) = self.cloud.nearest(r)? else {
            return Err(Error::Infeasible("empty cloud".into()));
        };
        if dist > self.mu {
            return Err(Error::Infeasible(format!("nearest sample is {dist:e} away, beyond mu = {:e}", self.mu)));
        }
        let q0 = self.cloud.point(nearest).to_vec();
        let (mut e, m) = self.plane(&q0)?;
        let mut q = self.origin(r, &e, &m);
        let mut j = self.objective(&q, &e)?;
        let mut history = vec![j];
        let mut iterations = 0;
        let mut converged = false;
        let mut last_move = f64::INFINITY;
        while iterations < self.cfg.max_iterations {
            iterations += 1;
            let (e_new, m_new) = match self.plane(&q) {
                Ok(v) => v,
                Err(_) => break,
            };
            let q_new = self.origin(r, &e_new, &m_new);
            let j_new = self.objective(&q_new, &e_new)?;
            // keep the last frame when a step would not decrease the objective
            if j_new > j {
                converged = true;
                break;
            }
            last_move = sub(&q_new, &q).norm();
            q = q_new;
            e = e_new;
            j = j_new;
            history.push(j);
            if last_move <= self.cfg.tolerance * self.h {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { iterations, residual: last_move });
        }
        let needed = enumerate_multi_indices(self.cfg.intrinsic_dim, self.cfg.degree).len();
        let neighbors = self.cloud.range_query(&q, self.weight.radius())?.len();
        if neighbors < needed {
            return Err(Error::Infeasible(format!(
                "{neighbors} samples near the frame origin, {needed} needed for the local fit"
            )));
        }
        Ok(LocalFrame { origin: q, basis: e, residual: j, iterations, history, neighbors })
    }
}

/// Minimises the frame objective `Σ_i d(r_i − q, H)² θ₁(r_i − q)` subject to
/// `r − q ⊥ H` and `‖r − q‖ ≤ μ` by alternating weighted plane fits and
/// origin updates, starting from the sample nearest to `r`.
pub fn find_local_frame(r: &[f64], cloud: &PointCloud, cfg: &MmlsConfig) -> Result<LocalFrame> {
    if cloud.dim() != cfg.ambient_dim {
        return Err(Error::arg("cloud dimension differs from the configured ambient dimension"));
    }
    let (h, mu, weight) = cfg.resolve(cloud.len())?;
    FrameContext { cloud, cfg, h, mu, weight }.find(r)
}
