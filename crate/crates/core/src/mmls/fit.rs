use nalgebra::{DMatrix, SymmetricEigen};

use super::config::MmlsConfig;
use super::frame::LocalFrame;
use crate::error::{Error, Result};
use crate::geometry::{enumerate_multi_indices, MultiIndex, PointCloud};
use crate::mls::{basis_values, WeightFunction};

/// A map from local frame coordinates to ℝ^D, one coefficient vector per
/// output coordinate over the scaled monomial basis.
#[derive(Clone, Debug)]
pub struct VectorPolynomial {
    pub indices: Vec<MultiIndex>,
    pub h: f64,
    /// `coefficients[j][α]` for output coordinate `j`.
    pub coefficients: Vec<Vec<f64>>,
    /// Weighted squared residual of the fit.
    pub residual: f64,
    pub lambda_min: f64,
}

impl VectorPolynomial {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let p = basis_values(&self.indices, x, self.h);
        self.coefficients.iter().map(|c| c.iter().zip(&p).map(|(a, b)| a * b).sum()).collect()
    }

    /// Value at the local origin: the constant coefficients.
    pub fn at_origin(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c[0]).collect()
    }
}

pub(crate) fn fit_in_frame(
    frame: &LocalFrame,
    cloud: &PointCloud,
    cfg: &MmlsConfig,
    h: f64,
    weight: &WeightFunction,
) -> Result<VectorPolynomial> {
    let big_d = cloud.dim();
    let indices = enumerate_multi_indices(cfg.intrinsic_dim, cfg.degree);
    let m = indices.len();
    let rows: Vec<(Vec<f64>, f64, usize)> = cloud
        .range_query(&frame.origin, weight.radius())?
        .into_iter()
        .filter_map(|i| {
            let x = frame.coordinates(cloud.point(i));
            let w = weight.value(&x);
            (w > 0.0).then(|| (basis_values(&indices, &x, h), w, i))
        })
        .collect();
    if rows.len() < m {
        return Err(Error::InsufficientData { found: rows.len(), needed: m });
    }
    let norm = 1.0 / rows.len() as f64;
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, big_d);
    for (p, w, i) in &rows {
        for a in 0..m {
            for b in a..m {
                gram[(a, b)] += norm * w * p[a] * p[b];
            }
            for (j, r) in cloud.point(*i).iter().enumerate() {
                rhs[(a, j)] += norm * w * p[a] * r;
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let eig = SymmetricEigen::new(gram);
    let lambda_min = eig.eigenvalues.min();
    if !(lambda_min >= cfg.lambda_floor && lambda_min > 0.0) {
        return Err(Error::IllConditioned { lambda_min, neighbors: rows.len() });
    }
    let v = &eig.eigenvectors;
    let mut t: DMatrix<f64> = v.transpose() * rhs;
    for (a, l) in eig.eigenvalues.iter().enumerate() {
        t.row_mut(a).scale_mut(1.0 / l);
    }
    let coef: DMatrix<f64> = v * t;
    let coefficients: Vec<Vec<f64>> = (0..big_d).map(|j| coef.column(j).iter().copied().collect()).collect();
    let poly = VectorPolynomial { indices, h, coefficients, residual: 0.0, lambda_min };
    let residual = rows
        .iter()
        .map(|(p, w, i)| {
            let fitted: Vec<f64> =
                poly.coefficients.iter().map(|c| c.iter().zip(p).map(|(a, b)| a * b).sum()).collect();
            w * crate::geometry::squared_euclidean(&fitted, cloud.point(*i))
        })
        .sum();
    Ok(VectorPolynomial { residual, ..poly })
}

/// Weighted least-squares fit of `x_i = Eᵀ(r_i − q) ↦ r_i` over samples near
/// the frame origin, with weights `θ₂(x_i)`.
pub fn local_poly_fit(frame: &LocalFrame, cloud: &PointCloud, cfg: &MmlsConfig) -> Result<VectorPolynomial> {
    if cloud.dim() != cfg.ambient_dim || frame.basis.ncols() != cfg.intrinsic_dim {
        return Err(Error::arg("frame, cloud and configuration dimensions disagree"));
    }
    let (h, _, weight) = cfg.resolve(cloud.len())?;
    fit_in_frame(frame, cloud, cfg, h, &weight)
}
