use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::basis::basis_values;
use super::jet::JetSpace;
use super::operator::DifferentialOperator;
use super::weight::{Profile, WeightFunction, MAX_WEIGHT_DERIVATIVE};
use crate::error::{Error, Result};
use crate::geometry::{enumerate_multi_indices, MultiIndex, PointCloud};

/// How the bandwidth `h` is chosen when the model is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// `h = c_d · (ln n / n)^{1/d}`.
    Rate {
        c_d: f64,
    },
}

impl Bandwidth {
    pub fn resolve(&self, n: usize, dim: usize) -> Result<f64> {
        let h = match *self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Rate { c_d } => {
                if n < 2 {
                    return Err(Error::arg("the rate bandwidth needs at least two samples"));
                }
                let n = n as f64;
                c_d * (n.ln() / n).powf(1.0 / dim as f64)
            }
        };
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::arg(format!("resolved bandwidth must be positive, got {h}")));
        }
        Ok(h)
    }
}

/// Scaling of the Gram matrix: plain sum, or divided by the neighbor count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    PerCount,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MlsConfig {
    pub degree: usize,
    pub profile: Profile,
    pub support_scale: f64,
    pub bandwidth: Bandwidth,
    pub normalization: Normalization,
    /// Ridge `τ` added to the Gram matrix only when it falls below the floor.
    pub ridge: f64,
    pub lambda_floor: f64,
}

impl Default for MlsConfig {
    fn default() -> Self {
        MlsConfig {
            degree: 2,
            profile: Profile::SmoothBump,
            support_scale: 1.0,
            bandwidth: Bandwidth::Rate { c_d: 1.5 },
            normalization: Normalization::PerCount,
            ridge: 0.0,
            lambda_floor: 1e-10,
        }
    }
}

/// Scattered data `(x_i, f(x_i))` plus everything needed to evaluate the
/// MLS approximant. Immutable once built.
#[derive(Clone, Debug)]
pub struct MlsModel {
    cloud: PointCloud,
    values: Vec<f64>,
    config: MlsConfig,
    weight: WeightFunction,
    basis: Vec<MultiIndex>,
}

/// The local weighted least-squares problem at a query point.
#[derive(Clone, Debug)]
pub struct LocalFit {
    pub query: Vec<f64>,
    pub neighbor_indices: Vec<usize>,
    pub gram: DMatrix<f64>,
    pub eta: DVector<f64>,
    pub lambda_min: f64,
    pub shape_values: Vec<f64>,
    /// Whether the ridge fallback was used.
    pub regularized: bool,
}

/// Shape-function derivatives `∂^α a_i*(x̂)` for all `|α| ≤ order`.
#[derive(Clone, Debug)]
pub struct ShapeDerivatives {
    pub fit: LocalFit,
    /// Multi-indices in graded order; `values[k][j]` is `∂^{indices[k]} a_j*`
    /// for the `j`-th neighbor.
    pub indices: Vec<MultiIndex>,
    pub values: Vec<Vec<f64>>,
}

impl ShapeDerivatives {
    pub fn get(&self, alpha: &MultiIndex) -> Option<&[f64]> {
        self.indices.iter().position(|m| m == alpha).map(|k| self.values[k].as_slice())
    }

    /// `Σ_j ∂^α a_j* f_j` for values indexed like the model's cloud.
    pub fn apply(&self, alpha: &MultiIndex, values: &[f64]) -> Option<f64> {
        let d = self.get(alpha)?;
        Some(self.fit.neighbor_indices.iter().zip(d).map(|(&i, a)| a * values[i]).sum())
    }
}

struct Neighborhood {
    indices: Vec<usize>,
    offsets: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
    norm: f64,
}

impl MlsModel {
    pub fn new(cloud: PointCloud, values: Vec<f64>, config: MlsConfig) -> Result<Self> {
        if values.len() != cloud.len() {
            return Err(Error::arg(format!("{} values for {} points", values.len(), cloud.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("values must be finite"));
        }
        if cloud.is_empty() {
            return Err(Error::domain("cannot fit an empty cloud"));
        }
        if !(config.ridge >= 0.0 && config.lambda_floor >= 0.0) {
            return Err(Error::arg("ridge and lambda floor must be nonnegative"));
        }
        let h = config.bandwidth.resolve(cloud.len(), cloud.dim())?;
        let weight = WeightFunction::new(config.profile, config.support_scale, h)?;
        let basis = enumerate_multi_indices(cloud.dim(), config.degree);
        Ok(MlsModel { cloud, values, config, weight, basis })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn config(&self) -> &MlsConfig {
        &self.config
    }

    pub fn degree(&self) -> usize {
        self.config.degree
    }

    pub fn bandwidth(&self) -> f64 {
        self.weight.bandwidth
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// Multi-indices of the basis in graded order.
    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    /// Same points and settings with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.cloud.len() {
            return Err(Error::arg(format!("{} values for {} points", values.len(), self.cloud.len())));
        }
        Ok(MlsModel { values, ..self.clone() })
    }

    fn neighborhood(&self, x: &[f64]) -> Result<Neighborhood> {
        let indices = self.cloud.range_query(x, self.weight.radius())?;
        if indices.is_empty() {
            return Err(Error::InsufficientData { found: 0, needed: self.basis.len() });
        }
        let h = self.weight.bandwidth;
        let offsets: Vec<Vec<f64>> = indices.iter().map(|&i| self.cloud.displacement(x, self.cloud.point(i))).collect();
        let basis = offsets.iter().map(|o| basis_values(&self.basis, o, h)).collect();
        let norm = match self.config.normalization {
            Normalization::Raw => 1.0,
            Normalization::PerCount => 1.0 / indices.len() as f64,
        };
        Ok(Neighborhood { indices, offsets, basis, norm })
    }

    fn gram_from(&self, nb: &Neighborhood, weights: &[f64]) -> DMatrix<f64> {
        let m = self.basis.len();
        let mut g = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let s: f64 = nb.basis.iter().zip(weights).map(|(p, w)| w * p[a] * p[b]).sum();
                g[(a, b)] = nb.norm * s;
                g[(b, a)] = g[(a, b)];
            }
        }
        g
    }

    /// The Gram matrix at `x` and the (ascending) neighbor indices in its support.
    pub fn assemble_gram(&self, x: &[f64]) -> Result<(DMatrix<f64>, Vec<usize>)> {
        let nb = self.neighborhood(x)?;
        let weights: Vec<f64> = nb.offsets.iter().map(|o| self.weight.value(o)).collect();
        Ok((self.gram_from(&nb, &weights), nb.indices))
    }

    fn solve(&self, x: &[f64]) -> Result<(Neighborhood, Solver, LocalFit)> {
        let nb = self.neighborhood(x)?;
        let m = self.basis.len();
        if nb.indices.len() < m {
            return Err(Error::InsufficientData { found: nb.indices.len(), needed: m });
        }
        let weights: Vec<f64> = nb.offsets.iter().map(|o| self.weight.value(o)).collect();
        let gram = self.gram_from(&nb, &weights);
        let eigen = SymmetricEigen::new(gram.clone());
        let lmin = eigen.eigenvalues.min();
        let mut regularized = false;
        let solver = if lmin >= self.config.lambda_floor && lmin > 0.0 {
            Solver::new(eigen, 0.0)
        } else if self.config.ridge > 0.0 {
            regularized = true;
            Solver::new(eigen, self.config.ridge)
        } else {
            return Err(Error::IllConditioned { lambda_min: lmin, neighbors: nb.indices.len() });
        };
        let mut rhs = DVector::zeros(m);
        rhs[0] = 1.0;
        let eta = solver.solve(&rhs);
        let shape_values = nb
            .basis
            .iter()
            .zip(&weights)
            .map(|(p, w)| nb.norm * w * p.iter().zip(eta.iter()).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let fit = LocalFit {
            query: x.to_vec(),
            neighbor_indices: nb.indices.clone(),
            gram,
            eta,
            lambda_min: lmin,
            shape_values,
            regularized,
        };
        Ok((nb, solver, fit))
    }

    pub fn local_fit(&self, x: &[f64]) -> Result<LocalFit> {
        self.solve(x).map(|(_, _, fit)| fit)
    }

    /// `s(x) = Σ_i a_i*(x) f(x_i)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let fit = self.local_fit(x)?;
        Ok(fit.neighbor_indices.iter().zip(&fit.shape_values).map(|(&i, a)| a * self.values[i]).sum())
    }

    /// Analytic derivatives of every shape function for all `|α| ≤ order`.
    ///
    /// The basis stays centred at `x` while the evaluation point moves, so
    /// `∂^ζ p(x) = ζ!/h^{|ζ|} e_ζ`; the neighbor count is locally constant and
    /// drops out of the shape values anyway.
    pub fn shape_derivatives(&self, x: &[f64], order: usize) -> Result<ShapeDerivatives> {
        if order > self.config.degree {
            return Err(Error::arg(format!("derivative order {order} exceeds the fit degree {}", self.config.degree)));
        }
        if order > MAX_WEIGHT_DERIVATIVE {
            return Err(Error::arg(format!("derivatives above order {MAX_WEIGHT_DERIVATIVE} are not supported")));
        }
        let (nb, solver, fit) = self.solve(x)?;
        let d = self.cloud.dim();
        let h = self.weight.bandwidth;
        let space = JetSpace::new(d, order);
        let targets = space.indices.clone();
        let m = self.basis.len();

        // W[i][γ] = ∂_x^γ θ(x_i − x) = (−1)^{|γ|} (∂^γ θ)(x_i − x)
        let w: Vec<Vec<f64>> = nb
            .offsets
            .iter()
            .map(|o| {
                let mut jet = self.weight.jet_in(&space, o, order);
                for (v, g) in jet.iter_mut().zip(&targets) {
                    if g.order() % 2 == 1 {
                        *v = -*v;
                    }
                }
                jet
            })
            .collect();

        let grams: Vec<DMatrix<f64>> = (0..targets.len())
            .map(|k| {
                if k == 0 {
                    fit.gram.clone()
                } else {
                    let col: Vec<f64> = w.iter().map(|wi| wi[k]).collect();
                    self.gram_from(&nb, &col)
                }
            })
            .collect();

        let mut etas: Vec<DVector<f64>> = Vec::with_capacity(targets.len());
        for alpha in &targets {
            let mut rhs = DVector::zeros(m);
            if let Some(pos) = self.basis.iter().position(|b| b == alpha) {
                rhs[pos] = alpha.factorial() / h.powi(alpha.order() as i32);
            }
            for (z, zeta) in targets.iter().enumerate() {
                if zeta == alpha || !zeta.le(alpha) {
                    continue;
                }
                let diff = alpha.checked_sub(zeta).unwrap();
                let k = targets.iter().position(|t| *t == diff).unwrap();
                rhs -= alpha.binomial(zeta) * (&grams[k] * &etas[z]);
            }
            etas.push(solver.solve(&rhs));
        }

        // p_i · ∂^ζ η for each neighbor and ζ
        let dots: Vec<Vec<f64>> = nb
            .basis
            .iter()
            .map(|p| etas.iter().map(|e| p.iter().zip(e.iter()).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let values = targets
            .iter()
            .map(|alpha| {
                (0..nb.indices.len())
                    .map(|i| {
                        let mut s = 0.0;
                        for (z, zeta) in targets.iter().enumerate() {
                            if let Some(diff) = alpha.checked_sub(zeta) {
                                let k = targets.iter().position(|t| *t == diff).unwrap();
                                s += alpha.binomial(zeta) * w[i][k] * dots[i][z];
                            }
                        }
                        nb.norm * s
                    })
                    .collect()
            })
            .collect();
        Ok(ShapeDerivatives { fit, indices: targets, values })
    }

    /// `∂^α s(x)`.
    pub fn eval_derivative(&self, x: &[f64], alpha: &MultiIndex) -> Result<f64> {
        if alpha.dim() != self.cloud.dim() {
            return Err(Error::arg("multi-index dimension does not match the cloud"));
        }
        let sd = self.shape_derivatives(x, alpha.order())?;
        Ok(sd.apply(alpha, &self.values).expect("alpha is within the computed order"))
    }

    /// `(Q s)(x) = Σ_α q_α ∂^α s(x)`.
    pub fn eval_operator(&self, x: &[f64], q: &DifferentialOperator) -> Result<f64> {
        if q.dim() != self.cloud.dim() {
            return Err(Error::arg("operator dimension does not match the cloud"));
        }
        let max = q.terms().iter().map(|(m, _)| m.order()).max().unwrap_or(0);
        let sd = self.shape_derivatives(x, max)?;
        Ok(q.terms().iter().map(|(m, c)| c * sd.apply(m, &self.values).unwrap()).sum())
    }
}

/// Solves against `A + τI` using a precomputed eigendecomposition of `A`.
struct Solver {
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    shift: f64,
}

impl Solver {
    fn new(eigen: SymmetricEigen<f64, nalgebra::Dyn>, shift: f64) -> Self {
        Solver { eigen, shift }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let v = &self.eigen.eigenvectors;
        let mut coef = v.transpose() * rhs;
        for (c, l) in coef.iter_mut().zip(self.eigen.eigenvalues.iter()) {
            *c /= l + self.shift;
        }
        v * coef
    }
}

pub fn assemble_gram(model: &MlsModel, x: &[f64]) -> Result<(DMatrix<f64>, Vec<usize>)> {
    model.assemble_gram(x)
}

pub fn local_fit(model: &MlsModel, x: &[f64]) -> Result<LocalFit> {
    model.local_fit(x)
}

pub fn mls_eval(model: &MlsModel, x: &[f64]) -> Result<f64> {
    model.eval(x)
}

pub fn mls_eval_derivative(model: &MlsModel, x: &[f64], alpha: &MultiIndex) -> Result<f64> {
    model.eval_derivative(x, alpha)
}

pub fn mls_eval_operator(model: &MlsModel, x: &[f64], q: &DifferentialOperator) -> Result<f64> {
    model.eval_operator(x, q)
}

/// Smallest eigenvalue of the symmetric part of `gram`.
pub fn lambda_min(gram: &DMatrix<f64>) -> f64 {
    if gram.nrows() == 1 && gram.ncols() == 1 {
        return gram[(0, 0)];
    }
    let sym = (gram + gram.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}
