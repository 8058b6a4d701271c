//! Truncated multivariate Taylor polynomials, used to push derivatives of a
//! radial profile through `ρ(t) = ‖t‖² / R²`.

use crate::geometry::{enumerate_multi_indices, MultiIndex};

/// The monomials of total degree ≤ `order` in `dim` variables and the
/// product table between them.
#[derive(Clone, Debug)]
pub(crate) struct JetSpace {
    pub indices: Vec<MultiIndex>,
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn new(dim: usize, order: usize) -> Self {
        let indices = enumerate_multi_indices(dim, order);
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let sum = a.add(b);
                if sum.order() <= order {
                    let k = indices.iter().position(|c| *c == sum).expect("closed under truncation");
                    products.push((i, j, k));
                }
            }
        }
        JetSpace { indices, products }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for &(i, j, k) in &self.products {
            out[k] += a[i] * b[j];
        }
        out
    }

    /// Jet of `ρ(t + ε) − ρ(t)` in ε, with `ρ(t) = ‖t‖² / r2`.
    pub fn radial_increment(&self, t: &[f64], r2: f64) -> Vec<f64> {
        self.indices
            .iter()
            .map(|m| match m.order() {
                1 => {
                    let j = m.entries().iter().position(|&e| e == 1).unwrap();
                    2.0 * t[j] / r2
                }
                2 if m.entries().contains(&2) => 1.0 / r2,
                _ => 0.0,
            })
            .collect()
    }

    /// Jet of `φ(ρ₀ + δ)` given `φ^{(m)}(ρ₀)` for m = 0..=order and the jet δ
    /// (which has zero constant term). Coefficients are Taylor coefficients.
    pub fn compose(&self, derivs: &[f64], delta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let mut power = vec![0.0; self.len()];
        power[0] = 1.0;
        let mut fact = 1.0;
        for (m, d) in derivs.iter().enumerate() {
            if m > 0 {
                power = self.mul(&power, delta);
                fact *= m as f64;
            }
            for (o, p) in out.iter_mut().zip(&power) {
                *o += d / fact * p;
            }
        }
        out
    }
}
