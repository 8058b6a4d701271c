use super::jet::JetSpace;
use crate::error::{Error, Result};
use crate::geometry::MultiIndex;

/// Highest derivative order [`weight_eval`] supports.
pub const MAX_WEIGHT_DERIVATIVE: usize = 4;

/// Radial profile `φ` applied to `ρ = ‖t‖² / (s h)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// `exp(1 / (ρ − 1))` inside the support: C^∞.
    SmoothBump,
    /// `(1 − ρ)⁴` inside the support: only C³ across the boundary.
    WendlandLike,
    /// Constant 1 inside the support. Discontinuous; kept as a negative
    /// fixture for smoothness checks and never a sensible default.
    Indicator,
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::SmoothBump => "smooth-bump",
            Profile::WendlandLike => "wendland-like",
            Profile::Indicator => "indicator",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "smooth-bump" => Ok(Profile::SmoothBump),
            "wendland-like" => Ok(Profile::WendlandLike),
            "indicator" => Ok(Profile::Indicator),
            other => Err(Error::arg(format!("unknown weight profile '{other}'"))),
        }
    }

    /// φ(ρ), φ'(ρ), ..., φ^{(order)}(ρ). All zero for ρ ≥ 1.
    fn derivatives(&self, rho: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        if rho >= 1.0 {
            return out;
        }
        match self {
            Profile::SmoothBump => {
                let v = 1.0 / (rho - 1.0);
                // e^v underflows long before the polynomial factor overflows
                if v < -700.0 {
                    return out;
                }
                let e = v.exp();
                // φ^{(m)} = P_m(v) e^v with P_{m+1} = −v² (P_m' + P_m), P_0 = 1
                let mut poly = vec![1.0];
                for slot in out.iter_mut() {
                    *slot = poly.iter().rev().fold(0.0, |acc, c| acc * v + c) * e;
                    let mut next = vec![0.0; poly.len() + 2];
                    for (k, c) in poly.iter().enumerate() {
                        next[k + 2] -= c;
                        if k > 0 {
                            next[k + 1] -= k as f64 * c;
                        }
                    }
                    poly = next;
                }
            }
            Profile::WendlandLike => {
                let u = 1.0 - rho;
                let mut coef = 1.0;
                for (m, slot) in out.iter_mut().enumerate() {
                    if m > 4 {
                        break;
                    }
                    *slot = coef * u.powi(4 - m as i32);
                    coef *= -((4 - m) as f64);
                }
            }
            Profile::Indicator => out[0] = 1.0,
        }
        out
    }
}

/// `θ_h(t) = φ(‖t‖² / (s h)²)`: a nonnegative weight supported in the ball
/// of radius `s·h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightFunction {
    pub profile: Profile,
    pub support_scale: f64,
    pub bandwidth: f64,
}

impl WeightFunction {
    pub fn new(profile: Profile, support_scale: f64, bandwidth: f64) -> Result<Self> {
        if !(support_scale > 0.0 && support_scale.is_finite()) {
            return Err(Error::arg(format!("support scale must be positive, got {support_scale}")));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::arg(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(WeightFunction { profile, support_scale, bandwidth })
    }

    pub fn radius(&self) -> f64 {
        self.support_scale * self.bandwidth
    }

    fn rho(&self, t: &[f64]) -> f64 {
        let r = self.radius();
        t.iter().map(|v| v * v).sum::<f64>() / (r * r)
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        self.profile.derivatives(self.rho(t), 0)[0]
    }

    /// All partial derivatives `∂^γ θ_h(t)` for `|γ| ≤ order`, listed in the
    /// order of `enumerate_multi_indices(t.len(), order)`.
    pub(crate) fn jet_in(&self, space: &JetSpace, t: &[f64], order: usize) -> Vec<f64> {
        let rho = self.rho(t);
        if rho >= 1.0 {
            return vec![0.0; space.len()];
        }
        let r = self.radius();
        let phi = self.profile.derivatives(rho, order);
        let delta = space.radial_increment(t, r * r);
        let mut jet = space.compose(&phi, &delta);
        for (c, m) in jet.iter_mut().zip(&space.indices) {
            *c *= m.factorial();
        }
        jet
    }

    /// `∂^deriv θ_h(t)`.
    pub fn derivative(&self, t: &[f64], deriv: &MultiIndex) -> Result<f64> {
        if deriv.dim() != t.len() {
            return Err(Error::arg("derivative multi-index dimension does not match the point"));
        }
        let order = deriv.order();
        if order > MAX_WEIGHT_DERIVATIVE {
            return Err(Error::arg(format!(
                "weight derivatives are supported up to order {MAX_WEIGHT_DERIVATIVE}, got {order}"
            )));
        }
        if order == 0 {
            return Ok(self.value(t));
        }
        let space = JetSpace::new(t.len(), order);
        let k = space.indices.iter().position(|m| m == deriv).unwrap();
        Ok(self.jet_in(&space, t, order)[k])
    }
}

/// `∂^deriv θ_h(t)` (free-function form).
pub fn weight_eval(w: &WeightFunction, t: &[f64], deriv: &MultiIndex) -> Result<f64> {
    w.derivative(t, deriv)
}
