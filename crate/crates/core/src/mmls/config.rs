use crate::error::{Error, Result};
use crate::mls::{Bandwidth, Profile, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmlsConfig {
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub degree: usize,
    /// Profile shared by the frame weight θ₁ and the fit weight θ₂.
    pub profile: Profile,
    pub support_scale: f64,
    /// Resolved with the sample count and the intrinsic dimension.
    pub bandwidth: Bandwidth,
    /// μ = mu_factor · h.
    pub mu_factor: f64,
    /// The frame iteration stops once the origin moves less than `tolerance · h`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub lambda_floor: f64,
    pub max_failure_fraction: f64,
}

impl MmlsConfig {
    pub fn new(intrinsic_dim: usize, ambient_dim: usize) -> Self {
        MmlsConfig {
            intrinsic_dim,
            ambient_dim,
            degree: 2,
            profile: Profile::SmoothBump,
            support_scale: 1.0,
            bandwidth: Bandwidth::Rate { c_d: 6.0 },
            mu_factor: 3.0,
            tolerance: 1e-10,
            max_iterations: 100,
            lambda_floor: 1e-10,
            max_failure_fraction: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intrinsic_dim == 0 || self.intrinsic_dim >= self.ambient_dim {
            return Err(Error::Config(format!("need 0 < d < D, got d={} D={}", self.intrinsic_dim, self.ambient_dim)));
        }
        if !(self.mu_factor >= 1.0 && self.mu_factor.is_finite()) {
            return Err(Error::Config("mu_factor must be at least 1 so that mu ≥ h".into()));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::Config("frame tolerance and iteration cap must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.max_failure_fraction) {
            return Err(Error::Config("max failure fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// (h, μ, weight) for a sample of `n` points.
    pub fn resolve(&self, n: usize) -> Result<(f64, f64, WeightFunction)> {
        self.validate()?;
        let h = self.bandwidth.resolve(n, self.intrinsic_dim)?;
        let weight = WeightFunction::new(self.profile, self.support_scale, h)?;
        Ok((h, self.mu_factor * h, weight))
    }
}
