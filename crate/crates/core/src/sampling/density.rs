use std::f64::consts::PI;

use rand::{Rng, SeedableRng};

use super::rng::SampleRng;
use crate::error::{Error, Result};
use crate::geometry::{candidate_grid, Domain, DomainShape, PointCloud};

/// Minimum rejection-sampler acceptance rate before we give up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityKind {
    Uniform,
    /// `(1 + a·φ_Ω(x)) / vol(Ω)` where φ_Ω is a smooth zero-mean profile:
    /// `Π_j cos(2π x_j)` on the (periodic) unit cube and
    /// `1 − (d+2)/d · ‖x‖²/R²` on a ball of radius R.
    Ripple {
        amplitude: f64,
    },
}

/// A density on a domain whose ratio to the uniform density lies in
/// `[c_lower, c_upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Density {
    pub kind: DensityKind,
    pub c_lower: f64,
    pub c_upper: f64,
}

impl Density {
    pub fn uniform() -> Self {
        Density { kind: DensityKind::Uniform, c_lower: 1.0, c_upper: 1.0 }
    }

    pub fn ripple(amplitude: f64, c_lower: f64, c_upper: f64) -> Self {
        Density { kind: DensityKind::Ripple { amplitude }, c_lower, c_upper }
    }

    /// Ratio of the density at `x` to the uniform density on `domain`.
    pub fn ratio(&self, domain: &Domain, x: &[f64]) -> f64 {
        match self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Ripple { amplitude } => 1.0 + amplitude * ripple_profile(domain, x),
        }
    }

    pub fn pdf(&self, domain: &Domain, x: &[f64]) -> f64 {
        if domain.contains(x) {
            self.ratio(domain, x) / domain.volume()
        } else {
            0.0
        }
    }

    /// Check the bounds and the envelope on a probe grid.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        if !(self.c_lower > 0.0 && self.c_upper >= self.c_lower && self.c_upper.is_finite()) {
            return Err(Error::Config(format!(
                "density bounds need 0 < c_lower <= c_upper, got [{}, {}]",
                self.c_lower, self.c_upper
            )));
        }
        let res = match domain.dim() {
            1 => 1001,
            2 => 101,
            3 => 31,
            _ => 9,
        };
        let grid = candidate_grid(domain, res)?;
        for x in grid.chunks_exact(domain.dim()) {
            let r = self.ratio(domain, x);
            if !(r >= self.c_lower - 1e-12 && r <= self.c_upper + 1e-12) {
                return Err(Error::Config(format!(
                    "density ratio {r} at {x:?} is outside [{}, {}]",
                    self.c_lower, self.c_upper
                )));
            }
        }
        Ok(())
    }

    /// ∫_Ω p by quadrature: a midpoint tensor rule on cubes (`resolution`
    /// cells per axis) and a radial midpoint rule on balls.
    pub fn total_mass(&self, domain: &Domain, resolution: usize) -> f64 {
        let d = domain.dim();
        match domain.shape() {
            DomainShape::UnitCube | DomainShape::PeriodicCube => {
                let cells = resolution.pow(d as u32);
                let mut x = vec![0.0; d];
                let mut sum = 0.0;
                for flat in 0..cells {
                    let mut rem = flat;
                    for xj in x.iter_mut() {
                        *xj = ((rem % resolution) as f64 + 0.5) / resolution as f64;
                        rem /= resolution;
                    }
                    sum += self.ratio(domain, &x);
                }
                sum / cells as f64
            }
            DomainShape::Ball { radius } => {
                // mass = ∫_0^R ratio(r) · d r^{d-1} / R^d dr for a radial ratio
                let dr = radius / resolution as f64;
                let mut x = vec![0.0; d];
                (0..resolution)
                    .map(|k| {
                        let r = (k as f64 + 0.5) * dr;
                        x[0] = r;
                        self.ratio(domain, &x) * d as f64 * r.powi(d as i32 - 1) / radius.powi(d as i32) * dr
                    })
                    .sum()
            }
        }
    }
}

fn ripple_profile(domain: &Domain, x: &[f64]) -> f64 {
    match domain.shape() {
        DomainShape::UnitCube | DomainShape::PeriodicCube => x.iter().map(|v| (2.0 * PI * v).cos()).product(),
        DomainShape::Ball { radius } => {
            let d = domain.dim() as f64;
            let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (radius * radius);
            1.0 - (d + 2.0) / d * r2
        }
    }
}

/// `n` i.i.d. draws from `density` on `domain`, by rejection against uniform
/// proposals on the bounding box with envelope `c_upper`.
pub fn sample_iid(density: &Density, domain: &Domain, n: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = SampleRng::seed_from_u64(seed);
    sample_iid_with(density, domain, n, &mut rng)
}

/// As [`sample_iid`], drawing from a caller-supplied stream.
pub fn sample_iid_with(density: &Density, domain: &Domain, n: usize, rng: &mut SampleRng) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::arg("sample size must be positive"));
    }
    if !(density.c_upper > 0.0) {
        return Err(Error::Config("density envelope c_upper must be positive".into()));
    }
    let d = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let mut coords = Vec::with_capacity(n * d);
    let mut x = vec![0.0; d];
    let (mut attempts, mut accepted) = (0u64, 0usize);
    while accepted < n {
        attempts += 1;
        for j in 0..d {
            x[j] = lo[j] + (hi[j] - lo[j]) * rng.random::<f64>();
        }
        let u: f64 = rng.random();
        if domain.contains(&x) && u * density.c_upper <= density.ratio(domain, &x) {
            coords.extend_from_slice(&x);
            accepted += 1;
        }
        if attempts >= 100_000 && (accepted as f64) < MIN_ACCEPTANCE * attempts as f64 {
            return Err(Error::Config(format!(
                "rejection sampler accepted {accepted} of {attempts} proposals; density too spiky"
            )));
        }
    }
    PointCloud::in_domain(domain, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let dom = Domain::unit_cube(1).unwrap();
        let a = sample_iid(&Density::uniform(), &dom, 4, 42).unwrap();
        let b = sample_iid(&Density::uniform(), &dom, 4, 42).unwrap();
        assert_eq!(a.coords(), b.coords());
        let c = sample_iid(&Density::uniform(), &dom, 4, 43).unwrap();
        assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn uniform_mean_is_centered() {
        let dom = Domain::unit_cube(2).unwrap();
        let cloud = sample_iid(&Density::uniform(), &dom, 10_000, 1).unwrap();
        // sd of the mean = sqrt(1/12 / n); 3 sigma ≈ 0.0087
        for j in 0..2 {
            let mean = cloud.points().map(|p| p[j]).sum::<f64>() / 10_000.0;
            assert!((mean - 0.5).abs() < 0.02, "axis {j}: {mean}");
        }
    }

    #[test]
    fn ripple_mass_and_bounds() {
        for dom in [Domain::unit_cube(1).unwrap(), Domain::unit_cube(2).unwrap(), Domain::periodic_cube(2).unwrap()] {
            let den = Density::ripple(0.5, 0.5, 2.0);
            den.validate(&dom).unwrap();
            assert!((den.total_mass(&dom, 200) - 1.0).abs() < 1e-6);
        }
        for d in 1..=3 {
            let dom = Domain::ball(d, 1.3).unwrap();
            let den = Density::ripple(0.4, 1.0 - 0.8 / d as f64, 1.4);
            den.validate(&dom).unwrap();
            assert!((den.total_mass(&dom, 20_000) - 1.0).abs() < 1e-6, "d={d}");
        }
        assert!(Density::ripple(0.9, 0.5, 2.0).validate(&Domain::unit_cube(1).unwrap()).is_err());
        assert!(Density::ripple(0.0, 2.0, 1.0).validate(&Domain::unit_cube(1).unwrap()).is_err());
    }

    #[test]
    fn bounded_ratio_histogram_within_bounds() {
        let dom = Domain::unit_cube(2).unwrap();
        let den = Density::ripple(0.5, 0.5, 2.0);
        let n = 100_000;
        let cloud = sample_iid(&den, &dom, n, 17).unwrap();
        let cells = 10;
        let mut hist = vec![0usize; cells * cells];
        for p in cloud.points() {
            let a = ((p[0] * cells as f64) as usize).min(cells - 1);
            let b = ((p[1] * cells as f64) as usize).min(cells - 1);
            hist[a * cells + b] += 1;
        }
        let expected = n as f64 / (cells * cells) as f64;
        for &h in hist.iter().filter(|&&h| h >= 100) {
            let ratio = h as f64 / expected;
            assert!((0.5..=2.0).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn spiky_density_is_rejected() {
        let dom = Domain::unit_cube(1).unwrap();
        // envelope far above the actual ratio: acceptance ≈ 1/20000
        let den = Density { kind: DensityKind::Uniform, c_lower: 1.0, c_upper: 20_000.0 };
        assert!(matches!(sample_iid(&den, &dom, 1000, 1), Err(Error::Config(_))));
        assert!(sample_iid(&Density::uniform(), &dom, 0, 1).is_err());
    }

    #[test]
    fn ball_samples_stay_inside() {
        let dom = Domain::ball(3, 2.0).unwrap();
        let cloud = sample_iid(&Density::uniform(), &dom, 500, 3).unwrap();
        assert!(cloud.points().all(|p| dom.contains(p)));
    }
}
