use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Shape of a sampling domain Ω ⊂ ℝ^d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainShape {
    /// [0, 1]^d.
    UnitCube,
    /// Closed ball of the given radius centred at the origin.
    Ball { radius: f64 },
    /// The flat torus [0, 1)^d with minimum-image distances.
    PeriodicCube,
}

/// Parameters of the interior cone condition: every point of the domain is
/// the apex of a cone with this half-angle and radius lying inside the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeCondition {
    pub half_angle: f64,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    shape: DomainShape,
    dim: usize,
}

impl Domain {
    pub fn new(shape: DomainShape, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("domain dimension must be positive"));
        }
        if let DomainShape::Ball { radius } = shape {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::arg(format!("ball radius must be positive and finite, got {radius}")));
            }
        }
        Ok(Domain { shape, dim })
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        Domain::new(DomainShape::UnitCube, dim)
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Domain::new(DomainShape::Ball { radius }, dim)
    }

    pub fn periodic_cube(dim: usize) -> Result<Self> {
        Domain::new(DomainShape::PeriodicCube, dim)
    }

    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.shape, DomainShape::PeriodicCube)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.shape {
            DomainShape::UnitCube => x.iter().all(|&v| (0.0..=1.0).contains(&v)),
            DomainShape::PeriodicCube => x.iter().all(|&v| (0.0..1.0).contains(&v)),
            DomainShape::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius,
        }
    }

    pub fn volume(&self) -> f64 {
        match self.shape {
            DomainShape::UnitCube | DomainShape::PeriodicCube => 1.0,
            DomainShape::Ball { radius } => unit_ball_volume(self.dim) * radius.powi(self.dim as i32),
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self.shape {
            DomainShape::UnitCube | DomainShape::PeriodicCube => (vec![0.0; self.dim], vec![1.0; self.dim]),
            DomainShape::Ball { radius } => (vec![-radius; self.dim], vec![radius; self.dim]),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.shape {
            DomainShape::UnitCube => (self.dim as f64).sqrt(),
            DomainShape::PeriodicCube => 0.5 * (self.dim as f64).sqrt(),
            DomainShape::Ball { radius } => 2.0 * radius,
        }
    }

    /// Cone-condition parameters; `None` for the boundaryless periodic cube,
    /// where the condition holds trivially.
    ///
    /// Unit cube: cones point from each point towards the centre's orthant
    /// along a diagonal, half-angle asin(1/√d), radius 1/2. Ball: cones point
    /// at the centre, half-angle π/3, radius equal to the ball radius.
    pub fn cone(&self) -> Option<ConeCondition> {
        match self.shape {
            DomainShape::UnitCube => {
                Some(ConeCondition { half_angle: (1.0 / (self.dim as f64).sqrt()).asin(), radius: 0.5 })
            }
            DomainShape::Ball { radius } => Some(ConeCondition { half_angle: PI / 3.0, radius }),
            DomainShape::PeriodicCube => None,
        }
    }

    /// Axis of the interior cone anchored at `x` (unit vector).
    pub fn cone_axis(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self.shape {
            DomainShape::UnitCube => {
                let s = 1.0 / (self.dim as f64).sqrt();
                Some(x.iter().map(|&v| if v <= 0.5 { s } else { -s }).collect())
            }
            DomainShape::Ball { .. } => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    let mut e = vec![0.0; self.dim];
                    e[0] = 1.0;
                    Some(e)
                } else {
                    Some(x.iter().map(|v| -v / norm).collect())
                }
            }
            DomainShape::PeriodicCube => None,
        }
    }

    /// Distance from `x` (inside the domain) to the boundary; infinite on
    /// the periodic cube.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        match self.shape {
            DomainShape::UnitCube => x.iter().map(|&v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min).max(0.0),
            DomainShape::Ball { radius } => (radius - x.iter().map(|v| v * v).sum::<f64>().sqrt()).max(0.0),
            DomainShape::PeriodicCube => f64::INFINITY,
        }
    }

    /// Wrap a coordinate vector back into the fundamental cell (periodic only).
    pub fn wrap(&self, x: &mut [f64]) {
        if self.is_periodic() {
            for v in x.iter_mut() {
                *v -= v.floor();
                if *v >= 1.0 {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Volume of the unit ball in ℝ^d.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // V_d = 2π/d · V_{d-2}, V_0 = 1, V_1 = 2
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}
