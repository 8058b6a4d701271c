use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Domain, MultiIndex};
use crate::mls::{DifferentialOperator, MlsConfig};
use crate::sampling::Density;

/// What a rate experiment measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Fill,
    Separation,
    NeighborCount,
    LambdaMin,
    ErrorRate,
    Smoothness,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::Fill,
        Target::Separation,
        Target::NeighborCount,
        Target::LambdaMin,
        Target::ErrorRate,
        Target::Smoothness,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Target::Fill => "fill",
            Target::Separation => "separation",
            Target::NeighborCount => "neighbor-count",
            Target::LambdaMin => "lambda-min",
            Target::ErrorRate => "error-rate",
            Target::Smoothness => "smoothness",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Target::ALL.into_iter().find(|t| t.name() == name).ok_or_else(|| Error::arg(format!("unknown target '{name}'")))
    }
}

/// Smooth test functions with closed-form derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `Π_j sin(2π k x_j)`.
    SineProduct { frequency: f64 },
    /// `Σ c_β x^β`.
    Polynomial { terms: Vec<(MultiIndex, f64)> },
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::SineProduct { frequency } => format!("sine-product({frequency})"),
            TestFunction::Polynomial { .. } => "polynomial".into(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.derivative(x, &MultiIndex::zero(x.len()))
    }

    pub fn derivative(&self, x: &[f64], alpha: &MultiIndex) -> f64 {
        match self {
            TestFunction::SineProduct { frequency } => {
                let w = 2.0 * PI * frequency;
                x.iter()
                    .zip(alpha.entries())
                    .map(|(&xj, &a)| w.powi(a as i32) * (w * xj + a as f64 * PI / 2.0).sin())
                    .product()
            }
            TestFunction::Polynomial { terms } => terms
                .iter()
                .map(|(beta, c)| {
                    let Some(rest) = beta.checked_sub(alpha) else {
                        return 0.0;
                    };
                    let falling: f64 = beta
                        .entries()
                        .iter()
                        .zip(alpha.entries())
                        .map(|(&b, &a)| ((b - a + 1)..=b).map(f64::from).product::<f64>())
                        .product();
                    c * falling * rest.monomial(x)
                })
                .sum(),
        }
    }

    pub fn apply(&self, x: &[f64], q: &DifferentialOperator) -> f64 {
        q.terms().iter().map(|(m, c)| c * self.derivative(x, m)).sum()
    }
}

/// A rate experiment: sample sizes, trials, seed, sampling law and the MLS
/// settings used by targets that fit models.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub target: Target,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub domain: Domain,
    pub density: Density,
    pub mls: MlsConfig,
    /// Fill-distance grid resolution per axis is
    /// `max(min_resolution, ⌈factor · n^{1/d}⌉)`.
    pub fill_resolution_factor: f64,
    pub min_resolution: usize,
    /// Interior probes per axis for model-based targets.
    pub probe_resolution: usize,
    /// Also evaluate at the designated boundary probes.
    pub boundary_probes: bool,
    /// Neighbor-count probe points.
    pub count_probes: Vec<Vec<f64>>,
    pub max_failure_fraction: f64,
    pub test_function: TestFunction,
    pub operator: DifferentialOperator,
}

impl ExperimentPlan {
    pub fn new(target: Target, domain: Domain) -> Self {
        let d = domain.dim();
        let centre = {
            let (lo, hi) = domain.bounding_box();
            lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
        };
        ExperimentPlan {
            target,
            n_grid: (7..=14).map(|k| 1usize << k).collect(),
            trials: 20,
            master_seed: 2024,
            domain,
            density: Density::uniform(),
            mls: MlsConfig::default(),
            fill_resolution_factor: if d == 1 { 32.0 } else { 6.0 },
            min_resolution: 64,
            probe_resolution: if d == 1 { 50 } else { 7 },
            boundary_probes: true,
            count_probes: vec![centre],
            max_failure_fraction: 0.01,
            test_function: TestFunction::SineProduct { frequency: 1.0 },
            operator: DifferentialOperator::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn fill_resolution(&self, n: usize) -> usize {
        let per_axis = self.fill_resolution_factor * (n as f64).powf(1.0 / self.dim() as f64);
        (per_axis.ceil() as usize).max(self.min_resolution)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be nonempty and strictly increasing".into()));
        }
        if self.target != Target::Smoothness && self.n_grid.len() < 4 {
            return Err(Error::Config("slope fits need at least 4 sample sizes".into()));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::Config("sample sizes must be at least 2".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_failure_fraction) {
            return Err(Error::Config("max failure fraction must lie in [0, 1]".into()));
        }
        if !(self.fill_resolution_factor > 0.0) {
            return Err(Error::Config("fill resolution factor must be positive".into()));
        }
        if self.operator.dim() != self.dim() {
            return Err(Error::Config("operator dimension does not match the domain".into()));
        }
        if self.count_probes.iter().any(|p| p.len() != self.dim()) {
            return Err(Error::Config("count probes must match the domain dimension".into()));
        }
        self.density.validate(&self.domain)
    }
}
