use super::experiments::{lambda_min_experiment, neighbor_count_experiment};
use super::plan::{ExperimentPlan, Target};
use crate::error::Result;
use crate::geometry::Domain;

/// Seed used by [`calibrate`]; acceptance runs use the plan default (2024),
/// so the fixture is never checked against the data it came from.
pub const CALIBRATION_SEED: u64 = 7;

/// Slack applied to the observed ratio range when fixing the γ̂ window.
const GAMMA_SLACK: f64 = 1.25;

/// The reference setting for each target (uniform density, default MLS
/// knobs). `dim` is ignored for targets whose reference run has a fixed
/// dimension (neighbor-count and lambda-min use d = 2, error-rate d = 1).
pub fn standard_plan(target: Target, dim: usize) -> Result<ExperimentPlan> {
    let dim = match target {
        Target::NeighborCount | Target::LambdaMin => 2,
        Target::ErrorRate | Target::Smoothness => 1,
        Target::Fill | Target::Separation => dim,
    };
    let mut plan = ExperimentPlan::new(target, Domain::unit_cube(dim)?);
    match target {
        Target::Fill => {}
        Target::Separation => {
            plan.trials = 50;
            plan.n_grid = pow2(7, 13);
        }
        Target::NeighborCount => {
            plan.trials = 30;
            plan.n_grid = pow2(8, 14);
            plan.count_probes = vec![vec![0.5; dim], vec![0.0; dim]];
        }
        Target::LambdaMin => plan.n_grid = pow2(9, 13),
        Target::ErrorRate => plan.trials = 10,
        Target::Smoothness => plan.n_grid = vec![200],
    }
    Ok(plan)
}

fn pow2(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

/// Constants fixed once from a pilot run and checked in.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub seed: u64,
    /// Observed (min, max) of N / ln n at the centre probe.
    pub gamma_observed: (f64, f64),
    /// The fixed window later runs must stay in.
    pub gamma_window: (f64, f64),
    pub lambda_observed: f64,
    /// Largest power of ten not above half the observed minimum.
    pub lambda_floor: f64,
}

impl Calibration {
    pub fn to_toml(&self) -> String {
        format!(
            "# Written by `stochmls calibrate`; edit only by rerunning it.\n\
             seed = {}\n\n\
             [neighbor_count]\n\
             observed_low = {:e}\n\
             observed_high = {:e}\n\
             gamma_low = {:e}\n\
             gamma_high = {:e}\n\n\
             [lambda_min]\n\
             observed = {:e}\n\
             floor = {:e}\n",
            self.seed,
            self.gamma_observed.0,
            self.gamma_observed.1,
            self.gamma_window.0,
            self.gamma_window.1,
            self.lambda_observed,
            self.lambda_floor,
        )
    }
}

/// Runs the reference neighbor-count and lambda-min plans under
/// [`CALIBRATION_SEED`] and derives the fixture constants.
pub fn calibrate() -> Result<Calibration> {
    let mut counts = standard_plan(Target::NeighborCount, 2)?;
    counts.master_seed = CALIBRATION_SEED;
    let (lo, hi) = neighbor_count_experiment(&counts)?.gamma(0);

    let mut lam = standard_plan(Target::LambdaMin, 2)?;
    lam.master_seed = CALIBRATION_SEED;
    let observed = lambda_min_experiment(&lam)?.points.iter().map(|p| p.aggregate).fold(f64::INFINITY, f64::min);
    let floor = 10f64.powf((0.5 * observed).log10().floor());

    Ok(Calibration {
        seed: CALIBRATION_SEED,
        gamma_observed: (lo, hi),
        gamma_window: (lo / GAMMA_SLACK, hi * GAMMA_SLACK),
        lambda_observed: observed,
        lambda_floor: floor,
    })
}
