//! Seeded rate experiments: every statistic the theory bounds in probability
//! is measured over a grid of sample sizes, aggregated, and turned into a
//! log-log slope.

mod calibration;
mod experiments;
mod plan;
mod probe;
mod report;
mod slope;
mod smoothness;

pub use calibration::{calibrate, standard_plan, Calibration, CALIBRATION_SEED};
pub use experiments::{
    error_rate_experiment, expected_uniform_count, fill_rate_experiment, lambda_min_experiment, measure_separation,
    neighbor_count_experiment, quasi_uniformity_ratios, run_rate_experiment, separation_rate_experiment,
};
pub use plan::{ExperimentPlan, Target, TestFunction};
pub use probe::{boundary_probes, interior_probes};
pub use report::{
    median, quantile, AggregatePoint, Aggregation, NeighborCountRecord, NeighborCountReport, RateReport, Regressor,
    TrialRecord,
};
pub use slope::{fit_loglog_slope, SlopeFit};
pub use smoothness::{smoothness_probe, OrderReport, SmoothnessReport};
