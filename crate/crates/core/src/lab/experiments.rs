use rayon::prelude::*;

use super::plan::{ExperimentPlan, Target};
use super::probe::{boundary_probes, interior_probes};
use super::report::{
    median, Aggregation, NeighborCountRecord, NeighborCountReport, RateReport, Regressor, TrialRecord,
};
use crate::error::{Error, Result};
use crate::geometry::{fill_distance, separation, unit_ball_volume, PointCloud};
use crate::mls::{MlsModel, Normalization};
use crate::sampling::{derive_rng, sample_iid_with, SampleRng};

/// Stream label for trial samples. Every target draws the trial sample from
/// the same stream, so fill and separation runs sharing a seed see the same
/// point sets.
const SAMPLE_STREAM: u64 = 0x5A4D;

fn trial_cloud(plan: &ExperimentPlan, n: usize, trial: usize) -> Result<PointCloud> {
    let mut rng: SampleRng = derive_rng(plan.master_seed, &[SAMPLE_STREAM, n as u64, trial as u64]);
    sample_iid_with(&plan.density, &plan.domain, n, &mut rng)
}

/// Runs `job` for every (n, trial) in parallel; results come back in
/// (n, trial) order whatever the scheduling.
fn run_trials<T, F>(plan: &ExperimentPlan, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize, PointCloud) -> Result<T> + Sync,
{
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = plan.n_grid.iter().flat_map(|&n| (0..plan.trials).map(move |t| (n, t))).collect();
    jobs.par_iter().map(|&(n, t)| job(n, t, trial_cloud(plan, n, t)?)).collect()
}

fn check_target(plan: &ExperimentPlan, want: Target) -> Result<()> {
    if plan.target != want {
        return Err(Error::Config(format!(
            "plan targets '{}' but the '{}' experiment was requested",
            plan.target.name(),
            want.name()
        )));
    }
    Ok(())
}

fn check_failures(records: &[TrialRecord], allowed: f64) -> Result<()> {
    let failed: usize = records.iter().map(|r| r.failures).sum();
    let total: usize = records.iter().map(|r| r.evaluated).sum();
    if total > 0 && failed as f64 > allowed * total as f64 {
        return Err(Error::FailureBudget { failed, total, allowed });
    }
    Ok(())
}

fn simple_record(n: usize, trial: usize, statistic: f64) -> TrialRecord {
    TrialRecord { n, trial, statistic, h_measured: None, failures: 0, evaluated: 1, degenerate: false }
}

/// Median fill distance against n, plus `h_n (n / ln n)^{1/d}` per n.
pub fn fill_rate_experiment(plan: &ExperimentPlan) -> Result<RateReport> {
    check_target(plan, Target::Fill)?;
    let records = run_trials(plan, |n, t, cloud| {
        let h = fill_distance(&cloud, &plan.domain, plan.fill_resolution(n))?;
        Ok(TrialRecord { h_measured: Some(h), ..simple_record(n, t, h) })
    })?;
    let mut report =
        RateReport::from_records(Target::Fill.name(), Aggregation::Median, Regressor::SampleSize, records)?;
    let d = plan.dim() as f64;
    report.normalized = report
        .points
        .iter()
        .map(|p| {
            let n = p.n as f64;
            p.aggregate * (n / n.ln()).powf(1.0 / d)
        })
        .collect();
    Ok(report)
}

/// Separation of one sample; a repeated point gives 0 and flags the trial.
pub fn measure_separation(cloud: &PointCloud) -> Result<(f64, bool)> {
    let s = separation(cloud)?;
    Ok((s, s == 0.0))
}

/// 10th percentile of the separation against n.
pub fn separation_rate_experiment(plan: &ExperimentPlan) -> Result<RateReport> {
    check_target(plan, Target::Separation)?;
    let records = run_trials(plan, |n, t, cloud| {
        let (s, degenerate) = measure_separation(&cloud)?;
        Ok(TrialRecord { degenerate, ..simple_record(n, t, s) })
    })?;
    RateReport::from_records(Target::Separation.name(), Aggregation::Quantile(0.1), Regressor::SampleSize, records)
}

/// Per n, the median over trials of `h_n / δ_n`, computed on identical
/// samples from a fill report and a separation report of the same seed.
pub fn quasi_uniformity_ratios(fill: &RateReport, sep: &RateReport) -> Result<Vec<(usize, f64)>> {
    if fill.records.len() != sep.records.len() {
        return Err(Error::arg("fill and separation reports cover different trials"));
    }
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for (f, s) in fill.records.iter().zip(&sep.records) {
        if (f.n, f.trial) != (s.n, s.trial) {
            return Err(Error::arg("fill and separation reports cover different trials"));
        }
        if s.statistic <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some((n, v)) if *n == f.n => v.push(f.statistic / s.statistic),
            _ => out.push((f.n, vec![f.statistic / s.statistic])),
        }
    }
    Ok(out.into_iter().map(|(n, v)| (n, median(&v))).collect())
}

/// Counts of samples in `B(x̂, R_n)` at fixed probes, as ratios to `ln n`.
/// `R_n` is the plan's resolved bandwidth times the support scale.
pub fn neighbor_count_experiment(plan: &ExperimentPlan) -> Result<NeighborCountReport> {
    check_target(plan, Target::NeighborCount)?;
    let probes = plan.count_probes.clone();
    if probes.is_empty() {
        return Err(Error::Config("neighbor-count experiment needs probes".into()));
    }
    let per_trial = run_trials(plan, |n, t, cloud| {
        let radius = plan.mls.bandwidth.resolve(n, plan.dim())? * plan.mls.support_scale;
        probes
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let count = cloud.range_query(p, radius)?.len();
                Ok(NeighborCountRecord { n, trial: t, probe: k, count, ratio: count as f64 / (n as f64).ln() })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let records: Vec<NeighborCountRecord> = per_trial.into_iter().flatten().collect();
    let gammas = (0..probes.len())
        .map(|k| {
            records
                .iter()
                .filter(|r| r.probe == k)
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.ratio), hi.max(r.ratio)))
        })
        .collect();
    Ok(NeighborCountReport { probes, records, gammas })
}

/// Expected count in `B(x̂, R)` for the uniform density when the ball lies
/// inside the domain: `n · vol(B_R) / vol(Ω)`.
pub fn expected_uniform_count(plan: &ExperimentPlan, n: usize) -> Result<f64> {
    let d = plan.dim();
    let r = plan.mls.bandwidth.resolve(n, d)? * plan.mls.support_scale;
    Ok(n as f64 * unit_ball_volume(d) * r.powi(d as i32) / plan.domain.volume())
}

fn model_probes(plan: &ExperimentPlan) -> Vec<Vec<f64>> {
    let mut probes = interior_probes(&plan.domain, plan.probe_resolution);
    if plan.boundary_probes {
        probes.extend(boundary_probes(&plan.domain));
    }
    probes
}

/// Smallest eigenvalue of the per-count Gram matrix per trial, over the
/// probes of the interior grid whose support ball `B(x̂, s h)` lies inside
/// the domain. Probes whose fit is rejected as ill-conditioned still
/// contribute their eigenvalue; probes without enough neighbors count as
/// failures.
pub fn lambda_min_experiment(plan: &ExperimentPlan) -> Result<RateReport> {
    check_target(plan, Target::LambdaMin)?;
    if plan.mls.normalization != Normalization::PerCount {
        return Err(Error::Config("the lambda-min experiment needs per-count normalization".into()));
    }
    let grid = interior_probes(&plan.domain, plan.probe_resolution);
    let records = run_trials(plan, |n, t, cloud| {
        let model = MlsModel::new(cloud, vec![0.0; n], plan.mls)?;
        let radius = model.weight().radius();
        let probes: Vec<&Vec<f64>> = grid.iter().filter(|p| plan.domain.distance_to_boundary(p) >= radius).collect();
        if probes.is_empty() {
            return Err(Error::Config(format!("no probe keeps its support inside the domain at n = {n}")));
        }
        let mut lmin = f64::INFINITY;
        let mut failures = 0;
        for p in &probes {
            match model.local_fit(p) {
                Ok(fit) => lmin = lmin.min(fit.lambda_min),
                Err(Error::IllConditioned { lambda_min, .. }) => {
                    lmin = lmin.min(lambda_min);
                    failures += 1;
                }
                Err(Error::InsufficientData { .. }) => failures += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(TrialRecord { failures, evaluated: probes.len(), ..simple_record(n, t, lmin) })
    })?;
    check_failures(&records, plan.max_failure_fraction)?;
    RateReport::from_records(Target::LambdaMin.name(), Aggregation::Minimum, Regressor::SampleSize, records)
}

/// Max over probes of `|Q s − Q f|` against the measured fill distance.
pub fn error_rate_experiment(plan: &ExperimentPlan) -> Result<RateReport> {
    check_target(plan, Target::ErrorRate)?;
    if plan.operator.order() > plan.mls.degree {
        return Err(Error::Config("operator order exceeds the fit degree".into()));
    }
    let probes = model_probes(plan);
    let f = &plan.test_function;
    let records = run_trials(plan, |n, t, cloud| {
        let h = fill_distance(&cloud, &plan.domain, plan.fill_resolution(n))?;
        let values = cloud.points().map(|x| f.value(x)).collect();
        let model = MlsModel::new(cloud, values, plan.mls)?;
        let mut err = 0.0f64;
        let mut failures = 0;
        for p in &probes {
            match model.eval_operator(p, &plan.operator) {
                Ok(v) => err = err.max((v - f.apply(p, &plan.operator)).abs()),
                Err(Error::IllConditioned { .. } | Error::InsufficientData { .. }) => failures += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(TrialRecord {
            n,
            trial: t,
            statistic: err,
            h_measured: Some(h),
            failures,
            evaluated: probes.len(),
            degenerate: false,
        })
    })?;
    check_failures(&records, plan.max_failure_fraction)?;
    RateReport::from_records(Target::ErrorRate.name(), Aggregation::Median, Regressor::FillDistance, records)
}

/// Dispatches on `plan.target` for the targets that produce a rate report.
pub fn run_rate_experiment(plan: &ExperimentPlan) -> Result<RateReport> {
    match plan.target {
        Target::Fill => fill_rate_experiment(plan),
        Target::Separation => separation_rate_experiment(plan),
        Target::LambdaMin => lambda_min_experiment(plan),
        Target::ErrorRate => error_rate_experiment(plan),
        Target::NeighborCount | Target::Smoothness => {
            Err(Error::Config(format!("target '{}' does not produce a rate report", plan.target.name())))
        }
    }
}
