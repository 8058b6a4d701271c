use rayon::prelude::*;

use super::config::MmlsConfig;
use super::fit::{fit_in_frame, VectorPolynomial};
use super::frame::{FrameContext, LocalFrame};
use crate::error::{Error, Result};
use crate::geometry::{fill_distance_over, PointCloud};
use crate::lab::{Aggregation, RateReport, Regressor, TrialRecord};
use crate::mls::WeightFunction;
use crate::sampling::{derive_rng, ReferenceManifold};

/// A sample cloud with the bandwidth, μ and weight resolved once.
#[derive(Clone, Debug)]
pub struct MmlsProjector {
    cloud: PointCloud,
    cfg: MmlsConfig,
    h: f64,
    mu: f64,
    weight: WeightFunction,
}

impl MmlsProjector {
    pub fn new(cloud: PointCloud, cfg: MmlsConfig) -> Result<Self> {
        if cloud.dim() != cfg.ambient_dim {
            return Err(Error::arg(format!(
                "cloud has dimension {}, configuration says {}",
                cloud.dim(),
                cfg.ambient_dim
            )));
        }
        if cloud.is_empty() {
            return Err(Error::domain("cannot project onto an empty cloud"));
        }
        let (h, mu, weight) = cfg.resolve(cloud.len())?;
        Ok(MmlsProjector { cloud, cfg, h, mu, weight })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    fn context(&self) -> FrameContext<'_> {
        FrameContext { cloud: &self.cloud, cfg: &self.cfg, h: self.h, mu: self.mu, weight: self.weight }
    }

    pub fn frame(&self, r: &[f64]) -> Result<LocalFrame> {
        self.context().find(r)
    }

    pub fn fit(&self, frame: &LocalFrame) -> Result<VectorPolynomial> {
        fit_in_frame(frame, &self.cloud, &self.cfg, self.h, &self.weight)
    }

    /// The projection together with the frame it was computed in.
    pub fn project_with_frame(&self, r: &[f64]) -> Result<(Vec<f64>, LocalFrame)> {
        let frame = self.frame(r)?;
        let poly = self.fit(&frame)?;
        Ok((poly.at_origin(), frame))
    }

    pub fn project(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.project_with_frame(r).map(|(p, _)| p)
    }
}

/// The projection `P(r) = π*(0)`.
pub fn mmls_project(r: &[f64], cloud: &PointCloud, cfg: &MmlsConfig) -> Result<Vec<f64>> {
    MmlsProjector::new(cloud.clone(), *cfg)?.project(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeDiagnostic {
    pub probe: usize,
    pub iterations: usize,
    pub residual: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Projections of the probes that succeeded, in probe order.
    pub cloud: PointCloud,
    /// Index of the probe each output point came from.
    pub source: Vec<usize>,
    pub diagnostics: Vec<ProbeDiagnostic>,
}

impl Reconstruction {
    pub fn failures(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.failure.is_some()).count()
    }
}

impl MmlsProjector {
    /// Projects every probe; failures are kept in the diagnostics and
    /// excluded from the output unless they exceed the allowed fraction.
    pub fn reconstruct(&self, probes: &PointCloud) -> Result<Reconstruction> {
        if probes.dim() != self.cloud.dim() {
            return Err(Error::arg("probe dimension differs from the sample dimension"));
        }
        let results: Vec<(usize, Result<(Vec<f64>, LocalFrame)>)> =
            (0..probes.len()).into_par_iter().map(|k| (k, self.project_with_frame(probes.point(k)))).collect();
        let mut coords = Vec::new();
        let mut source = Vec::new();
        let mut diagnostics = Vec::with_capacity(results.len());
        for (k, res) in results {
            match res {
                Ok((p, frame)) => {
                    coords.extend(p);
                    source.push(k);
                    diagnostics.push(ProbeDiagnostic {
                        probe: k,
                        iterations: frame.iterations,
                        residual: frame.residual,
                        failure: None,
                    });
                }
                Err(e) => diagnostics.push(ProbeDiagnostic {
                    probe: k,
                    iterations: 0,
                    residual: f64::NAN,
                    failure: Some(e.to_string()),
                }),
            }
        }
        let failed = diagnostics.len() - source.len();
        if failed as f64 > self.cfg.max_failure_fraction * diagnostics.len() as f64 {
            return Err(Error::FailureBudget {
                failed,
                total: diagnostics.len(),
                allowed: self.cfg.max_failure_fraction,
            });
        }
        Ok(Reconstruction { cloud: PointCloud::from_flat(self.cloud.dim(), coords)?, source, diagnostics })
    }
}

pub fn reconstruct_manifold(samples: &PointCloud, probes: &PointCloud, cfg: &MmlsConfig) -> Result<Reconstruction> {
    MmlsProjector::new(samples.clone(), *cfg)?.reconstruct(probes)
}

/// Sample sizes, trials and probe/candidate density for the reconstruction
/// rate experiment.
#[derive(Clone, Debug)]
pub struct MmlsRatePlan {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// Probes placed on the manifold per trial.
    pub probes: usize,
    /// Candidates on the manifold per sample point for the fill distance.
    pub fill_candidates_per_point: usize,
}

impl MmlsRatePlan {
    pub fn new(n_grid: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        MmlsRatePlan { n_grid, trials, master_seed, probes: 100, fill_candidates_per_point: 16 }
    }
}

const MMLS_STREAM: u64 = 0x4D4D;

/// Per trial: sample the manifold, project probes lying on it, and record
/// the largest exact distance from a projection back to the manifold (the
/// one-sided Hausdorff term) against the measured fill distance.
pub fn mmls_rate_experiment(manifold: &ReferenceManifold, cfg: &MmlsConfig, plan: &MmlsRatePlan) -> Result<RateReport> {
    cfg.validate()?;
    if cfg.ambient_dim != manifold.ambient_dim() || cfg.intrinsic_dim != manifold.intrinsic_dim() {
        return Err(Error::Config("configuration dimensions differ from the manifold's".into()));
    }
    if plan.trials == 0 || plan.n_grid.windows(2).any(|w| w[0] >= w[1]) || plan.n_grid.len() < 4 {
        return Err(Error::Config("need ≥ 4 increasing sample sizes and at least one trial".into()));
    }
    let big_d = manifold.ambient_dim();
    let probes = PointCloud::from_flat(big_d, manifold.dense_points(plan.probes))?;
    let jobs: Vec<(usize, usize)> = plan.n_grid.iter().flat_map(|&n| (0..plan.trials).map(move |t| (n, t))).collect();
    let records = jobs
        .iter()
        .map(|&(n, t)| {
            let mut rng = derive_rng(plan.master_seed, &[MMLS_STREAM, n as u64, t as u64]);
            let sample = manifold.sample_with(n, &mut rng)?;
            let candidates = manifold.dense_points(plan.fill_candidates_per_point * n);
            let h = fill_distance_over(&sample.cloud, &candidates)?;
            let rec = MmlsProjector::new(sample.cloud, *cfg)?.reconstruct(&probes)?;
            let err = rec.cloud.points().map(|p| manifold.distance(p)).fold(0.0f64, f64::max);
            Ok(TrialRecord {
                n,
                trial: t,
                statistic: err,
                h_measured: Some(h),
                failures: rec.failures(),
                evaluated: probes.len(),
                degenerate: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RateReport::from_records("mmls", Aggregation::Median, Regressor::FillDistance, records)
}
