use std::io::Write;

use super::slope::{fit_loglog_slope, SlopeFit};
use crate::error::Result;
use crate::geometry::io::format_f64;

/// One (n, trial) measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub statistic: f64,
    /// Measured fill distance of the trial's sample, when the target needs it.
    pub h_measured: Option<f64>,
    /// Probes whose local fit failed (excluded from `statistic`).
    pub failures: usize,
    pub evaluated: usize,
    /// E.g. a repeated point making the separation zero.
    pub degenerate: bool,
}

/// How trials at one sample size are summarised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Aggregation {
    Median,
    Quantile(f64),
    Minimum,
}

impl Aggregation {
    pub fn name(&self) -> String {
        match self {
            Aggregation::Median => "median".into(),
            Aggregation::Quantile(q) => format!("quantile({q})"),
            Aggregation::Minimum => "min".into(),
        }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Aggregation::Median => median(values),
            Aggregation::Quantile(q) => quantile(values, *q),
            Aggregation::Minimum => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// The x-axis of the slope fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regressor {
    SampleSize,
    /// Median measured fill distance at each n.
    FillDistance,
}

impl Regressor {
    pub fn name(&self) -> &'static str {
        match self {
            Regressor::SampleSize => "n",
            Regressor::FillDistance => "h_n",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregatePoint {
    pub n: usize,
    pub aggregate: f64,
    /// The regressor value paired with `aggregate`.
    pub x: f64,
}

/// Raw trial values, per-n aggregates and the log-log fit.
#[derive(Clone, Debug)]
pub struct RateReport {
    /// Experiment label written to the `target` CSV column.
    pub experiment: String,
    pub aggregation: Aggregation,
    pub regressor: Regressor,
    pub records: Vec<TrialRecord>,
    pub points: Vec<AggregatePoint>,
    pub fit: Option<SlopeFit>,
    /// Fill targets only: `aggregate · (n / ln n)^{1/d}` per n.
    pub normalized: Vec<f64>,
}

impl RateReport {
    /// Groups records by n (records arrive sorted by n, then trial) and fits.
    pub fn from_records(
        experiment: &str,
        aggregation: Aggregation,
        regressor: Regressor,
        records: Vec<TrialRecord>,
    ) -> Result<Self> {
        let mut points = Vec::new();
        let mut start = 0;
        while start < records.len() {
            let n = records[start].n;
            let end = start + records[start..].iter().take_while(|r| r.n == n).count();
            let group = &records[start..end];
            let stats: Vec<f64> = group.iter().map(|r| r.statistic).collect();
            let x = match regressor {
                Regressor::SampleSize => n as f64,
                Regressor::FillDistance => {
                    let hs: Vec<f64> = group.iter().filter_map(|r| r.h_measured).collect();
                    median(&hs)
                }
            };
            points.push(AggregatePoint { n, aggregate: aggregation.apply(&stats), x });
            start = end;
        }
        let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.aggregate)).collect();
        let fit = if pairs.len() >= 4 && pairs.iter().all(|(x, y)| *x > 0.0 && *y > 0.0) {
            Some(fit_loglog_slope(&pairs)?)
        } else {
            None
        };
        Ok(RateReport {
            experiment: experiment.to_string(),
            aggregation,
            regressor,
            records,
            points,
            fit,
            normalized: Vec::new(),
        })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn total_failures(&self) -> usize {
        self.records.iter().map(|r| r.failures).sum()
    }

    /// `target,n,trial,statistic,h_measured,failures`.
    pub fn write_raw_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["target", "n", "trial", "statistic", "h_measured", "failures"])?;
        for r in &self.records {
            w.write_record([
                self.experiment.clone(),
                r.n.to_string(),
                r.trial.to_string(),
                format_f64(r.statistic),
                r.h_measured.map(format_f64).unwrap_or_default(),
                r.failures.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `n,aggregate,slope,stderr,regressor`; `regressor` holds the x value
    /// the slope was fitted against, so the fit can be redone from this file.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "aggregate", "slope", "stderr", "regressor"])?;
        let (slope, stderr) = self.fit.map(|f| (format_f64(f.slope), format_f64(f.stderr))).unwrap_or_default();
        for p in &self.points {
            w.write_record([p.n.to_string(), format_f64(p.aggregate), slope.clone(), stderr.clone(), format_f64(p.x)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Neighbor count of one probe in one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborCountRecord {
    pub n: usize,
    pub trial: usize,
    pub probe: usize,
    pub count: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct NeighborCountReport {
    pub probes: Vec<Vec<f64>>,
    pub records: Vec<NeighborCountRecord>,
    /// Per probe: (min ratio γ̂₁, max ratio γ̂₂) over all n and trials.
    pub gammas: Vec<(f64, f64)>,
}

impl NeighborCountReport {
    pub fn gamma(&self, probe: usize) -> (f64, f64) {
        self.gammas[probe]
    }

    /// Mean count at `probe` for sample size `n`.
    pub fn mean_count(&self, probe: usize, n: usize) -> f64 {
        let c: Vec<f64> =
            self.records.iter().filter(|r| r.probe == probe && r.n == n).map(|r| r.count as f64).collect();
        c.iter().sum::<f64>() / c.len() as f64
    }

    /// Mean ratio `N / ln n` at `probe` over every n and trial.
    pub fn mean_ratio(&self, probe: usize) -> f64 {
        let r: Vec<f64> = self.records.iter().filter(|r| r.probe == probe).map(|r| r.ratio).collect();
        r.iter().sum::<f64>() / r.len() as f64
    }
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile of the sorted values; NaN for empty input.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((quantile(&(0..11).map(f64::from).collect::<Vec<_>>(), 0.1) - 1.0).abs() < 1e-15);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn grouping_and_csv() {
        let records: Vec<TrialRecord> = [10usize, 20, 40, 80]
            .iter()
            .flat_map(|&n| {
                (0..3).map(move |t| TrialRecord {
                    n,
                    trial: t,
                    statistic: (n as f64).powi(2) * (1.0 + t as f64 * 0.1),
                    h_measured: None,
                    failures: 0,
                    evaluated: 1,
                    degenerate: false,
                })
            })
            .collect();
        let rep = RateReport::from_records("fill", Aggregation::Minimum, Regressor::SampleSize, records).unwrap();
        assert_eq!(rep.points.len(), 4);
        assert!((rep.slope().unwrap() - 2.0).abs() < 1e-12);
        let mut buf = Vec::new();
        rep.write_summary_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("n,aggregate,slope,stderr,regressor"));
    }
}
