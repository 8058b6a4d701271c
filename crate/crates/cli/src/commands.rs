//! One function per subcommand. Each reads only the resolved config, writes
//! its files through an [`ArtifactWriter`] and returns the manifest summary.

use std::fs;
use std::path::Path;

use serde_json::json;

use stochmls::geometry::io::{coordinate_headers, format_f64, read_table, write_points, write_table, Table};
use stochmls::geometry::{Domain, PointCloud};
use stochmls::lab::{
    calibrate, fit_loglog_slope, neighbor_count_experiment, run_rate_experiment, smoothness_probe, ExperimentPlan,
    RateReport, Target, TestFunction,
};
use stochmls::mls::{Bandwidth, DifferentialOperator, MlsConfig, MlsModel, Normalization, Profile};
use stochmls::mmls::{MmlsConfig, MmlsProjector};
use stochmls::sampling::{derive_rng, sample_iid, sample_iid_with, Density, ReferenceManifold};

use crate::artifacts::ArtifactWriter;
use crate::config::RunConfig;
use crate::plot::report_svg;
use crate::CliError;

/// Stream label for the single sample behind a smoothness run.
const SMOOTHNESS_STREAM: u64 = 0x534D;

pub fn domain(cfg: &RunConfig) -> Result<Domain, CliError> {
    let d = cfg.count("geometry.dim")?;
    Ok(match cfg.str("geometry.domain") {
        "ball" => Domain::ball(d, cfg.float("geometry.radius"))?,
        "torus" => Domain::periodic_cube(d)?,
        _ => Domain::unit_cube(d)?,
    })
}

pub fn density(cfg: &RunConfig) -> Density {
    match cfg.str("sampling.density") {
        "ripple" => Density::ripple(
            cfg.float("sampling.amplitude"),
            cfg.float("sampling.c_lower"),
            cfg.float("sampling.c_upper"),
        ),
        _ => Density::uniform(),
    }
}

pub fn mls_config(cfg: &RunConfig) -> Result<MlsConfig, CliError> {
    Ok(MlsConfig {
        degree: cfg.count("mls.degree")?,
        profile: Profile::parse(cfg.str("mls.weight.profile"))?,
        support_scale: cfg.float("mls.weight.support_scale"),
        bandwidth: match cfg.str("mls.bandwidth") {
            "fixed" => Bandwidth::Fixed(cfg.float("mls.h")),
            _ => Bandwidth::Rate { c_d: cfg.float("mls.c_d") },
        },
        normalization: match cfg.str("mls.normalization") {
            "raw" => Normalization::Raw,
            _ => Normalization::PerCount,
        },
        ridge: cfg.float("mls.ridge"),
        lambda_floor: cfg.float("mls.lambda_floor"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorName {
    Identity,
    Laplacian,
    Partial(usize),
}

impl OperatorName {
    /// `identity`, `laplacian` or `partial:<axis>`.
    pub fn parse(key: &str, name: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "key `{key}`: unknown operator {name:?}; use identity, laplacian or partial:<axis>"
            ))
        };
        match name {
            "identity" => Ok(OperatorName::Identity),
            "laplacian" => Ok(OperatorName::Laplacian),
            other => {
                Ok(OperatorName::Partial(other.strip_prefix("partial:").ok_or_else(bad)?.parse().map_err(|_| bad())?))
            }
        }
    }

    pub fn build(self, key: &str, dim: usize) -> Result<DifferentialOperator, CliError> {
        Ok(match self {
            OperatorName::Identity => DifferentialOperator::identity(dim),
            OperatorName::Laplacian => DifferentialOperator::laplacian(dim),
            OperatorName::Partial(axis) if axis < dim => DifferentialOperator::partial(dim, axis),
            OperatorName::Partial(axis) => {
                return Err(CliError::Config(format!("key `{key}`: axis {axis} out of range for dimension {dim}")))
            }
        })
    }
}

pub fn plan(cfg: &RunConfig) -> Result<ExperimentPlan, CliError> {
    let target = Target::parse(cfg.str("lab.target"))?;
    let dom = domain(cfg)?;
    let d = dom.dim();
    let mut plan = ExperimentPlan::new(target, dom);
    plan.n_grid = cfg.counts("lab.n_grid")?;
    plan.trials = cfg.count("lab.trials")?;
    plan.master_seed = cfg.seed();
    plan.density = density(cfg);
    plan.mls = mls_config(cfg)?;
    plan.min_resolution = cfg.count("geometry.resolution")?;
    let factor = cfg.float("geometry.resolution_factor");
    if factor != 0.0 {
        plan.fill_resolution_factor = factor;
    }
    let probes = cfg.count("lab.probe_resolution")?;
    if probes != 0 {
        plan.probe_resolution = probes;
    }
    plan.boundary_probes = cfg.flag("lab.boundary_probes");
    plan.max_failure_fraction = cfg.float("lab.max_failure_fraction");
    plan.test_function = TestFunction::SineProduct { frequency: cfg.float("lab.frequency") };
    plan.operator = OperatorName::parse("lab.operator", cfg.str("lab.operator"))?.build("lab.operator", d)?;
    plan.validate()?;
    Ok(plan)
}

pub fn manifold(cfg: &RunConfig) -> Result<ReferenceManifold, CliError> {
    Ok(match cfg.str("mmls.manifold") {
        "sphere" => ReferenceManifold::sphere(cfg.float("mmls.radius"))?,
        "graph" => ReferenceManifold::graph(
            cfg.count("mmls.intrinsic_dim")?,
            cfg.count("mmls.ambient_dim")?,
            cfg.float("mmls.amplitude"),
        )?,
        _ => ReferenceManifold::circle(cfg.float("mmls.radius"))?,
    })
}

pub fn mmls_config(cfg: &RunConfig, m: &ReferenceManifold) -> Result<MmlsConfig, CliError> {
    let mut c = MmlsConfig::new(m.intrinsic_dim(), m.ambient_dim());
    c.degree = cfg.count("mmls.degree")?;
    c.profile = Profile::parse(cfg.str("mls.weight.profile"))?;
    c.support_scale = cfg.float("mls.weight.support_scale");
    c.bandwidth = Bandwidth::Rate { c_d: cfg.float("mmls.c_d") };
    c.mu_factor = cfg.float("mmls.mu_factor");
    c.tolerance = cfg.float("mmls.tolerance");
    c.max_iterations = cfg.count("mmls.max_iterations")?;
    c.max_failure_fraction = cfg.float("mmls.max_failure_fraction");
    c.validate()?;
    Ok(c)
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_table(&mut buf, table)?;
    Ok(buf)
}

fn read_csv(key: &str, path: &str) -> Result<Table, CliError> {
    if path.is_empty() {
        return Err(CliError::Config(format!("key `{key}` must name a CSV file")));
    }
    let file = fs::File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    Ok(read_table(file)?)
}

/// `samples.csv`: coordinates plus either the test function `f` (domain
/// samples) or the manifold parameters `u0..`.
pub fn sample(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let n = cfg.count("sampling.n")?;
    if cfg.str("sampling.source") == "manifold" {
        let m = manifold(cfg)?;
        let s = m.sample(n, cfg.seed())?;
        let extra: Vec<(String, Vec<f64>)> =
            (0..m.intrinsic_dim()).map(|j| (format!("u{j}"), s.params.iter().map(|p| p[j]).collect())).collect();
        out.write_with("samples.csv", |buf| Ok(write_points(buf, &s.cloud, &extra)?))?;
        return Ok(json!({ "points": n, "dim": m.ambient_dim() }));
    }
    let dom = domain(cfg)?;
    let dens = density(cfg);
    dens.validate(&dom)?;
    let cloud = sample_iid(&dens, &dom, n, cfg.seed())?;
    let f = TestFunction::SineProduct { frequency: cfg.float("lab.frequency") };
    let values = cloud.points().map(|x| f.value(x)).collect();
    out.write_with("samples.csv", |buf| Ok(write_points(buf, &cloud, &[("f".into(), values)])?))?;
    Ok(json!({ "points": n, "dim": dom.dim() }))
}

fn load_model(cfg: &RunConfig) -> Result<(MlsModel, PointCloud), CliError> {
    let data = read_csv("fit.data", cfg.str("fit.data"))?;
    let column = cfg.str("fit.values");
    let values = data.column(column).ok_or_else(|| {
        CliError::Config(format!("key `fit.values`: {} has no column {column:?}", cfg.str("fit.data")))
    })?;
    let cloud = data.to_cloud()?;
    let probes = match cfg.str("fit.probes") {
        "" => cloud.clone(),
        path => read_csv("fit.probes", path)?.to_cloud()?,
    };
    if probes.dim() != cloud.dim() {
        return Err(CliError::Config("probe and data dimensions differ".into()));
    }
    Ok((MlsModel::new(cloud, values, mls_config(cfg)?)?, probes))
}

fn probe_table(probes: &PointCloud, extra: &[&str], rows: Vec<Vec<f64>>) -> Table {
    let mut headers = coordinate_headers(probes.dim());
    headers.extend(extra.iter().map(|s| s.to_string()));
    let rows = probes.points().zip(rows).map(|(p, r)| p.iter().copied().chain(r).collect()).collect();
    Table { headers, rows }
}

/// Recoverable per-probe failures; anything else aborts the run.
fn local_failure(e: &stochmls::Error) -> bool {
    matches!(e, stochmls::Error::IllConditioned { .. } | stochmls::Error::InsufficientData { .. })
}

/// `fit.csv`: value, λ_min of the local Gram matrix and neighbor count per
/// probe; failed fits have `ok = 0` and NaN fields.
pub fn fit(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let (model, probes) = load_model(cfg)?;
    let mut failures = 0;
    let mut rows = Vec::with_capacity(probes.len());
    for p in probes.points() {
        match model.local_fit(p) {
            Ok(fit) => {
                let s: f64 =
                    fit.neighbor_indices.iter().zip(&fit.shape_values).map(|(&i, a)| a * model.values()[i]).sum();
                rows.push(vec![s, fit.lambda_min, fit.neighbor_indices.len() as f64, 1.0]);
            }
            Err(e) if local_failure(&e) => {
                failures += 1;
                rows.push(vec![f64::NAN, f64::NAN, f64::NAN, 0.0]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let table = probe_table(&probes, &["s", "lambda_min", "neighbors", "ok"], rows);
    out.write("fit.csv", &csv_bytes(&table)?)?;
    Ok(json!({ "probes": probes.len(), "failures": failures, "bandwidth": model.bandwidth() }))
}

/// `eval.csv`: `Q s` at every probe for the operator in `eval.operator`.
pub fn eval(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let op_name = OperatorName::parse("eval.operator", cfg.str("eval.operator"))?;
    let (model, probes) = load_model(cfg)?;
    let q = op_name.build("eval.operator", probes.dim())?;
    if q.order() > model.degree() {
        return Err(CliError::Config(format!(
            "key `eval.operator`: order {} exceeds mls.degree = {}",
            q.order(),
            model.degree()
        )));
    }
    let mut failures = 0;
    let mut rows = Vec::with_capacity(probes.len());
    for p in probes.points() {
        match model.eval_operator(p, &q) {
            Ok(v) => rows.push(vec![v, 1.0]),
            Err(e) if local_failure(&e) => {
                failures += 1;
                rows.push(vec![f64::NAN, 0.0]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let table = probe_table(&probes, &["q", "ok"], rows);
    out.write("eval.csv", &csv_bytes(&table)?)?;
    Ok(json!({ "probes": probes.len(), "failures": failures, "operator": cfg.str("eval.operator") }))
}

fn rate_summary(report: &RateReport) -> serde_json::Value {
    json!({
        "target": report.experiment,
        "aggregation": report.aggregation.name(),
        "regressor": report.regressor.name(),
        "slope": report.fit.map(|f| f.slope),
        "stderr": report.fit.map(|f| f.stderr),
        "sizes": report.points.len(),
        "failures": report.total_failures(),
        "normalized": report.normalized,
    })
}

/// `raw.csv`, `summary.csv` and `plot.svg` for slope targets;
/// `counts.csv` for neighbor counts; `smoothness.csv` for the smoothness
/// probe.
pub fn rates(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let plan = plan(cfg)?;
    match plan.target {
        Target::NeighborCount => neighbor_counts(&plan, out),
        Target::Smoothness => smoothness(cfg, &plan, out),
        _ => {
            let report = run_rate_experiment(&plan)?;
            out.write_with("raw.csv", |buf| Ok(report.write_raw_csv(buf)?))?;
            out.write_with("summary.csv", |buf| Ok(report.write_summary_csv(buf)?))?;
            if cfg.flag("lab.plot") {
                out.write("plot.svg", report_svg(&report)?.as_bytes())?;
            }
            if let Some(f) = report.fit {
                println!(
                    "{}: slope={:.4} stderr={:.4} over {} sizes",
                    report.experiment,
                    f.slope,
                    f.stderr,
                    report.points.len()
                );
            }
            Ok(rate_summary(&report))
        }
    }
}

fn neighbor_counts(plan: &ExperimentPlan, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let report = neighbor_count_experiment(plan)?;
    let rows = report
        .records
        .iter()
        .map(|r| vec![r.n as f64, r.trial as f64, r.probe as f64, r.count as f64, r.ratio])
        .collect();
    let table = Table { headers: ["n", "trial", "probe", "count", "ratio"].map(String::from).to_vec(), rows };
    out.write("counts.csv", &csv_bytes(&table)?)?;
    let gammas: Vec<[f64; 2]> = report.gammas.iter().map(|&(a, b)| [a, b]).collect();
    for (k, (lo, hi)) in report.gammas.iter().enumerate() {
        println!("probe {k}: N/ln n in [{lo:.3}, {hi:.3}], ratio {:.2}", hi / lo);
    }
    Ok(json!({ "target": "neighbor-count", "probes": report.probes, "gammas": gammas }))
}

fn smoothness(cfg: &RunConfig, plan: &ExperimentPlan, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let n = plan.n_grid[0];
    let mut rng = derive_rng(plan.master_seed, &[SMOOTHNESS_STREAM, n as u64]);
    let cloud = sample_iid_with(&plan.density, &plan.domain, n, &mut rng)?;
    let values = cloud.points().map(|x| plan.test_function.value(x)).collect();
    let model = MlsModel::new(cloud, values, plan.mls)?;
    let (lo, hi) = plan.domain.bounding_box();
    let start: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + 0.25 * (b - a)).collect();
    let report = smoothness_probe(
        &model,
        cfg.count("lab.smoothness.max_order")?,
        cfg.float("lab.smoothness.grid_step"),
        &start,
        0,
        cfg.float("lab.smoothness.length"),
    )?;
    let rows = report
        .orders
        .iter()
        .map(|o| {
            vec![
                o.order as f64,
                o.jump_fine,
                o.jump_coarse,
                o.jump_ratio(),
                o.divided_difference_error.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    let headers = ["order", "jump_fine", "jump_coarse", "jump_ratio", "divided_difference_error"];
    out.write("smoothness.csv", &csv_bytes(&Table { headers: headers.map(String::from).to_vec(), rows })?)?;
    let passes = report.passes(2.0, 1e-3);
    println!(
        "smoothness: {} neighbor-set transitions, {}",
        report.neighbor_transitions,
        if passes { "pass" } else { "fail" }
    );
    Ok(json!({
        "target": "smoothness",
        "n": n,
        "grid_points": report.grid_points,
        "neighbor_transitions": report.neighbor_transitions,
        "passes": passes,
    }))
}

fn json_f64(v: f64) -> serde_json::Value {
    if v.is_finite() {
        v.into()
    } else {
        serde_json::Value::Null
    }
}

/// `projected.csv` (projections, the probe each came from and its distance
/// to the reference manifold) and `diagnostics.jsonl`, one record per probe.
pub fn mmls(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let m = manifold(cfg)?;
    let mcfg = mmls_config(cfg, &m)?;
    let n = cfg.count("mmls.n")?;
    let sample = m.sample(n, cfg.seed())?;
    let probes = match cfg.count("mmls.probes")? {
        0 => sample.cloud.clone(),
        k => PointCloud::from_flat(m.ambient_dim(), m.dense_points(k))?,
    };
    let projector = MmlsProjector::new(sample.cloud, mcfg)?;
    let rec = projector.reconstruct(&probes)?;
    let distances: Vec<f64> = rec.cloud.points().map(|p| m.distance(p)).collect();
    let source: Vec<f64> = rec.source.iter().map(|&k| k as f64).collect();
    out.write_with("projected.csv", |buf| {
        Ok(write_points(buf, &rec.cloud, &[("source".into(), source), ("distance".into(), distances.clone())])?)
    })?;
    let mut lines = String::new();
    for d in &rec.diagnostics {
        let line = json!({
            "probe": d.probe,
            "iterations": d.iterations,
            "residual": json_f64(d.residual),
            "failure": d.failure,
        });
        lines.push_str(&line.to_string());
        lines.push('\n');
    }
    out.write("diagnostics.jsonl", lines.as_bytes())?;
    let max_distance = distances.iter().copied().fold(0.0f64, f64::max);
    println!("mmls: {} of {} probes projected, max distance {max_distance:.3e}", rec.source.len(), probes.len());
    Ok(json!({
        "samples": n,
        "probes": probes.len(),
        "failures": rec.failures(),
        "bandwidth": projector.bandwidth(),
        "mu": projector.mu(),
        "max_distance": max_distance,
    }))
}

/// Refits `summary.csv` from a previous `rates` run, checks the slope it
/// records, and redraws the plot.
pub fn report(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let input = cfg.str("report.input");
    if input.is_empty() {
        return Err(CliError::Config("key `report.input` must name a directory with a summary.csv".into()));
    }
    let path = Path::new(input).join("summary.csv");
    let mut rdr = csv::Reader::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Io(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Runtime(format!("{} has no `{name}` column", path.display())))
    };
    let (ia, is, ir) = (col("aggregate")?, col("slope")?, col("regressor")?);
    let num = |s: &str| s.parse::<f64>().map_err(|e| CliError::Runtime(format!("{}: {s:?}: {e}", path.display())));
    let mut points = Vec::new();
    let mut recorded = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        points.push((num(&rec[ir])?, num(&rec[ia])?));
        if !rec[is].is_empty() {
            recorded = Some(num(&rec[is])?);
        }
    }
    let fit = fit_loglog_slope(&points).ok();
    if let (Some(f), Some(r)) = (fit, recorded) {
        if (f.slope - r).abs() > 1e-12 {
            return Err(CliError::Runtime(format!(
                "refitted slope {} differs from the recorded {r}",
                format_f64(f.slope)
            )));
        }
    }
    let svg = crate::plot::render_svg(&points, fit, "regressor", "aggregate")?;
    out.write("plot.svg", svg.as_bytes())?;
    match fit {
        Some(f) => println!("slope={:.4} stderr={:.4} over {} points", f.slope, f.stderr, points.len()),
        None => println!("no slope: {} points", points.len()),
    }
    Ok(json!({
        "input": input,
        "points": points.len(),
        "slope": fit.map(|f| f.slope),
        "recorded_slope": recorded,
        "stderr": fit.map(|f| f.stderr),
    }))
}

/// Reruns the calibration and writes `calibration.toml`.
pub fn calibrate_fixture(out: &mut ArtifactWriter) -> Result<serde_json::Value, CliError> {
    let c = calibrate()?;
    out.write("calibration.toml", c.to_toml().as_bytes())?;
    println!("gamma window [{:.4}, {:.4}], lambda floor {:e}", c.gamma_window.0, c.gamma_window.1, c.lambda_floor);
    Ok(json!({
        "seed": c.seed,
        "gamma_window": [c.gamma_window.0, c.gamma_window.1],
        "lambda_floor": c.lambda_floor,
    }))
}
