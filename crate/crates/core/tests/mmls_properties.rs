mod common;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochmls::geometry::PointCloud;
use stochmls::mls::Bandwidth;
use stochmls::mmls::{
    find_local_frame, local_poly_fit, mmls_project, mmls_rate_experiment, reconstruct_manifold, LocalFrame, MmlsConfig,
    MmlsProjector, MmlsRatePlan,
};
use stochmls::sampling::{sample_manifold, ReferenceManifold};
use stochmls::Error;

fn circle_points(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn plane_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    // z = 0.5 x − 0.25 y + 0.1
    (0..n)
        .map(|_| {
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            vec![x, y, 0.5 * x - 0.25 * y + 0.1]
        })
        .collect()
}

fn plane_normal() -> Vec<f64> {
    let n = [0.5, -0.25, -1.0];
    let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
    n.iter().map(|v| v / len).collect()
}

fn plane_offset(p: &[f64]) -> f64 {
    0.5 * p[0] - 0.25 * p[1] + 0.1 - p[2]
}

fn check_constraints(frame: &LocalFrame, r: &[f64], mu: f64, needed: usize) {
    let e = &frame.basis;
    let eye = DMatrix::<f64>::identity(e.ncols(), e.ncols());
    assert!((e.transpose() * e - eye).amax() <= 1e-12);
    let diff = DVector::from_iterator(r.len(), r.iter().zip(&frame.origin).map(|(a, b)| a - b));
    assert!((e.transpose() * &diff).norm() <= 1e-9 * diff.norm() + 1e-300, "constraint (a)");
    assert!(diff.norm() <= mu * (1.0 + 1e-12), "constraint (b)");
    assert!(frame.neighbors >= needed, "constraint (c)");
    assert!(frame.history.windows(2).all(|w| w[1] <= w[0]), "objective increased: {:?}", frame.history);
}

#[test]
fn hyperplane_frame_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts = plane_points(&mut rng, 400);
    let cloud = PointCloud::new(3, &pts).unwrap();
    let cfg = MmlsConfig::new(2, 3);
    let r = vec![0.5, 0.5, 0.5 * 0.5 - 0.25 * 0.5 + 0.1];
    let frame = find_local_frame(&r, &cloud, &cfg).unwrap();
    let n = DVector::from_vec(plane_normal());
    // principal angles between span(E) and the plane: the normal component of E
    assert!((frame.basis.transpose() * &n).amax() <= 1e-8);
    assert!(frame.residual <= 1e-16, "residual {}", frame.residual);
}

#[test]
fn circle_frame_is_tangent() {
    let cloud = PointCloud::new(2, &circle_points(2000)).unwrap();
    let cfg = MmlsConfig::new(1, 2);
    let (h, mu, _) = cfg.resolve(2000).unwrap();
    let r = [1.0, 0.0];
    let frame = find_local_frame(&r, &cloud, &cfg).unwrap();
    // tangent at (1, 0) is the y direction; the angle is |E_x|
    assert!(frame.basis[(0, 0)].abs() <= 0.1 * h);
    let gap = common::dist(&frame.origin, &r);
    assert!(gap <= h * h, "|q - r| = {gap}, h = {h}");
    check_constraints(&frame, &r, mu, 3);
}

#[test]
fn frame_constraints_on_random_probes() {
    let manifolds = [
        ReferenceManifold::circle(1.0).unwrap(),
        ReferenceManifold::sphere(1.0).unwrap(),
        ReferenceManifold::graph(1, 2, 0.1).unwrap(),
        ReferenceManifold::graph(2, 3, 0.1).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (k, m) in manifolds.iter().enumerate() {
        let n = if m.intrinsic_dim() == 1 { 800 } else { 3000 };
        let sample = sample_manifold(m, n, 10 + k as u64).unwrap();
        let cfg = MmlsConfig::new(m.intrinsic_dim(), m.ambient_dim());
        let projector = MmlsProjector::new(sample.cloud.clone(), cfg).unwrap();
        let needed = if m.intrinsic_dim() == 1 { 3 } else { 6 };
        for i in 0..40 {
            let base = sample.cloud.point(i * 7).to_vec();
            let r: Vec<f64> = base.iter().map(|v| v + rng.random_range(-0.02..0.02)).collect();
            let frame = projector.frame(&r).unwrap();
            check_constraints(&frame, &r, projector.mu(), needed);
        }
    }
}

#[test]
fn far_probe_is_infeasible() {
    let cloud = PointCloud::new(2, &circle_points(200)).unwrap();
    let cfg = MmlsConfig::new(1, 2);
    assert!(matches!(find_local_frame(&[5.0, 5.0], &cloud, &cfg), Err(Error::Infeasible(_))));
    assert!(find_local_frame(&[1.0, 0.0, 0.0], &cloud, &cfg).is_err());
}

#[test]
fn bad_configs_are_rejected() {
    let cloud = PointCloud::new(2, &circle_points(200)).unwrap();
    assert!(MmlsProjector::new(cloud.clone(), MmlsConfig::new(2, 2)).is_err());
    assert!(MmlsProjector::new(cloud.clone(), MmlsConfig::new(1, 3)).is_err());
    let cfg = MmlsConfig { mu_factor: 0.5, ..MmlsConfig::new(1, 2) };
    assert!(MmlsProjector::new(cloud, cfg).is_err());
}

#[test]
fn graph_of_polynomial_is_reproduced() {
    // y = 0.3 x² + 0.1 x − 0.2 over the x axis
    let pts: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 199.0;
            vec![x, 0.3 * x * x + 0.1 * x - 0.2]
        })
        .collect();
    let cloud = PointCloud::new(2, &pts).unwrap();
    let h = 0.5;
    let cfg = MmlsConfig { bandwidth: Bandwidth::Fixed(h), ..MmlsConfig::new(1, 2) };
    let frame = LocalFrame::new(vec![0.0, 0.0], DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
    let poly = local_poly_fit(&frame, &cloud, &cfg).unwrap();
    assert!(poly.residual <= 1e-18, "residual {}", poly.residual);
    let want = [[0.0, h, 0.0], [-0.2, 0.1 * h, 0.3 * h * h]];
    for (got, want) in poly.coefficients.iter().zip(&want) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12, "{got:?} vs {want:?}");
        }
    }
    assert_eq!(poly.at_origin(), poly.coefficients.iter().map(|c| c[0]).collect::<Vec<_>>());
}

#[test]
fn degree_zero_fit_is_weighted_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-0.1..0.1)]).collect();
    let cloud = PointCloud::new(2, &pts).unwrap();
    let h = 0.4;
    let cfg = MmlsConfig { degree: 0, bandwidth: Bandwidth::Fixed(h), ..MmlsConfig::new(1, 2) };
    let frame = LocalFrame::new(vec![0.1, 0.0], DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
    let poly = local_poly_fit(&frame, &cloud, &cfg).unwrap();
    let mut sum = [0.0; 2];
    let mut total = 0.0;
    for p in pts.iter().filter(|p| common::dist(p, &[0.1, 0.0]) <= h) {
        let w = common::bump_weight(&[p[0] - 0.1], h);
        total += w;
        sum[0] += w * p[0];
        sum[1] += w * p[1];
    }
    let got = poly.at_origin();
    assert!((got[0] - sum[0] / total).abs() <= 1e-13 && (got[1] - sum[1] / total).abs() <= 1e-13);
}

#[test]
fn circle_fit_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cloud = sample_manifold(&ReferenceManifold::circle(1.0).unwrap(), 600, 6).unwrap().cloud;
    let cfg = MmlsConfig::new(1, 2);
    let projector = MmlsProjector::new(cloud.clone(), cfg).unwrap();
    let h = projector.bandwidth();
    for _ in 0..20 {
        let t = rng.random_range(0.0..2.0 * PI);
        let frame = projector.frame(&[t.cos(), t.sin()]).unwrap();
        let poly = projector.fit(&frame).unwrap();
        let e: Vec<f64> = frame.basis.column(0).iter().copied().collect();
        let (mut coords, mut targets, mut weights) = (vec![], vec![], vec![]);
        for p in cloud.points().filter(|p| common::dist(p, &frame.origin) <= h) {
            let x = vec![(p[0] - frame.origin[0]) * e[0] + (p[1] - frame.origin[1]) * e[1]];
            let w = common::bump_weight(&x, h);
            if w > 0.0 {
                coords.push(x);
                targets.push(p.to_vec());
                weights.push(w);
            }
        }
        let want = common::poly_fit_oracle(&coords, &targets, &weights, h, 2);
        for (g, w) in poly.coefficients.iter().flatten().zip(want.iter().flatten()) {
            assert!((g - w).abs() <= 1e-10, "{g} vs {w}");
        }
    }
}

#[test]
fn hyperplane_projection_lands_on_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts = plane_points(&mut rng, 400);
    let cloud = PointCloud::new(3, &pts).unwrap();
    let cfg = MmlsConfig::new(2, 3);
    let normal = plane_normal();
    for _ in 0..20 {
        let (x, y) = (rng.random_range(0.3..0.7), rng.random_range(0.3..0.7));
        let t = rng.random_range(-0.1..0.1);
        let r: Vec<f64> = [x, y, 0.5 * x - 0.25 * y + 0.1].iter().zip(&normal).map(|(a, b)| a + t * b).collect();
        let p = mmls_project(&r, &cloud, &cfg).unwrap();
        assert!(plane_offset(&p).abs() <= 1e-9);
    }
    // samples reproduce themselves
    let probes = PointCloud::new(3, &pts[..50]).unwrap();
    let rec = reconstruct_manifold(&cloud, &probes, &cfg).unwrap();
    assert_eq!(rec.failures(), 0);
    for (k, p) in rec.cloud.points().enumerate() {
        assert!(common::dist(p, &pts[rec.source[k]]) <= 1e-9);
    }
}

#[test]
fn circle_projection_refines() {
    let circle = ReferenceManifold::circle(1.0).unwrap();
    let probes: Vec<Vec<f64>> = circle_points(50).into_iter().map(|p| vec![p[0] * 1.0, p[1]]).collect();
    let err = |n: usize| {
        let cloud = sample_manifold(&circle, n, 8).unwrap().cloud;
        let projector = MmlsProjector::new(cloud, MmlsConfig::new(1, 2)).unwrap();
        probes
            .iter()
            .map(|r| (common::dist(&projector.project(r).unwrap(), &[0.0, 0.0]) - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(512), err(2048));
    assert!(coarse >= 4.0 * fine, "{coarse:e} -> {fine:e}");
}

#[test]
fn projection_contracts() {
    let cloud = sample_manifold(&ReferenceManifold::circle(1.0).unwrap(), 1000, 9).unwrap().cloud;
    let projector = MmlsProjector::new(cloud, MmlsConfig::new(1, 2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let t = rng.random_range(0.0..2.0 * PI);
        let rad = 1.0 + rng.random_range(-0.03..0.03);
        let r = [rad * t.cos(), rad * t.sin()];
        let p = projector.project(&r).unwrap();
        let pp = projector.project(&p).unwrap();
        assert!(common::dist(&pp, &p) <= common::dist(&p, &r), "{pp:?} {p:?} {r:?}");
    }
}

#[test]
fn dense_circle_reconstruction_beats_sampling_gap() {
    let sample = sample_manifold(&ReferenceManifold::circle(1.0).unwrap(), 2000, 10).unwrap();
    let mut angles: Vec<f64> = sample.params.iter().map(|p| p[0]).collect();
    angles.sort_by(f64::total_cmp);
    let mut gap = 2.0 * PI - (angles[angles.len() - 1] - angles[0]);
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    let probes = PointCloud::new(2, &circle_points(300)).unwrap();
    let rec = reconstruct_manifold(&sample.cloud, &probes, &MmlsConfig::new(1, 2)).unwrap();
    assert_eq!(rec.failures(), 0);
    let worst = rec.cloud.points().map(|p| (common::dist(p, &[0.0, 0.0]) - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < gap, "{worst} vs gap {gap}");
}

#[test]
fn empty_probe_set_is_fine() {
    let cloud = PointCloud::new(2, &circle_points(200)).unwrap();
    let probes = PointCloud::from_flat(2, vec![]).unwrap();
    let rec = reconstruct_manifold(&cloud, &probes, &MmlsConfig::new(1, 2)).unwrap();
    assert!(rec.cloud.is_empty() && rec.diagnostics.is_empty());
}

#[test]
fn failed_probes_are_reported_within_budget() {
    let cloud = PointCloud::new(2, &circle_points(400)).unwrap();
    let mut probes = circle_points(199);
    probes.push(vec![9.0, 9.0]);
    let probes = PointCloud::new(2, &probes).unwrap();
    let strict = MmlsConfig { max_failure_fraction: 0.0, ..MmlsConfig::new(1, 2) };
    assert!(matches!(reconstruct_manifold(&cloud, &probes, &strict), Err(Error::FailureBudget { .. })));
    // one failure in 200 probes is inside the default 1% budget
    let rec = reconstruct_manifold(&cloud, &probes, &MmlsConfig::new(1, 2)).unwrap();
    assert_eq!(rec.failures(), 1);
    assert!(rec.diagnostics[199].failure.as_deref().unwrap().contains("infeasible"));
    assert!(!rec.source.contains(&199));
}

#[test]
fn degree_one_circle_rate() {
    let mut cfg = MmlsConfig::new(1, 2);
    cfg.degree = 1;
    let plan = MmlsRatePlan::new((9..=13).map(|k| 1usize << k).collect(), 6, 11);
    let r = mmls_rate_experiment(&ReferenceManifold::circle(1.0).unwrap(), &cfg, &plan).unwrap();
    let slope = r.slope().unwrap();
    assert!((1.4..=2.6).contains(&slope), "slope {slope}");
    assert_eq!(r.experiment, "mmls");
}

#[test]
fn flat_graph_errors_stay_at_rounding_level() {
    let flat = ReferenceManifold::graph(1, 2, 0.0).unwrap();
    let plan = MmlsRatePlan::new(vec![256, 512, 1024, 2048], 2, 12);
    let r = mmls_rate_experiment(&flat, &MmlsConfig::new(1, 2), &plan).unwrap();
    assert!(r.records.iter().all(|t| t.statistic <= 1e-12), "{:?}", r.records);
}

fn rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    Rotation3::new(axis.normalize() * rng.random_range(0.0..PI))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn projection_is_rigid_motion_equivariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = sample_manifold(&ReferenceManifold::sphere(1.0).unwrap(), 1500, seed).unwrap();
        let rot = rotation(&mut rng);
        let shift = Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let moved: Vec<Vec<f64>> = sample
            .cloud
            .points()
            .map(|p| (rot * Vector3::from_column_slice(p) + shift).iter().copied().collect())
            .collect();
        let cfg = MmlsConfig::new(2, 3);
        let a = MmlsProjector::new(sample.cloud.clone(), cfg).unwrap();
        let b = MmlsProjector::new(PointCloud::new(3, &moved).unwrap(), cfg).unwrap();
        for i in 0..5 {
            let r: Vec<f64> = sample.cloud.point(i * 13).iter().map(|v| v * 1.01).collect();
            let rm: Vec<f64> = (rot * Vector3::from_column_slice(&r) + shift).iter().copied().collect();
            let pa = a.project(&r).unwrap();
            let pb = b.project(&rm).unwrap();
            let expect: Vec<f64> = (rot * Vector3::from_column_slice(&pa) + shift).iter().copied().collect();
            prop_assert!(common::dist(&pb, &expect) <= 1e-9, "{:?} vs {:?}", pb, expect);
        }
    }

    #[test]
    fn objective_history_is_nonincreasing(seed in any::<u64>()) {
        let sample = sample_manifold(&ReferenceManifold::graph(1, 2, 0.1).unwrap(), 600, seed).unwrap();
        let projector = MmlsProjector::new(sample.cloud.clone(), MmlsConfig::new(1, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // the graph has a boundary at u = 0 and u = 1; stay clear of it
        let interior: Vec<usize> = (0..600).filter(|&i| (0.2..0.8).contains(&sample.params[i][0])).take(10).collect();
        for i in interior {
            let r: Vec<f64> = sample.cloud.point(i).iter().map(|v| v + rng.random_range(-0.05..0.05)).collect();
            let frame = projector.frame(&r).unwrap();
            prop_assert!(frame.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!((frame.history.last().unwrap() - frame.residual).abs() <= 1e-15 * frame.residual.max(1.0));
        }
    }
}
