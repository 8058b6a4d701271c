use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use super::rng::SampleRng;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ManifoldKind {
    /// Circle of the given radius centred at the origin of ℝ².
    Circle { radius: f64 },
    /// Sphere of the given radius centred at the origin of ℝ³.
    Sphere { radius: f64 },
    /// Graph `u ↦ (u, φ(u))` of a periodic height function over the torus
    /// [0, 1)^d, embedded in ℝ^D with `φ_c(u) = a · Π_i sin(2π u_i + cπ/4)`.
    Graph { intrinsic: usize, ambient: usize, amplitude: f64 },
}

/// A closed reference manifold with exact membership and distance oracles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceManifold {
    kind: ManifoldKind,
}

/// Manifold samples with the parameters that generated them.
#[derive(Clone, Debug)]
pub struct ManifoldSample {
    pub cloud: PointCloud,
    /// Angle for the circle, (polar, azimuth) for the sphere, `u` for graphs.
    pub params: Vec<Vec<f64>>,
}

impl ReferenceManifold {
    pub fn new(kind: ManifoldKind) -> Result<Self> {
        match kind {
            ManifoldKind::Circle { radius } | ManifoldKind::Sphere { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::arg(format!("radius must be positive, got {radius}")));
                }
            }
            ManifoldKind::Graph { intrinsic, ambient, amplitude } => {
                if !(1..=2).contains(&intrinsic) || ambient <= intrinsic {
                    return Err(Error::arg(format!(
                        "graph manifolds need d in {{1, 2}} and D > d, got d={intrinsic} D={ambient}"
                    )));
                }
                if !amplitude.is_finite() {
                    return Err(Error::arg("graph amplitude must be finite"));
                }
            }
        }
        Ok(ReferenceManifold { kind })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        ReferenceManifold::new(ManifoldKind::Circle { radius })
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        ReferenceManifold::new(ManifoldKind::Sphere { radius })
    }

    pub fn graph(intrinsic: usize, ambient: usize, amplitude: f64) -> Result<Self> {
        ReferenceManifold::new(ManifoldKind::Graph { intrinsic, ambient, amplitude })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle { .. } => 1,
            ManifoldKind::Sphere { .. } => 2,
            ManifoldKind::Graph { intrinsic, .. } => intrinsic,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle { .. } => 2,
            ManifoldKind::Sphere { .. } => 3,
            ManifoldKind::Graph { ambient, .. } => ambient,
        }
    }

    /// Smoothness class; `None` means C^∞ (all shipped manifolds are).
    pub fn smoothness(&self) -> Option<u32> {
        None
    }

    /// The point with parameters `params`.
    pub fn embed(&self, params: &[f64]) -> Vec<f64> {
        match self.kind {
            ManifoldKind::Circle { radius } => vec![radius * params[0].cos(), radius * params[0].sin()],
            ManifoldKind::Sphere { radius } => {
                let (t, p) = (params[0], params[1]);
                vec![radius * t.sin() * p.cos(), radius * t.sin() * p.sin(), radius * t.cos()]
            }
            ManifoldKind::Graph { .. } => {
                let mut out = params.to_vec();
                out.extend(self.heights(params));
                out
            }
        }
    }

    fn heights(&self, u: &[f64]) -> Vec<f64> {
        let ManifoldKind::Graph { intrinsic, ambient, amplitude } = self.kind else {
            return Vec::new();
        };
        (0..ambient - intrinsic)
            .map(|c| amplitude * u.iter().map(|&ui| (2.0 * PI * ui + phase(c)).sin()).product::<f64>())
            .collect()
    }

    /// Height values, first derivatives `[c][i]` and second derivatives `[c][i][k]`.
    #[allow(clippy::type_complexity)]
    fn height_jets(&self, u: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
        let ManifoldKind::Graph { intrinsic: d, ambient, amplitude } = self.kind else {
            return (Vec::new(), Vec::new(), Vec::new());
        };
        let w = 2.0 * PI;
        let (mut val, mut grad, mut hess) = (Vec::new(), Vec::new(), Vec::new());
        for c in 0..ambient - d {
            let s: Vec<f64> = u.iter().map(|&ui| (w * ui + phase(c)).sin()).collect();
            let co: Vec<f64> = u.iter().map(|&ui| (w * ui + phase(c)).cos()).collect();
            let prod_except = |skip: &[usize]| -> f64 { (0..d).filter(|k| !skip.contains(k)).map(|k| s[k]).product() };
            val.push(amplitude * s.iter().product::<f64>());
            grad.push((0..d).map(|i| amplitude * w * co[i] * prod_except(&[i])).collect());
            hess.push(
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|k| {
                                if i == k {
                                    -amplitude * w * w * s.iter().product::<f64>()
                                } else {
                                    amplitude * w * w * co[i] * co[k] * prod_except(&[i, k])
                                }
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        (val, grad, hess)
    }

    /// Exact Euclidean distance from `p` to the manifold. Closed form for the
    /// circle and sphere; for graphs a grid search followed by Newton
    /// iterations on the squared distance, converged well below 1e-10.
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Circle { radius } | ManifoldKind::Sphere { radius } => {
                (p.iter().map(|v| v * v).sum::<f64>().sqrt() - radius).abs()
            }
            ManifoldKind::Graph { intrinsic, .. } => self.graph_foot(p, intrinsic).1,
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.ambient_dim() && self.distance(p) <= tol
    }

    fn graph_foot(&self, p: &[f64], d: usize) -> (Vec<f64>, f64) {
        let dist_at = |u: &[f64]| crate::geometry::euclidean(&self.embed(u), p);
        let pu = &p[..d];
        // any minimiser is within the distance to the point straight below p
        let reach = dist_at(pu).min(0.5);
        let steps: usize = if d == 1 { 400 } else { 60 };
        let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let u: Vec<f64> = (0..d).map(|i| pu[i] - reach + 2.0 * reach * idx[i] as f64 / steps as f64).collect();
            candidates.push((dist_at(&u), u));
            let mut i = 0;
            while i < d {
                idx[i] += 1;
                if idx[i] <= steps {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (pu.to_vec(), dist_at(pu));
        for (_, start) in candidates.into_iter().take(4) {
            let u = self.newton_foot(p, d, start);
            let dist = dist_at(&u);
            if dist < best.1 {
                best = (u, dist);
            }
        }
        best
    }

    fn newton_foot(&self, p: &[f64], d: usize, mut u: Vec<f64>) -> Vec<f64> {
        let objective = |u: &[f64]| 0.5 * crate::geometry::squared_euclidean(&self.embed(u), p);
        for _ in 0..100 {
            let (val, grad, hess) = self.height_jets(&u);
            let r_h: Vec<f64> = val.iter().zip(&p[d..]).map(|(a, b)| a - b).collect();
            let mut g = vec![0.0; d];
            let mut h = vec![vec![0.0; d]; d];
            for i in 0..d {
                g[i] = u[i] - p[i] + r_h.iter().enumerate().map(|(c, r)| r * grad[c][i]).sum::<f64>();
                for k in 0..d {
                    h[i][k] = if i == k { 1.0 } else { 0.0 }
                        + (0..r_h.len()).map(|c| grad[c][i] * grad[c][k] + r_h[c] * hess[c][i][k]).sum::<f64>();
                }
            }
            let step = solve_small(&h, &g).filter(|s| s.iter().all(|v| v.is_finite()));
            // fall back to gradient descent where the Hessian is indefinite
            let step = match step {
                Some(s) if s.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() > 0.0 => s,
                _ => g.clone(),
            };
            let f0 = objective(&u);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let cand: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                if objective(&cand) <= f0 {
                    moved = cand != u;
                    u = cand;
                    break;
                }
                t *= 0.5;
            }
            let size = step.iter().map(|v| v * v).sum::<f64>().sqrt() * t;
            if !moved || size < 1e-15 {
                break;
            }
        }
        u
    }

    /// Total length / area of the manifold (area by quadrature for graphs).
    pub fn measure(&self) -> f64 {
        match self.kind {
            ManifoldKind::Circle { radius } => 2.0 * PI * radius,
            ManifoldKind::Sphere { radius } => 4.0 * PI * radius * radius,
            ManifoldKind::Graph { intrinsic, .. } => {
                let m = if intrinsic == 1 { 4000 } else { 200 };
                let grid = param_grid(intrinsic, m);
                grid.iter().map(|u| self.area_element(u)).sum::<f64>() / grid.len() as f64
            }
        }
    }

    fn area_element(&self, u: &[f64]) -> f64 {
        let (_, grad, _) = self.height_jets(u);
        let d = u.len();
        let g: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|k| if i == k { 1.0 } else { 0.0 } + grad.iter().map(|gc| gc[i] * gc[k]).sum::<f64>())
                    .collect()
            })
            .collect();
        match d {
            1 => g[0][0].sqrt(),
            _ => (g[0][0] * g[1][1] - g[0][1] * g[1][0]).sqrt(),
        }
    }

    /// A deterministic, roughly even set of about `m` points on the manifold,
    /// used as candidates when measuring fill distance over the manifold.
    pub fn dense_points(&self, m: usize) -> Vec<f64> {
        let m = m.max(2);
        match self.kind {
            ManifoldKind::Circle { .. } => (0..m).flat_map(|k| self.embed(&[2.0 * PI * k as f64 / m as f64])).collect(),
            ManifoldKind::Sphere { .. } => {
                // Fibonacci lattice
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..m)
                    .flat_map(|k| {
                        let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                        self.embed(&[z.acos(), golden * k as f64])
                    })
                    .collect()
            }
            ManifoldKind::Graph { intrinsic, .. } => {
                let per_axis = if intrinsic == 1 { m } else { (m as f64).sqrt().ceil() as usize };
                param_grid(intrinsic, per_axis).iter().flat_map(|u| self.embed(u)).collect()
            }
        }
    }

    /// `n` i.i.d. draws from the normalised area measure.
    pub fn sample(&self, n: usize, seed: u64) -> Result<ManifoldSample> {
        let mut rng = SampleRng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with(&self, n: usize, rng: &mut SampleRng) -> Result<ManifoldSample> {
        if n == 0 {
            return Err(Error::arg("sample size must be positive"));
        }
        let mut coords = Vec::with_capacity(n * self.ambient_dim());
        let mut params = Vec::with_capacity(n);
        match self.kind {
            ManifoldKind::Circle { .. } => {
                for _ in 0..n {
                    let t = 2.0 * PI * rng.random::<f64>();
                    coords.extend(self.embed(&[t]));
                    params.push(vec![t]);
                }
            }
            ManifoldKind::Sphere { radius } => {
                for _ in 0..n {
                    let g: [f64; 3] =
                        [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
                    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                    let p = [radius * g[0] / norm, radius * g[1] / norm, radius * g[2] / norm];
                    params.push(vec![(g[2] / norm).clamp(-1.0, 1.0).acos(), g[1].atan2(g[0])]);
                    coords.extend_from_slice(&p);
                }
            }
            ManifoldKind::Graph { intrinsic, ambient, amplitude } => {
                let slope = 2.0 * PI * amplitude;
                // Hadamard bound on sqrt(det(I + JᵀJ))
                let envelope = (1.0 + (ambient - intrinsic) as f64 * slope * slope).powf(intrinsic as f64 / 2.0);
                while params.len() < n {
                    let u: Vec<f64> = (0..intrinsic).map(|_| rng.random::<f64>()).collect();
                    if rng.random::<f64>() * envelope <= self.area_element(&u) {
                        coords.extend(self.embed(&u));
                        params.push(u);
                    }
                }
            }
        }
        Ok(ManifoldSample { cloud: PointCloud::from_flat(self.ambient_dim(), coords)?, params })
    }
}

/// Free-function form of [`ReferenceManifold::sample`].
pub fn sample_manifold(manifold: &ReferenceManifold, n: usize, seed: u64) -> Result<ManifoldSample> {
    manifold.sample(n, seed)
}

fn phase(c: usize) -> f64 {
    c as f64 * PI / 4.0
}

fn param_grid(d: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_axis).map(|k| (k as f64 + 0.5) / per_axis as f64).collect();
    if d == 1 {
        axis.iter().map(|&a| vec![a]).collect()
    } else {
        axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect()
    }
}

fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    match b.len() {
        1 => (a[0][0] != 0.0).then(|| vec![b[0] / a[0][0]]),
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            (det != 0.0).then(|| vec![(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
        }
        _ => None,
    }
}
