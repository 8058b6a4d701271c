//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's numerical code.

#![allow(dead_code)]

/// Euclidean distance.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn brute_range(points: &[Vec<f64>], center: &[f64], radius: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| dist(&points[i], center) <= radius).collect()
}

pub fn brute_separation(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(dist(&points[i], &points[j]));
        }
    }
    best
}

pub fn brute_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter().map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// exp(1/(ρ − 1)) for ρ < 1, else 0.
pub fn bump(rho: f64) -> f64 {
    if rho < 1.0 {
        (1.0 / (rho - 1.0)).exp()
    } else {
        0.0
    }
}

/// Smooth-bump weight of an offset with support radius `radius`.
pub fn bump_weight(offset: &[f64], radius: f64) -> f64 {
    bump(offset.iter().map(|v| v * v).sum::<f64>() / (radius * radius))
}

/// All exponent tuples with total degree ≤ `degree`, graded, then
/// lexicographic.
pub fn exponents(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(dim: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim - 1 {
            let used: u32 = prefix.iter().sum();
            let mut e = prefix.clone();
            e.push(total - used);
            out.push(e);
            return;
        }
        let used: u32 = prefix.iter().sum();
        for k in 0..=(total - used) {
            prefix.push(k);
            rec(dim, total, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        let mut level = Vec::new();
        rec(dim, total, &mut Vec::new(), &mut level);
        level.sort();
        out.extend(level);
    }
    out
}

pub fn monomial(exp: &[u32], x: &[f64]) -> f64 {
    exp.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
}

/// Gaussian elimination with partial pivoting on a copy of `a`.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &r)| {
            let mut row = row.clone();
            row.push(r);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Weighted moment matrix by direct summation over `points` inside the
/// support, with scaled monomials `((x − x̂)/h)^α` and the smooth bump.
pub fn naive_gram(points: &[Vec<f64>], center: &[f64], h: f64, degree: usize, per_count: bool) -> Vec<Vec<f64>> {
    let exps = exponents(center.len(), degree);
    let m = exps.len();
    let mut g = vec![vec![0.0; m]; m];
    let mut count = 0usize;
    for p in points {
        if dist(p, center) > h {
            continue;
        }
        count += 1;
        let off: Vec<f64> = p.iter().zip(center).map(|(a, b)| (a - b) / h).collect();
        let w = bump_weight(&off, 1.0);
        for a in 0..m {
            for b in 0..m {
                g[a][b] += w * monomial(&exps[a], &off) * monomial(&exps[b], &off);
            }
        }
    }
    if per_count {
        for row in g.iter_mut() {
            for v in row.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    g
}

/// Shape values from the weighted normal equations with unscaled monomials:
/// a = W X (Xᵀ W X)⁻¹ e₀, for the points within distance h of `center`
/// (returned in ascending index order).
pub fn normal_equation_shapes(points: &[Vec<f64>], center: &[f64], h: f64, degree: usize) -> Vec<(usize, f64)> {
    let exps = exponents(center.len(), degree);
    let m = exps.len();
    let idx: Vec<usize> = (0..points.len()).filter(|&i| dist(&points[i], center) <= h).collect();
    let rows: Vec<(Vec<f64>, f64)> = idx
        .iter()
        .map(|&i| {
            let off: Vec<f64> = points[i].iter().zip(center).map(|(a, b)| a - b).collect();
            (exps.iter().map(|e| monomial(e, &off)).collect(), bump_weight(&off, h))
        })
        .collect();
    let mut xtwx = vec![vec![0.0; m]; m];
    for (x, w) in &rows {
        for a in 0..m {
            for b in 0..m {
                xtwx[a][b] += w * x[a] * x[b];
            }
        }
    }
    let mut e0 = vec![0.0; m];
    e0[0] = 1.0;
    let c = solve(&xtwx, &e0);
    idx.iter().zip(&rows).map(|(&i, (x, w))| (i, w * x.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())).collect()
}

/// Coefficients (per output coordinate) of the weighted fit
/// `x_i ↦ r_i` over the scaled local basis, by dense normal equations.
pub fn poly_fit_oracle(
    coords: &[Vec<f64>],
    targets: &[Vec<f64>],
    weights: &[f64],
    h: f64,
    degree: usize,
) -> Vec<Vec<f64>> {
    let exps = exponents(coords[0].len(), degree);
    let m = exps.len();
    let big_d = targets[0].len();
    let basis: Vec<Vec<f64>> = coords
        .iter()
        .map(|x| {
            let s: Vec<f64> = x.iter().map(|v| v / h).collect();
            exps.iter().map(|e| monomial(e, &s)).collect()
        })
        .collect();
    let mut a = vec![vec![0.0; m]; m];
    for (p, w) in basis.iter().zip(weights) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += w * p[i] * p[j];
            }
        }
    }
    (0..big_d)
        .map(|k| {
            let b: Vec<f64> = (0..m)
                .map(|i| basis.iter().zip(weights).zip(targets).map(|((p, w), t)| w * p[i] * t[k]).sum())
                .collect();
            solve(&a, &b)
        })
        .collect()
}

pub fn uniform_points(rng: &mut impl rand::Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}
