//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    scale(a, 1.0 / n)
}

/// Orthonormal basis (as rows) of the span of `rows`, by modified Gram-Schmidt
/// with re-orthogonalisation. Vectors whose residual falls below `tol` times
/// their original length are dropped.
pub fn orthonormal_span(rows: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let len = norm(r);
        if len == 0.0 {
            continue;
        }
        let mut v = r.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let res = norm(&v);
        if res > tol * len.max(1.0) {
            basis.push(scale(&v, 1.0 / res));
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of the span of orthonormal
/// `rows`, obtained by sweeping the standard basis. Deterministic.
pub fn orthogonal_complement(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = rows.to_vec();
    let k = rows.len();
    // Prefer standard basis vectors least aligned with the subspace.
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let w: f64 = rows.iter().map(|r| r[i] * r[i]).sum();
            (w, i)
        })
        .collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (_, i) in order {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push(e);
    }
    let span = orthonormal_span(&all, 1e-9);
    span[k.min(span.len())..].to_vec()
}

/// `n x n` orthogonal projection onto the span of orthonormal rows.
pub fn projector(rows: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for r in rows {
        let v = DVector::from_column_slice(r);
        p += &v * v.transpose();
    }
    p
}

pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * smax.max(1.0)).count()
}

pub fn det(rows: &[Vec<f64>]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    DMatrix::from_fn(k, k, |i, j| rows[i][j]).determinant()
}

/// Evenly spaced unit directions: `count` angles on the circle for `n = 2`, a
/// Fibonacci lattice on the sphere for `n = 3`.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            // Coordinate and diagonal directions; only used as a fallback.
            let mut out = Vec::new();
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                out.push(e.clone());
                e[i] = -1.0;
                out.push(e);
            }
            out
        }
    }
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}
