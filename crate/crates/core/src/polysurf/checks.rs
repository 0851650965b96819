//! Root-count and area checks: Crofton cross-validation of directional
//! area, the degree bound on hypersurface area, and the bisection-area
//! inequalities on the disk and on ellipses.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::Ellipsoid;
use crate::linalg;
use crate::rng;

use super::mesh::{directional_area, mesh_zero_set, MeshOptions, ZeroSetMesh};
use super::roots::line_roots;
use super::{Cube, PolyNVars};

const RESAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CroftonEstimate {
    /// Mean root count times the cross-section measure.
    pub value: f64,
    pub lines: usize,
    /// Largest root count seen on a single line.
    pub max_count: usize,
    /// Lines that stayed degenerate after resampling.
    pub degenerate: usize,
}

fn half_width(q: &Cube, u: &[f64]) -> f64 {
    0.5 * q.side * u.iter().map(|x| x.abs()).sum::<f64>()
}

/// Orthonormal basis of `v^⊥` for `n ∈ {2, 3}`.
fn perp_basis(v: &[f64]) -> Vec<Vec<f64>> {
    linalg::orthogonal_complement(&[v.to_vec()], v.len())
}

/// Average root count of `p` on lines parallel to `v` crossing `Q`, times
/// the measure of the family's cross-section. Offsets are stratified.
pub fn crofton_root_oracle(p: &PolyNVars, q: &Cube, v: &[f64], lines: usize, seed: u64) -> Result<CroftonEstimate> {
    let n = q.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if v.len() != n || p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if v.len() != n { v.len() } else { p.dim() },
        });
    }
    if (linalg::norm(v) - 1.0).abs() > 1e-9 {
        return Err(invalid("direction must be a unit vector"));
    }
    if lines == 0 {
        return Err(invalid("need at least one line"));
    }
    let basis = perp_basis(v);
    let widths: Vec<f64> = basis.iter().map(|b| half_width(q, b)).collect();
    let cross: f64 = widths.iter().map(|w| 2.0 * w).product();
    let c = q.center();
    // Stratify on a grid of `side^(n-1)` strata.
    let side = ((lines as f64).powf(1.0 / (n - 1) as f64).round() as usize).max(1);
    let total = side.pow((n - 1) as u32);
    let deg = p.degree();
    let counts: Vec<(usize, bool)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(seed, i as u64);
            let cell: Vec<usize> = (0..n - 1).map(|k| (i / side.pow(k as u32)) % side).collect();
            let mut last = (0, true);
            for _ in 0..=RESAMPLES {
                let mut a = c.clone();
                for (k, b) in basis.iter().enumerate() {
                    let u: f64 = r.random();
                    let s = -widths[k] + (cell[k] as f64 + u) * 2.0 * widths[k] / side as f64;
                    for (ai, bi) in a.iter_mut().zip(b) {
                        *ai += s * bi;
                    }
                }
                let Some((lo, hi)) = q.clip_line(&a, v) else {
                    last = (0, false);
                    break;
                };
                let roots = line_roots(p, &a, v, lo, hi);
                last = (roots.count().min(deg), roots.degenerate);
                if !roots.degenerate {
                    break;
                }
            }
            last
        })
        .collect();
    let sum: usize = counts.iter().map(|c| c.0).sum();
    Ok(CroftonEstimate {
        value: sum as f64 / total as f64 * cross,
        lines: total,
        max_count: counts.iter().map(|c| c.0).max().unwrap_or(0),
        degenerate: counts.iter().filter(|c| c.1).count(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BezoutReport {
    pub area: f64,
    pub degree: usize,
    /// `area / degree`.
    pub ratio: f64,
    pub lines_checked: usize,
    pub max_count: usize,
    /// Lines whose distinct root count exceeded the degree.
    pub violations: usize,
}

/// Mesh area against `deg p`, with the per-line root bound checked on
/// `lines` random lines through `Q`.
pub fn bezout_area_check(p: &PolyNVars, q: &Cube, opts: MeshOptions, lines: usize, seed: u64) -> Result<BezoutReport> {
    let mesh = mesh_zero_set(p, q, opts)?;
    let deg = p.degree();
    if deg == 0 {
        return Err(invalid("constant polynomial"));
    }
    let n = q.dim();
    let c = q.center();
    let rad = 0.5 * q.side * (n as f64).sqrt();
    let counts: Vec<usize> = (0..lines)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(seed, i as u64);
            let v = rng::unit_vec(&mut r, n);
            let off = rng::unit_vec(&mut r, n);
            let s: f64 = r.random_range(-rad..rad);
            let a: Vec<f64> = c.iter().zip(&off).map(|(ci, oi)| ci + s * oi).collect();
            match q.clip_line(&a, &v) {
                Some((lo, hi)) => line_roots(p, &a, &v, lo, hi).count(),
                None => 0,
            }
        })
        .collect();
    let area = mesh.total_area();
    Ok(BezoutReport {
        area,
        degree: deg,
        ratio: area / deg as f64,
        lines_checked: lines,
        max_count: counts.iter().copied().max().unwrap_or(0),
        violations: counts.iter().filter(|&&k| k > deg).count(),
    })
}

/// Length of the part of segment `a b` with `xᵀ A x <= 1`.
fn clipped_length(a: &[f64], b: &[f64], shape: &[[f64; 2]; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let quad = |x: &[f64], y: &[f64]| {
        x[0] * (shape[0][0] * y[0] + shape[0][1] * y[1]) + x[1] * (shape[1][0] * y[0] + shape[1][1] * y[1])
    };
    let (qa, qb, qc) = (quad(&d, &d), 2.0 * quad(a, &d), quad(a, a) - 1.0);
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if qa <= 0.0 {
        return if qc <= 0.0 { len } else { 0.0 };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let (t0, t1) = ((-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa));
    let (lo, hi) = (t0.max(0.0), t1.min(1.0));
    if hi > lo {
        (hi - lo) * len
    } else {
        0.0
    }
}

fn sign_fractions(p: &PolyNVars, shape: &[[f64; 2]; 2], bound: f64, samples: usize, seed: u64) -> (f64, f64, f64) {
    const CHUNKS: usize = 64;
    let per = samples.div_ceil(CHUNKS);
    let (pos, neg, hit) = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::substream(seed, c as u64);
            let (mut pos, mut neg, mut hit) = (0usize, 0usize, 0usize);
            for _ in 0..per {
                let x = [r.random_range(-bound..bound), r.random_range(-bound..bound)];
                let q = x[0] * (shape[0][0] * x[0] + shape[0][1] * x[1])
                    + x[1] * (shape[1][0] * x[0] + shape[1][1] * x[1]);
                if q > 1.0 {
                    continue;
                }
                hit += 1;
                let v = p.eval(&x);
                if v > 0.0 {
                    pos += 1;
                } else if v < 0.0 {
                    neg += 1;
                }
            }
            (pos, neg, hit)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let h = hit.max(1) as f64;
    (pos as f64 / h, neg as f64 / h, h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionCheck {
    /// Fractions of the unit disk where `p > 0` and `p < 0`.
    pub a: f64,
    pub b: f64,
    pub stderr: f64,
    /// Meshed length of `Z_p` inside the unit disk.
    pub lhs: f64,
    /// `π (√a + √b − 1)`.
    pub rhs: f64,
    pub holds: bool,
}

fn disk_length(mesh: &ZeroSetMesh, shape: &[[f64; 2]; 2]) -> f64 {
    let total = mesh.total_area();
    let raw: f64 = mesh
        .facets
        .iter()
        .map(|f| linalg::norm(&linalg::sub(&f.vertices[1], &f.vertices[0])))
        .sum();
    // Undo any redistribution of discarded facets proportionally.
    let scale = if raw > 0.0 { total / raw } else { 1.0 };
    mesh.facets
        .iter()
        .map(|f| clipped_length(&f.vertices[0], &f.vertices[1], shape))
        .sum::<f64>()
        * scale
}

/// Isoperimetric bisection bound in the unit disk of the plane.
pub fn bisection_area_check(p: &PolyNVars, opts: MeshOptions, samples: usize, seed: u64) -> Result<BisectionCheck> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension(p.dim()));
    }
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let (a, b, hits) = sign_fractions(p, &id, 1.0, samples, seed);
    let mesh = mesh_zero_set(p, &Cube::centered(2, 2.0), opts)?;
    let lhs = disk_length(&mesh, &id);
    let rhs = std::f64::consts::PI * (a.sqrt() + b.sqrt() - 1.0);
    let stderr = (a.max(b) * (1.0 - a.max(b)) / hits).sqrt();
    Ok(BisectionCheck {
        a,
        b,
        stderr,
        lhs,
        rhs,
        holds: lhs >= rhs * (1.0 - 3.0 * stderr),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseBisection {
    /// Fractions of `E` where `p > 0` and `p < 0`.
    pub a: f64,
    pub b: f64,
    /// `Σ_j |<v_j, N(Z_p ∩ E)>|` over the semi-axis vectors `v_j`.
    pub lhs: f64,
    pub volume: f64,
    /// `lhs / vol(E)`.
    pub ratio: f64,
}

/// Directional areas of `Z_p ∩ E` along the semi-axes of a planar ellipse.
pub fn ellipse_bisection_check(
    p: &PolyNVars,
    e: &Ellipsoid,
    opts: MeshOptions,
    samples: usize,
    seed: u64,
) -> Result<EllipseBisection> {
    if p.dim() != 2 || e.shape().nrows() != 2 {
        return Err(Error::UnsupportedDimension(p.dim().max(e.shape().nrows())));
    }
    let m = e.shape();
    let shape = [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(invalid("ellipse must be bounded"));
    }
    let axes: Vec<Vec<f64>> = (0..2)
        .map(|j| {
            let len = 1.0 / eig.eigenvalues[j].sqrt();
            vec![eig.eigenvectors[(0, j)] * len, eig.eigenvectors[(1, j)] * len]
        })
        .collect();
    let bound = axes.iter().map(|v| linalg::norm(v)).fold(0.0, f64::max);
    let (a, b, _) = sign_fractions(p, &shape, bound, samples, seed);
    let mesh = mesh_zero_set(p, &Cube::centered(2, 2.0 * bound), opts)?;
    let kept: f64 = mesh.total_area();
    let raw: f64 = mesh
        .facets
        .iter()
        .map(|f| linalg::norm(&linalg::sub(&f.vertices[1], &f.vertices[0])))
        .sum();
    let scale = if raw > 0.0 { kept / raw } else { 1.0 };
    let lhs: f64 = mesh
        .facets
        .iter()
        .map(|f| {
            let len = clipped_length(&f.vertices[0], &f.vertices[1], &shape) * scale;
            axes.iter().map(|v| len * linalg::dot(v, &f.normal).abs()).sum::<f64>()
        })
        .sum();
    let volume = std::f64::consts::PI * axes.iter().map(|v| linalg::norm(v)).product::<f64>();
    Ok(EllipseBisection {
        a,
        b,
        lhs,
        volume,
        ratio: lhs / volume,
    })
}

/// Directional area of `p`'s mesh in `Q` next to the Crofton estimate.
pub fn crofton_agreement(p: &PolyNVars, q: &Cube, v: &[f64], opts: MeshOptions, lines: usize, seed: u64) -> Result<(f64, CroftonEstimate)> {
    let mesh = mesh_zero_set(p, q, opts)?;
    Ok((directional_area(&mesh, v), crofton_root_oracle(p, q, v, lines, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn circle(rho: f64) -> PolyNVars {
        PolyNVars::new(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -rho * rho)]).unwrap()
    }

    pub(crate) fn random_poly(deg: u32, seed: u64) -> PolyNVars {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for i in 0..=deg {
            for j in 0..=deg - i {
                terms.push((vec![i, j], r.random_range(-1.0..1.0)));
            }
        }
        PolyNVars::new(2, terms).unwrap()
    }

    #[test]
    fn crofton_examples() {
        let unit = Cube::centered(2, 1.0);
        let p = PolyNVars::affine(&[1.0, 0.0], 0.0).unwrap();
        let est = crofton_root_oracle(&p, &unit, &[1.0, 0.0], 200, 1).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        let rho = 0.3;
        for t in [0.0, 0.7] {
            let v = [f64::cos(t), f64::sin(t)];
            let est = crofton_root_oracle(&circle(rho), &unit, &v, 2000, 2).unwrap();
            assert!((est.value / (4.0 * rho) - 1.0).abs() < 0.02, "{}", est.value);
            assert_eq!(est.max_count, 2);
        }
    }

    #[test]
    fn crofton_matches_mesh() {
        let q = Cube::centered(2, 2.0);
        for seed in 0..3 {
            let p = random_poly(4, seed);
            let v = [0.6, 0.8];
            let (area, est) = crofton_agreement(&p, &q, &v, MeshOptions { cells: 64, check_convergence: false }, 4000, seed).unwrap();
            assert!((est.value / area - 1.0).abs() < 0.03, "seed {seed}: {} vs {area}", est.value);
        }
    }

    #[test]
    fn crofton_in_space() {
        let p = PolyNVars::new(
            3,
            vec![(vec![2, 0, 0], 1.0), (vec![0, 2, 0], 1.0), (vec![0, 0, 2], 1.0), (vec![0, 0, 0], -0.16)],
        )
        .unwrap();
        let est = crofton_root_oracle(&p, &Cube::centered(3, 1.0), &[0.0, 0.0, 1.0], 4000, 3).unwrap();
        // Projected area of the sphere, counted twice.
        let exact = 2.0 * std::f64::consts::PI * 0.16;
        assert!((est.value / exact - 1.0).abs() < 0.02, "{}", est.value);
    }

    #[test]
    fn bezout_examples() {
        let unit = Cube::centered(2, 1.0);
        let p = PolyNVars::affine(&[1.0, 0.0], 0.0).unwrap();
        let rep = bezout_area_check(&p, &unit, MeshOptions::default(), 50, 0).unwrap();
        assert!((rep.ratio - 1.0).abs() < 1e-9);
        let d = 5;
        let lines: Vec<_> = (1..=d)
            .map(|i| vec![(vec![1, 0], 1.0), (vec![0, 0], -(i as f64) / (d + 1) as f64 + 0.5)])
            .collect();
        let par = PolyNVars::from_factors(2, lines).unwrap();
        let rep = bezout_area_check(&par, &unit, MeshOptions::default(), 100, 0).unwrap();
        assert!((rep.ratio - 1.0).abs() < 1e-9, "{}", rep.ratio);
        assert_eq!(rep.violations, 0);
        let rep = bezout_area_check(&random_poly(6, 9), &Cube::centered(2, 2.0), MeshOptions::default(), 100, 1).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.max_count <= 6);
    }

    #[test]
    fn bisection_examples() {
        let p = PolyNVars::affine(&[1.0, 0.0], 0.0).unwrap();
        let c = bisection_area_check(&p, MeshOptions::default(), 40_000, 0).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-9, "{}", c.lhs);
        assert!((c.rhs - (2f64.sqrt() - 1.0) * std::f64::consts::PI).abs() < 0.02);
        assert!(c.holds);
        let pos = PolyNVars::new(2, vec![(vec![2, 0], 1.0), (vec![0, 0], 1.0)]).unwrap();
        let c = bisection_area_check(&pos, MeshOptions::default(), 10_000, 0).unwrap();
        assert_eq!((c.a, c.b, c.lhs), (1.0, 0.0, 0.0));
        assert!(c.rhs.abs() < 1e-12 && c.holds);
    }

    #[test]
    fn ellipse_axes_of_a_diameter() {
        // The x-axis bisects the ellipse with semi-axes (2, 1); its normal
        // is e2, so only the short axis contributes: 1 * 4.
        let e = Ellipsoid::from_semi_axes(&[2.0, 1.0]).unwrap();
        let p = PolyNVars::affine(&[0.0, 1.0], 0.0).unwrap();
        let r = ellipse_bisection_check(&p, &e, MeshOptions::default(), 20_000, 0).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-6, "{}", r.lhs);
        assert!((r.a - 0.5).abs() < 0.02);
        assert!((r.volume - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
