//! Maximum-volume inscribed ellipsoid of a symmetric body, computed as the
//! polar of the minimum-volume enclosing ellipsoid of sampled polar points.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg;

use super::{ConvexBodyOracle, Ellipsoid};

#[derive(Debug, Clone, Copy)]
pub struct JohnOptions {
    /// Support directions; `0` picks 720 in the plane, 2562 in space.
    pub directions: usize,
    pub iters: usize,
    pub tol: f64,
}

impl Default for JohnOptions {
    fn default() -> Self {
        Self {
            directions: 0,
            iters: 200_000,
            tol: 1e-10,
        }
    }
}

fn default_directions(n: usize) -> usize {
    if n == 2 {
        720
    } else {
        2562
    }
}

/// Centred minimum-volume enclosing ellipsoid `{yᵀ B y <= 1}` of the points
/// `±p_i`, by Frank-Wolfe with away steps on the dual weights. Returns
/// `X = Σ u_i p_i p_iᵀ`; then `B = X^{-1} / n`.
fn centred_mvee(points: &[DVector<f64>], iters: usize, tol: f64) -> Result<(DMatrix<f64>, bool)> {
    let n = points[0].len();
    let m = points.len();
    let nf = n as f64;
    let mut u = vec![1.0 / m as f64; m];
    let mut x = DMatrix::zeros(n, n);
    for (p, &w) in points.iter().zip(&u) {
        x += p * p.transpose() * w;
    }
    let mut converged = false;
    for _ in 0..iters {
        let xinv = x.clone().try_inverse().ok_or_else(|| invalid("polar points do not span"))?;
        let g: Vec<f64> = points.iter().map(|p| p.dot(&(&xinv * p))).collect();
        let (jmax, gmax) = g
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let (jmin, gmin) = g
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        if gmax <= nf * (1.0 + tol) && gmin >= nf * (1.0 - tol) {
            converged = true;
            break;
        }
        if gmax - nf >= nf - gmin {
            let lam = (gmax / nf - 1.0) / (gmax - 1.0);
            for w in u.iter_mut() {
                *w *= 1.0 - lam;
            }
            u[jmax] += lam;
            let p = &points[jmax];
            x = &x * (1.0 - lam) + p * p.transpose() * lam;
        } else {
            let uj = u[jmin];
            let mut lam = (1.0 - gmin / nf) / (gmin - 1.0);
            let cap = uj / (1.0 - uj);
            if lam >= cap {
                lam = cap;
            }
            for w in u.iter_mut() {
                *w *= 1.0 + lam;
            }
            u[jmin] -= lam;
            if u[jmin] < 1e-300 {
                u[jmin] = 0.0;
            }
            let p = &points[jmin];
            x = &x * (1.0 + lam) - p * p.transpose() * lam;
        }
    }
    Ok((x, converged))
}

/// John ellipsoid of `k` from `directions` support samples plus any slab
/// normals the body exposes. The result is shrunk if needed so that it lies
/// inside `k` along every sampled direction (exactly inside for slab-described
/// polytopes).
pub fn john_ellipsoid(k: &dyn ConvexBodyOracle, opts: JohnOptions) -> Result<Ellipsoid> {
    let n = k.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let count = if opts.directions == 0 {
        default_directions(n)
    } else {
        opts.directions
    };
    let mut dirs = linalg::sphere_directions(n, count);
    if let Some(normals) = k.slab_normals() {
        dirs.extend(normals.into_iter().map(|a| linalg::normalized(&a)));
    }
    let polar = |u: &Vec<f64>| -> Result<DVector<f64>> {
        let h = k.support(u);
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Unbounded(format!("support value {h} in direction {u:?}")));
        }
        Ok(DVector::from_iterator(n, u.iter().map(|x| x / h)))
    };
    let mut points = dirs.iter().map(&polar).collect::<Result<Vec<_>>>()?;
    let (mut x, mut converged) = centred_mvee(&points, opts.iters, opts.tol)?;

    // Re-solve once with directions where the candidate pokes out.
    let check = linalg::sphere_directions(n, 4 * count);
    let shape = |x: &DMatrix<f64>| x * (n as f64);
    let violated: Vec<Vec<f64>> = {
        let e = Ellipsoid::new(shape(&x))?;
        check
            .iter()
            .filter(|u| e.support(u) > k.support(u) * (1.0 + 1e-12))
            .cloned()
            .collect()
    };
    if !violated.is_empty() {
        for u in &violated {
            points.push(polar(u)?);
        }
        let (x2, c2) = centred_mvee(&points, opts.iters, opts.tol)?;
        x = x2;
        converged = c2;
    }
    if !converged {
        return Err(Error::NoConvergence {
            iters: opts.iters,
            detail: "ellipsoid weights did not reach the optimality tolerance".into(),
        });
    }
    let mut a = shape(&x);
    a = (&a + a.transpose()) * 0.5;
    let e = Ellipsoid::new(a.clone())?;
    let worst = dirs
        .iter()
        .chain(check.iter())
        .map(|u| e.support(u) / k.support(u))
        .fold(0.0, f64::max);
    if worst > 1.0 {
        a *= worst * worst;
    }
    Ellipsoid::new(a)
}

/// Observed sandwich constants: `inner = max h_E / h_K` (at most 1 when
/// `E ⊆ K`) and `outer = min{t : K ⊆ t E}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub inner: f64,
    pub outer: f64,
}

impl Sandwich {
    /// `E ⊆ K ⊆ √n (1 + tol) E`.
    pub fn holds(&self, n: usize, tol: f64) -> bool {
        self.inner <= 1.0 + 1e-12 && self.outer <= (n as f64).sqrt() * (1.0 + tol)
    }
}

pub fn john_sandwich(k: &dyn ConvexBodyOracle, e: &Ellipsoid, directions: usize) -> Sandwich {
    let n = k.dim();
    let mut dirs = linalg::sphere_directions(n, directions.max(1));
    if let Some(normals) = k.slab_normals() {
        dirs.extend(normals);
    }
    let inner = dirs
        .iter()
        .map(|u| e.support(u) / k.support(u))
        .fold(0.0, f64::max);
    let outer = match k.vertices() {
        Some(vs) => vs.iter().map(|v| e.gauge(v)).fold(0.0, f64::max),
        None => dirs
            .iter()
            .map(|u| k.support(u) / e.support(u))
            .fold(0.0, f64::max),
    };
    Sandwich { inner, outer }
}
