//! Volumes, visibility, the sandwich distance and the volume inequalities
//! relating seminorm balls, projections, slices and wedge powers.

use rand::Rng;
use rayon::prelude::*;

use crate::bl::{bl_gaussian, bl_truncated_estimate, lw_constant, Budget, BLDatum, GaussianOptions, LinearSubspace, TruncationWindow};
use crate::error::{invalid, Error, Result};
use crate::exterior::GradedMeasure;
use crate::linalg;
use crate::rng;

use super::planar;
use super::{CappedSeminormBall, ConvexBodyOracle, SeminormBall};

/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 200_000;
const CHUNKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
}

impl VolumeEstimate {
    fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            exact: true,
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value > 0.0 {
            self.stderr / self.value
        } else {
            0.0
        }
    }
}

/// Exact volume where available, otherwise hit-or-miss Monte Carlo in the
/// bounding box given by the support function. Chunks use fixed substreams
/// and are reduced in order, so the result does not depend on scheduling.
pub fn body_volume(k: &dyn ConvexBodyOracle, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if let Some(v) = k.exact_volume() {
        return Ok(VolumeEstimate::exact(v));
    }
    let n = k.dim();
    let half: Vec<f64> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let a = k.support(&e);
            e[i] = -1.0;
            a.max(k.support(&e))
        })
        .collect();
    if half.iter().any(|h| !h.is_finite()) {
        return Err(Error::Unbounded(
            "body has infinite support; intersect it with the unit ball".into(),
        ));
    }
    let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
    let per = samples.div_ceil(CHUNKS).max(1);
    let hits: Vec<usize> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::substream(seed, c as u64);
            let mut x = vec![0.0; n];
            let mut h = 0usize;
            for _ in 0..per {
                for (xi, hi) in x.iter_mut().zip(&half) {
                    *xi = hi * (2.0 * r.random::<f64>() - 1.0);
                }
                if k.contains(&x) {
                    h += 1;
                }
            }
            h
        })
        .collect();
    let total = (per * CHUNKS) as f64;
    let p = hits.iter().sum::<usize>() as f64 / total;
    Ok(VolumeEstimate {
        value: p * box_vol,
        stderr: box_vol * (p * (1.0 - p) / total).sqrt(),
        exact: false,
    })
}

/// `Vis(𝔰) = 1 / vol(𝔹 ∩ 𝔹_𝔰)`.
pub fn visibility(s: &SeminormBall, samples: usize, seed: u64) -> Result<f64> {
    let k = CappedSeminormBall { s: s.clone() };
    Ok(1.0 / body_volume(&k, samples, seed)?.value)
}

/// `sup_{x ∈ K} gauge_L(x)`, the least `α` with `K ⊆ α L`.
fn containment_factor(k: &dyn ConvexBodyOracle, l: &dyn ConvexBodyOracle, directions: usize) -> f64 {
    if let Some(vs) = k.vertices() {
        return vs.iter().map(|v| l.gauge(v)).fold(0.0, f64::max);
    }
    if let Some(normals) = l.slab_normals() {
        return normals.iter().map(|a| k.support(a)).fold(0.0, f64::max);
    }
    if let (Some(ak), Some(al)) = (k.ellipsoid_shape(), l.ellipsoid_shape()) {
        if let Some(ch) = ak.clone().cholesky() {
            let linv = ch.l().try_inverse().unwrap();
            let m = &linv * al * linv.transpose();
            let top = m.symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max);
            return top.sqrt();
        }
    }
    linalg::sphere_directions(k.dim(), directions)
        .iter()
        .map(|u| {
            let g = k.gauge(u);
            l.gauge(&linalg::scale(u, 1.0 / g))
        })
        .fold(0.0, f64::max)
}

/// `log inf {α >= 1 : α^{-1} K ⊆ L ⊆ α K}`. Exact for polytopes and
/// ellipsoids, a sampled lower estimate otherwise.
pub fn bm_distance(k: &dyn ConvexBodyOracle, l: &dyn ConvexBodyOracle, directions: usize) -> Result<f64> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    for body in [k, l] {
        for u in linalg::sphere_directions(body.dim(), 64) {
            let h = body.support(&u);
            if !(h > 0.0) || !h.is_finite() {
                return Err(invalid("degenerate body: support must be positive and finite"));
            }
        }
    }
    let a = containment_factor(k, l, directions).max(containment_factor(l, k, directions));
    Ok(a.max(1.0).ln())
}

/// Two sides of a volume inequality `lhs <= rhs` (or the recorded pair when
/// the constant is not asserted), with the Monte Carlo error carried by the
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Relative standard error of the sampled quantities.
    pub rel_err: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// `(1, |μ^{∧n}| vol 𝔹_μ)`; `holds` records positivity of the product.
pub fn wedge_visibility_check(mu: &GradedMeasure, samples: usize, seed: u64) -> Result<InequalityCheck> {
    let s = SeminormBall::new(mu)?;
    s.require_bounded()?;
    let vol = body_volume(&s, samples, seed)?;
    let moment = mu.power_first_moment(mu.dim())?;
    let rhs = moment * vol.value;
    Ok(InequalityCheck {
        lhs: 1.0,
        rhs,
        rel_err: vol.rel_err(),
        holds: rhs > 0.0,
    })
}

fn projection_volume(k: &dyn ConvexBodyOracle, t: &LinearSubspace) -> f64 {
    let w = t.complement_basis();
    match w.len() {
        0 => 1.0,
        1 => k.support(&w[0]) + k.support(&linalg::scale(&w[0], -1.0)),
        2 => {
            if let Some(vs) = k.vertices() {
                let pts: Vec<planar::Pt> = vs.iter().map(|v| [linalg::dot(v, &w[0]), linalg::dot(v, &w[1])]).collect();
                return planar::polygon_area(&planar::convex_hull(&pts));
            }
            let dirs = linalg::sphere_directions(2, 720);
            let hs: Vec<f64> = dirs
                .iter()
                .map(|d| k.support(&linalg::add(&linalg::scale(&w[0], d[0]), &linalg::scale(&w[1], d[1]))))
                .collect();
            let big = 2.0 * hs.iter().cloned().fold(0.0, f64::max);
            let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
            for (d, h) in dirs.iter().zip(&hs) {
                poly = planar::clip(&poly, [d[0], d[1]], *h);
            }
            planar::polygon_area(&poly)
        }
        _ => f64::NAN,
    }
}

fn slice_volume(k: &dyn ConvexBodyOracle, t: &LinearSubspace) -> f64 {
    let b = t.basis();
    match b.len() {
        0 => 1.0,
        1 => 1.0 / k.gauge(&b[0]) + 1.0 / k.gauge(&linalg::scale(&b[0], -1.0)),
        2 => {
            if let Some(normals) = k.slab_normals() {
                let r: Vec<planar::Pt> = normals.iter().map(|a| [linalg::dot(a, &b[0]), linalg::dot(a, &b[1])]).collect();
                let big = 4.0
                    * [&b[0], &b[1]]
                        .iter()
                        .map(|v| 1.0 / k.gauge(v))
                        .fold(0.0, f64::max)
                        .max(1.0)
                    * 1e3;
                return planar::polygon_area(&planar::slab_polygon(&r, big));
            }
            let pts: Vec<planar::Pt> = linalg::sphere_directions(2, 720)
                .iter()
                .map(|d| {
                    let x = linalg::add(&linalg::scale(&b[0], d[0]), &linalg::scale(&b[1], d[1]));
                    let rho = 1.0 / k.gauge(&x);
                    [rho * d[0], rho * d[1]]
                })
                .collect();
            planar::polygon_area(&pts)
        }
        _ => f64::NAN,
    }
}

/// `vol_{n-k}(K + T) vol_k(K ∩ T) <= C(n, k) vol_n(K)`; translates of `T`
/// are identified with `T`.
pub fn slice_projection_check(
    k: &dyn ConvexBodyOracle,
    t: &LinearSubspace,
    samples: usize,
    seed: u64,
) -> Result<InequalityCheck> {
    let n = k.dim();
    if t.ambient() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.ambient(),
        });
    }
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let lhs = projection_volume(k, t) * slice_volume(k, t);
    let vol = body_volume(k, samples, seed)?;
    let rhs = linalg::binomial(n, t.dim()) as f64 * vol.value;
    let rel = vol.rel_err();
    Ok(InequalityCheck {
        lhs,
        rhs,
        rel_err: rel,
        holds: lhs <= rhs * (1.0 + 3.0 * rel) + 1e-12,
    })
}

/// `(vol_{n-k}(𝔹_μ + T), |<μ^{∧k}, T>| vol 𝔹_μ)`; only the ratio is of
/// interest, `holds` records that it is finite.
pub fn ball_projection_pairing_check(
    mu: &GradedMeasure,
    t: &LinearSubspace,
    samples: usize,
    seed: u64,
) -> Result<InequalityCheck> {
    let s = SeminormBall::new(mu)?;
    s.require_bounded()?;
    let lhs = projection_volume(&s, t);
    let vol = body_volume(&s, samples, seed)?;
    let pairing = mu.power_pairing_moment(&t.blade()?)?;
    let rhs = pairing * vol.value;
    Ok(InequalityCheck {
        lhs,
        rhs,
        rel_err: vol.rel_err(),
        holds: (lhs / rhs).is_finite(),
    })
}

/// Both sides of `vol(𝔹_μ)^{1-P} <= C^P BL Π |<T_j, μ^{∧k_j}>|^{p_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallInequality {
    pub lhs: f64,
    /// Right side with the truncated-constant lower estimate at `(1/R, 1)`.
    pub rhs_estimate: f64,
    /// Right side with the closed-form or Gaussian constant when available.
    pub rhs_exact: Option<f64>,
    /// Largest `c` with `c 𝔹 ⊆ 𝔹_μ` (sampled).
    pub inradius: f64,
    /// Smallest `C` with `𝔹_μ ⊆ C 𝔹` (sampled).
    pub circumradius: f64,
}

pub fn bl_ball_inequality_check(
    d: &BLDatum,
    mu: &GradedMeasure,
    big_r: f64,
    samples: usize,
    seed: u64,
) -> Result<BallInequality> {
    if mu.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            got: mu.dim(),
        });
    }
    let s = SeminormBall::new(mu)?;
    s.require_bounded()?;
    let inradius = 1.0 / s.max_on_sphere();
    let circumradius = 1.0 / s.min_on_sphere();
    let vol = body_volume(&s, samples, seed)?.value;
    let lhs = vol.powf(1.0 - d.total_power());
    let mut prod = 1.0;
    for (t, p) in d.subspaces().iter().zip(d.exponents()) {
        let pairing = if t.dim() == 0 {
            1.0
        } else {
            mu.power_pairing_moment(&t.blade()?)?
        };
        prod *= pairing.powf(*p);
    }
    let w = TruncationWindow::new(1.0 / big_r, 1.0)?;
    let est = bl_truncated_estimate(d, &w, Budget::default())?.value;
    let exact = match lw_constant(d) {
        Ok(c) => Some(c.value()),
        Err(_) => bl_gaussian(d, GaussianOptions::default()).value(),
    };
    Ok(BallInequality {
        lhs,
        rhs_estimate: est * prod,
        rhs_exact: exact.map(|c| c * prod),
        inradius,
        circumradius,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Ball, Ellipsoid, SymmetricPolytope};
    use super::*;
    use std::f64::consts::PI;

    fn l1_measure() -> GradedMeasure {
        GradedMeasure::from_directions(2, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]).unwrap()
    }

    fn x_axis(n: usize) -> LinearSubspace {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        LinearSubspace::from_rows(n, &[e]).unwrap()
    }

    #[test]
    fn volume_examples() {
        let v = body_volume(&Ball::unit(2), 1000, 0).unwrap();
        assert!((v.value - PI).abs() < 1e-12 && v.exact);
        let l1 = SeminormBall::new(&l1_measure()).unwrap();
        assert!((body_volume(&l1, 1000, 0).unwrap().value - 2.0).abs() < 1e-12);
        let cube = SymmetricPolytope::cube(2, 1.0).unwrap();
        assert_eq!(body_volume(&cube, 1000, 0).unwrap().value, 4.0);
        // Monte Carlo in three dimensions.
        let c3 = SymmetricPolytope::cube(3, 1.0).unwrap();
        let v = body_volume(&c3, 100_000, 1).unwrap();
        assert!(!v.exact);
        assert!((v.value - 8.0).abs() < 1e-9, "cube fills its own box");
        let oct = SeminormBall::from_directions(
            3,
            &[(vec![1.0, 0.0, 0.0], 1.0), (vec![0.0, 1.0, 0.0], 1.0), (vec![0.0, 0.0, 1.0], 1.0)],
        )
        .unwrap();
        let v = body_volume(&oct, 200_000, 2).unwrap();
        assert!((v.value - 4.0 / 3.0).abs() < 4.0 * v.stderr + 1e-3, "{v:?}");
        let strip = SeminormBall::from_directions(2, &[(vec![1.0, 0.0], 1.0)]).unwrap();
        assert!(matches!(body_volume(&strip, 100, 0), Err(Error::Unbounded(_))));
    }

    #[test]
    fn visibility_examples() {
        let zero = SeminormBall::from_directions(2, &[]).unwrap();
        assert!((visibility(&zero, 0, 0).unwrap() - 1.0 / PI).abs() < 1e-12);
        let l1 = SeminormBall::new(&l1_measure()).unwrap();
        assert!((visibility(&l1, 0, 0).unwrap() - 0.5).abs() < 1e-12);
        for t in [10.0, 100.0] {
            let s = SeminormBall::new(&l1_measure().scaled(t)).unwrap();
            let v = visibility(&s, 0, 0).unwrap();
            assert!((v / (t * t / 2.0) - 1.0).abs() < 1e-9);
        }
        // A single atom still gives a bounded capped body.
        let strip = SeminormBall::from_directions(2, &[(vec![2.0, 0.0], 1.0)]).unwrap();
        let exact = 2.0 * (0.5 * 0.75f64.sqrt() + 0.5f64.asin());
        assert!((visibility(&strip, 0, 0).unwrap() - 1.0 / exact).abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let cube = SymmetricPolytope::cube(2, 1.0).unwrap();
        assert_eq!(bm_distance(&cube, &cube, 360).unwrap(), 0.0);
        let d = bm_distance(&cube, &Ball::unit(2), 360).unwrap();
        assert!((d - 2f64.sqrt().ln()).abs() < 1e-12);
        let e = Ellipsoid::from_semi_axes(&[2.0, 0.5]).unwrap();
        assert!((bm_distance(&e, &Ball::unit(2), 360).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn volume_inequality_examples() {
        let w = wedge_visibility_check(&l1_measure(), 0, 0).unwrap();
        assert!((w.rhs - 4.0).abs() < 1e-12);
        let w3 = wedge_visibility_check(&l1_measure().scaled(3.0), 0, 0).unwrap();
        assert!((w3.rhs - 4.0).abs() < 1e-12);
        let single = GradedMeasure::from_directions(2, &[(vec![1.0, 0.0], 1.0)]).unwrap();
        assert!(matches!(wedge_visibility_check(&single, 0, 0), Err(Error::Unbounded(_))));

        let cube = SymmetricPolytope::cube(2, 1.0).unwrap();
        let c = slice_projection_check(&cube, &x_axis(2), 0, 0).unwrap();
        assert!((c.lhs - 4.0).abs() < 1e-12 && (c.rhs - 8.0).abs() < 1e-12 && c.holds);
        let c = slice_projection_check(&Ball::unit(2), &x_axis(2), 0, 0).unwrap();
        assert!((c.lhs - 4.0).abs() < 1e-12 && (c.rhs - 2.0 * PI).abs() < 1e-12);

        let p = ball_projection_pairing_check(&l1_measure(), &x_axis(2), 0, 0).unwrap();
        assert!((p.lhs - 2.0).abs() < 1e-12 && (p.rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ball_inequality_axes() {
        let d = crate::bl::BLDatum::from_rows(2, &[vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]], vec![1.0, 1.0]).unwrap();
        let b = bl_ball_inequality_check(&d, &l1_measure(), 4.0, 0, 0).unwrap();
        assert!((b.lhs - 0.5).abs() < 1e-12);
        assert!((b.rhs_exact.unwrap() - 1.0).abs() < 1e-12);
        assert!(b.rhs_estimate >= b.lhs);
    }
}
