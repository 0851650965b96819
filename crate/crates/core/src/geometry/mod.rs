//! Centrally symmetric convex bodies, seminorms built from direction
//! measures, and volume-type functionals on them.
//!
//! A grade-1 measure `μ = Σ w_i δ_{u_i}` defines the seminorm
//! `𝔰(v) = Σ w_i |<v, u_i>|` with unit ball `𝔹_𝔰 = {𝔰 <= 1}`. That ball is the
//! polar of the zonotope `Σ w_i [-u_i, u_i]`, so for atomic measures it is a
//! polytope and its volume is exact in the plane.

mod checks;
mod john;
pub mod planar;

pub use checks::{
    ball_projection_pairing_check, bl_ball_inequality_check, bm_distance, body_volume,
    slice_projection_check, visibility, wedge_visibility_check, BallInequality, InequalityCheck,
    VolumeEstimate, DEFAULT_SAMPLES,
};
pub use john::{john_ellipsoid, john_sandwich, JohnOptions, Sandwich};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::exterior::GradedMeasure;
use crate::linalg;
use crate::rng;

/// Membership and support oracle for a bounded, centrally symmetric convex
/// body containing a neighbourhood of the origin.
pub trait ConvexBodyOracle: Sync {
    fn dim(&self) -> usize;

    fn contains(&self, x: &[f64]) -> bool;

    /// `h_K(u) = sup_{x ∈ K} <x, u>`.
    fn support(&self, u: &[f64]) -> f64;

    /// Minkowski gauge `inf {t > 0 : x ∈ tK}`. The default bisects on
    /// [`contains`](Self::contains).
    fn gauge(&self, x: &[f64]) -> f64 {
        let len = linalg::norm(x);
        if len == 0.0 {
            return 0.0;
        }
        let inside = |t: f64| self.contains(&linalg::scale(x, 1.0 / t));
        let (mut lo, mut hi) = (len * 1e-3, len);
        while !inside(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        while inside(lo) && lo > 1e-300 {
            hi = lo;
            lo *= 0.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }

    /// Vertices, when the body is a polytope with known vertex set.
    fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        None
    }

    /// Normals `a_i` of a description `{|<a_i, x>| <= 1}`.
    fn slab_normals(&self) -> Option<Vec<Vec<f64>>> {
        None
    }

    /// Shape `A` when the body is the ellipsoid `{xᵀ A x <= 1}`.
    fn ellipsoid_shape(&self) -> Option<DMatrix<f64>> {
        None
    }

    /// Volume when a closed form or exact planar computation applies.
    fn exact_volume(&self) -> Option<f64> {
        None
    }

    /// Boundary polygon in the plane, counterclockwise.
    fn polygon(&self) -> Option<Vec<planar::Pt>> {
        None
    }
}

/// Euclidean ball of the given radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub n: usize,
    pub radius: f64,
}

impl Ball {
    pub fn unit(n: usize) -> Self {
        Self { n, radius: 1.0 }
    }
}

impl ConvexBodyOracle for Ball {
    fn dim(&self) -> usize {
        self.n
    }
    fn contains(&self, x: &[f64]) -> bool {
        linalg::norm(x) <= self.radius
    }
    fn support(&self, u: &[f64]) -> f64 {
        self.radius * linalg::norm(u)
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        linalg::norm(x) / self.radius
    }
    fn ellipsoid_shape(&self) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(self.n, self.n) / (self.radius * self.radius))
    }
    fn exact_volume(&self) -> Option<f64> {
        Some(linalg::unit_ball_volume(self.n) * self.radius.powi(self.n as i32))
    }
}

/// Centred ellipsoid `{x : xᵀ A x <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    a: DMatrix<f64>,
    a_inv: Option<DMatrix<f64>>,
}

impl Ellipsoid {
    /// `a` must be symmetric positive semidefinite. A singular `a` gives an
    /// unbounded cylinder, which is accepted but has no support function.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(invalid("ellipsoid shape must be square"));
        }
        let n = a.nrows();
        let scale = a.abs().max().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                    return Err(invalid("ellipsoid shape must be symmetric"));
                }
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        let eig = a.clone().symmetric_eigenvalues();
        if eig.iter().any(|&l| l < -1e-12 * scale) {
            return Err(invalid("ellipsoid shape must be positive semidefinite"));
        }
        let a_inv = if eig.iter().all(|&l| l > 1e-14 * scale) {
            a.clone().try_inverse()
        } else {
            None
        };
        Ok(Self { a, a_inv })
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn from_semi_axes(axes: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(axes.len(), axes.iter().map(|s| 1.0 / (s * s)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn is_bounded(&self) -> bool {
        self.a_inv.is_some()
    }
}

impl ConvexBodyOracle for Ellipsoid {
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0
    }
    fn support(&self, u: &[f64]) -> f64 {
        match &self.a_inv {
            Some(inv) => {
                let v = DVector::from_column_slice(u);
                v.dot(&(inv * &v)).max(0.0).sqrt()
            }
            None => f64::INFINITY,
        }
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.a * &v)).max(0.0).sqrt()
    }
    fn ellipsoid_shape(&self) -> Option<DMatrix<f64>> {
        Some(self.a.clone())
    }
    fn exact_volume(&self) -> Option<f64> {
        let det = self.a.determinant();
        if det <= 0.0 {
            return None;
        }
        Some(linalg::unit_ball_volume(self.dim()) / det.sqrt())
    }
}

/// Symmetric polytope `{x : |<a_i, x>| <= 1 for all i}`, n ∈ {2, 3}.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPolytope {
    n: usize,
    normals: Vec<Vec<f64>>,
    vertices: Vec<Vec<f64>>,
}

impl SymmetricPolytope {
    pub fn new(n: usize, normals: Vec<Vec<f64>>) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if normals.iter().any(|a| a.len() != n) {
            return Err(invalid("normal length differs from dimension"));
        }
        if linalg::rank(&normals, 1e-12) < n {
            return Err(Error::Unbounded("slab normals do not span the space".into()));
        }
        let vertices = enumerate_vertices(n, &normals);
        Ok(Self { n, normals, vertices })
    }

    /// The cube `[-s, s]^n`.
    pub fn cube(n: usize, s: f64) -> Result<Self> {
        let normals = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0 / s;
                e
            })
            .collect();
        Self::new(n, normals)
    }

    /// Random polytope with `m` slabs, normals Gaussian with lengths in
    /// `[0.5, 2]`.
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed);
        loop {
            let normals: Vec<Vec<f64>> = (0..m.max(n))
                .map(|_| {
                    let u = rng::unit_vec(&mut r, n);
                    let len = 0.5 + 1.5 * rand::Rng::random::<f64>(&mut r);
                    linalg::scale(&u, len)
                })
                .collect();
            if linalg::rank(&normals, 1e-6) == n {
                return Self::new(n, normals);
            }
        }
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }
}

fn solve_small(rows: &[&Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = m.lu();
    if lu.determinant().abs() < 1e-12 {
        return None;
    }
    lu.solve(&DVector::from_column_slice(rhs)).map(|v| v.iter().copied().collect())
}

fn enumerate_vertices(n: usize, normals: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = normals.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut push = |v: Vec<f64>| {
        if normals.iter().all(|a| linalg::dot(a, &v).abs() <= 1.0 + 1e-9)
            && !out.iter().any(|w| linalg::norm(&linalg::sub(w, &v)) < 1e-9)
        {
            out.push(v);
        }
    };
    let signs: Vec<Vec<f64>> = (0..1usize << n)
        .map(|b| (0..n).map(|i| if b >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let rows: Vec<&Vec<f64>> = idx.iter().map(|&i| &normals[i]).collect();
        for s in &signs {
            if let Some(v) = solve_small(&rows, s) {
                push(v);
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for l in k + 1..n {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

impl ConvexBodyOracle for SymmetricPolytope {
    fn dim(&self) -> usize {
        self.n
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0
    }
    fn support(&self, u: &[f64]) -> f64 {
        self.vertices.iter().map(|v| linalg::dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        self.normals.iter().map(|a| linalg::dot(a, x).abs()).fold(0.0, f64::max)
    }
    fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        Some(self.vertices.clone())
    }
    fn slab_normals(&self) -> Option<Vec<Vec<f64>>> {
        Some(self.normals.clone())
    }
    fn polygon(&self) -> Option<Vec<planar::Pt>> {
        (self.n == 2).then(|| planar::convex_hull(&self.vertices.iter().map(|v| [v[0], v[1]]).collect::<Vec<_>>()))
    }
    fn exact_volume(&self) -> Option<f64> {
        self.polygon().map(|p| planar::polygon_area(&p))
    }
}

/// Number of sphere samples in the boundedness test for `𝔹_𝔰`.
fn boundedness_samples(n: usize) -> usize {
    if n == 2 {
        360
    } else {
        1000
    }
}

/// Unit ball of the seminorm of a grade-1 measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormBall {
    n: usize,
    atoms: Vec<(Vec<f64>, f64)>,
    /// Vertices of the ball when bounded (n ∈ {2, 3}).
    vertices: Option<Vec<Vec<f64>>>,
    /// Slab normals (zonotope vertices) in the plane.
    normals: Option<Vec<Vec<f64>>>,
}

impl SeminormBall {
    pub fn new(mu: &GradedMeasure) -> Result<Self> {
        if mu.grade() != 1 {
            return Err(Error::GradeMismatch {
                left: 1,
                right: mu.grade(),
            });
        }
        let n = mu.dim();
        let atoms: Vec<(Vec<f64>, f64)> = mu
            .atoms()
            .iter()
            .filter(|a| a.weight > 0.0 && a.blade.norm() > 0.0)
            .map(|a| (a.blade.rep()[0].clone(), a.weight))
            .collect();
        let mut s = Self {
            n,
            atoms,
            vertices: None,
            normals: None,
        };
        if n == 2 {
            s.normals = Some(s.planar_normals());
        }
        if s.is_bounded() && (n == 2 || n == 3) {
            s.vertices = Some(s.compute_vertices());
        }
        Ok(s)
    }

    pub fn from_directions(n: usize, atoms: &[(Vec<f64>, f64)]) -> Result<Self> {
        Self::new(&GradedMeasure::from_directions(n, atoms)?)
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    /// `𝔰(v) = Σ w_i |<v, u_i>|`.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(self.eval_unchecked(v))
    }

    fn eval_unchecked(&self, v: &[f64]) -> f64 {
        self.atoms.iter().map(|(u, w)| w * linalg::dot(u, v).abs()).sum()
    }

    /// Sampled unit directions plus the directions where `𝔰` restricted to
    /// the sphere can attain its minimum (orthogonal to the atoms).
    fn test_directions(&self) -> Vec<Vec<f64>> {
        let mut dirs = linalg::sphere_directions(self.n, boundedness_samples(self.n));
        let units: Vec<Vec<f64>> = self.atoms.iter().map(|(u, _)| linalg::normalized(u)).collect();
        for (i, u) in units.iter().enumerate() {
            let perp = linalg::orthogonal_complement(std::slice::from_ref(u), self.n);
            dirs.extend(perp);
            if self.n == 3 {
                for v in &units[i + 1..] {
                    let c = vec![
                        u[1] * v[2] - u[2] * v[1],
                        u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0],
                    ];
                    if linalg::norm(&c) > 1e-12 {
                        dirs.push(linalg::normalized(&c));
                    }
                }
            }
        }
        dirs
    }

    /// Minimum of `𝔰` over the unit sphere (sampled, plus the candidate
    /// minimisers orthogonal to the atoms).
    pub fn min_on_sphere(&self) -> f64 {
        self.test_directions()
            .iter()
            .map(|v| self.eval_unchecked(v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum of `𝔰` over sampled unit directions.
    pub fn max_on_sphere(&self) -> f64 {
        linalg::sphere_directions(self.n, boundedness_samples(self.n))
            .iter()
            .map(|v| self.eval_unchecked(v))
            .fold(0.0, f64::max)
    }

    pub fn is_bounded(&self) -> bool {
        self.min_on_sphere() > 1e-9
    }

    fn require_bounded(&self) -> Result<()> {
        if self.is_bounded() {
            Ok(())
        } else {
            Err(Error::Unbounded(
                "the seminorm vanishes in some direction; intersect with the unit ball".into(),
            ))
        }
    }

    /// Zonotope vertices `Σ sign(<d, u_i>) w_i u_i`, one per arrangement cell.
    fn planar_normals(&self) -> Vec<Vec<f64>> {
        let mut cuts: Vec<f64> = Vec::new();
        for (u, _) in &self.atoms {
            let a = u[1].atan2(u[0]) + std::f64::consts::FRAC_PI_2;
            cuts.push(a.rem_euclid(std::f64::consts::PI));
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        if cuts.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..cuts.len() {
            let next = if i + 1 < cuts.len() {
                cuts[i + 1]
            } else {
                cuts[0] + std::f64::consts::PI
            };
            let mid = 0.5 * (cuts[i] + next);
            let d = [mid.cos(), mid.sin()];
            let mut g = vec![0.0; 2];
            for (u, w) in &self.atoms {
                let s = linalg::dot(u, &d).signum();
                g[0] += s * w * u[0];
                g[1] += s * w * u[1];
            }
            out.push(g);
        }
        out
    }

    fn compute_vertices(&self) -> Vec<Vec<f64>> {
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        if self.n == 2 {
            for (u, _) in &self.atoms {
                dirs.push(vec![-u[1], u[0]]);
            }
        } else {
            for (i, (a, _)) in self.atoms.iter().enumerate() {
                for (b, _) in &self.atoms[i + 1..] {
                    let c = vec![
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    ];
                    if linalg::norm(&c) > 1e-12 * linalg::norm(a) * linalg::norm(b) {
                        dirs.push(c);
                    }
                }
            }
        }
        let mut out: Vec<Vec<f64>> = Vec::new();
        for d in dirs {
            let s = self.eval_unchecked(&d);
            let v = linalg::scale(&d, 1.0 / s);
            for v in [v.clone(), linalg::scale(&v, -1.0)] {
                if !out.iter().any(|w| linalg::norm(&linalg::sub(w, &v)) < 1e-12) {
                    out.push(v);
                }
            }
        }
        out
    }
}

impl ConvexBodyOracle for SeminormBall {
    fn dim(&self) -> usize {
        self.n
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.eval_unchecked(x) <= 1.0
    }
    fn support(&self, u: &[f64]) -> f64 {
        match &self.vertices {
            Some(v) => v.iter().map(|p| linalg::dot(p, u)).fold(f64::NEG_INFINITY, f64::max),
            None => f64::INFINITY,
        }
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }
    fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        self.vertices.clone()
    }
    fn slab_normals(&self) -> Option<Vec<Vec<f64>>> {
        self.normals.clone().filter(|_| self.vertices.is_some())
    }
    fn polygon(&self) -> Option<Vec<planar::Pt>> {
        if self.n != 2 {
            return None;
        }
        let v = self.vertices.as_ref()?;
        Some(planar::convex_hull(&v.iter().map(|p| [p[0], p[1]]).collect::<Vec<_>>()))
    }
    fn exact_volume(&self) -> Option<f64> {
        self.polygon().map(|p| planar::polygon_area(&p))
    }
}

/// `K_𝔰 = 𝔹 ∩ 𝔹_𝔰`, always bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedSeminormBall {
    pub s: SeminormBall,
}

impl ConvexBodyOracle for CappedSeminormBall {
    fn dim(&self) -> usize {
        self.s.n
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0
    }
    fn support(&self, u: &[f64]) -> f64 {
        self.s.support(u).min(linalg::norm(u))
    }
    fn gauge(&self, x: &[f64]) -> f64 {
        linalg::norm(x).max(self.s.eval_unchecked(x))
    }
    fn exact_volume(&self) -> Option<f64> {
        match self.s.n {
            1 => {
                let w: f64 = self.s.atoms.iter().map(|(u, w)| w * u[0].abs()).sum();
                Some(2.0 * if w > 1.0 { 1.0 / w } else { 1.0 })
            }
            2 => {
                let normals: Vec<planar::Pt> = self.s.normals.as_ref()?.iter().map(|g| [g[0], g[1]]).collect();
                let poly = planar::slab_polygon(&normals, 2.0);
                Some(planar::polygon_disk_area(&poly, 1.0))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> SeminormBall {
        SeminormBall::from_directions(2, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let s = SeminormBall::from_directions(2, &[(vec![1.0, 0.0], 1.0)]).unwrap();
        assert_eq!(s.eval(&[3.0, 4.0]).unwrap(), 3.0);
        assert!(!s.is_bounded());
        assert_eq!(l1().eval(&[1.0, 1.0]).unwrap(), 2.0);
        assert!(l1().eval(&[1.0]).is_err());
    }

    #[test]
    fn l1_ball_is_diamond() {
        let b = l1();
        assert!(b.is_bounded());
        assert!((b.exact_volume().unwrap() - 2.0).abs() < 1e-14);
        assert!((b.support(&[1.0, 1.0]) - 1.0).abs() < 1e-14);
        let normals = b.slab_normals().unwrap();
        assert_eq!(normals.len(), 2);
    }

    #[test]
    fn polytope_vertices() {
        let c = SymmetricPolytope::cube(3, 1.0).unwrap();
        assert_eq!(c.vertices().unwrap().len(), 8);
        assert!((c.support(&[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-12);
        let sq = SymmetricPolytope::cube(2, 1.0).unwrap();
        assert_eq!(sq.exact_volume().unwrap(), 4.0);
        assert!(SymmetricPolytope::new(2, vec![vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn ellipsoid_support_and_gauge() {
        let e = Ellipsoid::from_semi_axes(&[2.0, 0.5]).unwrap();
        assert!((e.support(&[1.0, 0.0]) - 2.0).abs() < 1e-14);
        assert!((e.gauge(&[0.0, 0.5]) - 1.0).abs() < 1e-14);
        assert!((e.exact_volume().unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert!(Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn default_gauge_bisects() {
        struct Wrapped(Ball);
        impl ConvexBodyOracle for Wrapped {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn contains(&self, x: &[f64]) -> bool {
                self.0.contains(x)
            }
            fn support(&self, u: &[f64]) -> f64 {
                self.0.support(u)
            }
        }
        let w = Wrapped(Ball { n: 2, radius: 3.0 });
        assert!((w.gauge(&[3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-12);
    }
}
