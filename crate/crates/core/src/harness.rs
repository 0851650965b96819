//! Kakeya-Brascamp-Lieb harness: families of affine subspaces, the unit
//! grid `Q_R`, both sides of the uniform and Fremlin forms of the
//! inequality, the endpoint Loomis-Whitney form, the functionals `S_j` and
//! `G`, and the multilinear duality checker.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bl::{
    bl_gaussian, bl_truncated_estimate, is_loomis_whitney, lw_constant, BLDatum, Budget, GaussianBl, GaussianOptions,
    LinearSubspace, TruncationWindow,
};
use crate::error::{invalid, Error, Result};
use crate::exterior::{Blade, GradedMeasure};
use crate::fremlin::{fremlin_norm, FremlinOptions, NonnegTensor, WeightedIndexSet};
use crate::geometry::planar;
use crate::linalg;
use crate::polysurf::{mixture_normal_measure, Cube, MeshOptions, PolynomialMixture};
use crate::rng;

/// Distance below which a subspace counts as meeting a cube.
pub const INCIDENCE_TOL: f64 = 1e-9;
/// Largest per-cube tuple count evaluated exactly.
pub const TUPLE_CAP: usize = 100_000;

/// `a + span(basis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    point: Vec<f64>,
    direction: LinearSubspace,
    blade: Blade,
}

impl AffineSubspace {
    /// Basis rows must be linearly independent; they are orthonormalised.
    pub fn new(point: Vec<f64>, basis: &[Vec<f64>]) -> Result<Self> {
        let n = point.len();
        let direction = LinearSubspace::from_rows(n, basis)?;
        if direction.dim() != basis.len() {
            return Err(invalid("affine subspace basis is rank deficient"));
        }
        let blade = Blade::from_vectors(n, direction.basis())?;
        Ok(Self {
            point,
            direction,
            blade,
        })
    }

    pub fn line(point: Vec<f64>, dir: Vec<f64>) -> Result<Self> {
        Self::new(point, &[dir])
    }

    pub fn ambient(&self) -> usize {
        self.point.len()
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        self.direction.basis()
    }

    pub fn direction(&self) -> &LinearSubspace {
        &self.direction
    }

    /// Unit `k`-blade of the directions.
    pub fn blade(&self) -> &Blade {
        &self.blade
    }

    /// Quotient coordinates of `x - a`.
    pub fn offset(&self, x: &[f64]) -> Vec<f64> {
        self.direction.quotient_coords(&linalg::sub(x, &self.point))
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        linalg::norm(&self.offset(x))
    }

    pub fn translated(&self, v: &[f64]) -> Self {
        Self {
            point: linalg::add(&self.point, v),
            direction: self.direction.clone(),
            blade: self.blade.clone(),
        }
    }
}

/// Members sharing dimension `k` in `R^n`; repetitions count.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    n: usize,
    k: usize,
    members: Vec<AffineSubspace>,
}

impl AffineFamily {
    pub fn new(n: usize, k: usize, members: Vec<AffineSubspace>) -> Result<Self> {
        if k > n {
            return Err(invalid(format!("member dimension {k} exceeds ambient {n}")));
        }
        for t in &members {
            if t.ambient() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.ambient(),
                });
            }
            if t.dim() != k {
                return Err(invalid(format!("family of {k}-planes contains a {}-plane", t.dim())));
            }
        }
        Ok(Self { n, k, members })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn members(&self) -> &[AffineSubspace] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Unit cubes with integer corners at distance at most `R` from the origin,
/// in lexicographic corner order.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicGrid {
    n: usize,
    big_r: f64,
    corners: Vec<Vec<i64>>,
}

fn corner_distance(z: &[i64]) -> f64 {
    z.iter()
        .map(|&c| {
            let d = if c > 0 {
                c as f64
            } else if c + 1 < 0 {
                -(c + 1) as f64
            } else {
                0.0
            };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

impl DyadicGrid {
    pub fn new(n: usize, big_r: f64) -> Result<Self> {
        if n == 0 || n > 8 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(big_r >= 0.0) || !big_r.is_finite() {
            return Err(invalid("R must be finite and nonnegative"));
        }
        let top = big_r.ceil() as i64;
        let range: Vec<i64> = (-top - 1..=top).collect();
        let mut corners = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(corners.len() * range.len());
            for c in &corners {
                for &v in &range {
                    let mut z: Vec<i64> = c.clone();
                    z.push(v);
                    next.push(z);
                }
            }
            corners = next;
        }
        corners.retain(|z| corner_distance(z) <= big_r);
        Ok(Self { n, big_r, corners })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.big_r
    }

    pub fn corners(&self) -> &[Vec<i64>] {
        &self.corners
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn cube(&self, i: usize) -> Cube {
        Cube::unit(&self.corners[i])
    }
}

fn box_descent(t: &AffineSubspace, q: &Cube) -> f64 {
    // Projected coordinate descent on |(I - P)(x - a)|^2 over the box.
    let n = q.dim();
    let comp = linalg::orthogonal_complement(t.basis(), n);
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| comp.iter().map(|c| c[i] * c[j]).sum()).collect())
        .collect();
    let mut x = q.center();
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..n {
            if m[i][i] < 1e-15 {
                continue;
            }
            let r: f64 = (0..n).map(|j| m[i][j] * (x[j] - t.point()[j])).sum();
            let xi = (x[i] - r / m[i][i]).clamp(q.lo[i], q.lo[i] + q.side);
            moved = moved.max((xi - x[i]).abs());
            x[i] = xi;
        }
        if moved < 1e-15 {
            break;
        }
    }
    t.distance(&x)
}

/// Whether `T` meets the closed cube `Q` up to [`INCIDENCE_TOL`].
pub fn cube_incidence(t: &AffineSubspace, q: &Cube) -> bool {
    let n = q.dim();
    let k = t.dim();
    if k == n {
        return true;
    }
    if k == 0 {
        return q.contains(t.point(), INCIDENCE_TOL);
    }
    if k == 1 {
        let pad = Cube {
            lo: q.lo.iter().map(|l| l - INCIDENCE_TOL).collect(),
            side: q.side + 2.0 * INCIDENCE_TOL,
        };
        return match pad.clip_line(t.point(), &t.basis()[0]) {
            Some(_) => true,
            // A line exactly along a face of the padded cube.
            None => box_descent(t, q) <= INCIDENCE_TOL,
        };
    }
    if k == n - 1 {
        let nu = &t.direction().complement_basis()[0];
        let c = linalg::dot(nu, &linalg::sub(&q.center(), t.point()));
        let half = 0.5 * q.side * nu.iter().map(|v| v.abs()).sum::<f64>();
        return c.abs() <= half + INCIDENCE_TOL;
    }
    box_descent(t, q) <= INCIDENCE_TOL
}

/// `k`-dimensional volume of `T ∩ Q`; exact for `k <= 2`, `n <= 3`.
pub fn section_volume(t: &AffineSubspace, q: &Cube) -> Result<f64> {
    let n = q.dim();
    let k = t.dim();
    match k {
        0 => Ok(if q.contains(t.point(), INCIDENCE_TOL) { 1.0 } else { 0.0 }),
        _ if k == n => Ok(q.side.powi(n as i32)),
        1 => Ok(q.clip_line(t.point(), &t.basis()[0]).map(|(a, b)| b - a).unwrap_or(0.0)),
        2 if n == 3 => {
            // Parametrise the plane about the projection of the cube centre.
            let c = q.center();
            let (b1, b2) = (&t.basis()[0], &t.basis()[1]);
            let rel = linalg::sub(&c, t.point());
            let origin: Vec<f64> = (0..n)
                .map(|i| t.point()[i] + linalg::dot(&rel, b1) * b1[i] + linalg::dot(&rel, b2) * b2[i])
                .collect();
            let h = q.side * 2.0;
            let mut poly = vec![[-h, -h], [h, -h], [h, h], [-h, h]];
            for i in 0..n {
                let a = [b1[i], b2[i]];
                poly = planar::clip(&poly, a, q.lo[i] + q.side - origin[i]);
                poly = planar::clip(&poly, [-a[0], -a[1]], origin[i] - q.lo[i]);
                if poly.is_empty() {
                    break;
                }
            }
            Ok(planar::polygon_area(&poly).abs())
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// Per-member multipliers `c_{j,T}` for the tube functions
/// `f_{j,T} = c_{j,T} 1_{unit tube about T}`; `None` means all ones.
pub type TubeScales = Option<Vec<Vec<f64>>>;

fn tube_scale(scales: &TubeScales, j: usize, t: usize) -> f64 {
    scales.as_ref().map(|s| s[j][t]).unwrap_or(1.0)
}

fn check_families(families: &[AffineFamily], p: &[f64]) -> Result<usize> {
    let n = families.first().map(|f| f.dim()).ok_or_else(|| invalid("no families"))?;
    if families.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: families.len(),
            got: p.len(),
        });
    }
    if families.iter().any(|f| f.dim() != n) {
        return Err(invalid("families live in different dimensions"));
    }
    if p.iter().any(|x| !(*x > 0.0)) {
        return Err(invalid("exponents must be positive"));
    }
    Ok(n)
}

fn check_scales(families: &[AffineFamily], scales: &TubeScales) -> Result<()> {
    if let Some(s) = scales {
        if s.len() != families.len() || s.iter().zip(families).any(|(v, f)| v.len() != f.len()) {
            return Err(invalid("tube scales do not match the families"));
        }
        if s.iter().flatten().any(|c| !(*c >= 0.0)) {
            return Err(invalid("tube scales must be nonnegative"));
        }
    }
    Ok(())
}

/// `∫_{B(0,R)} Π_j (Σ_T f_{j,T})^{p_j}` for unit-tube inputs, by midpoint
/// rule on a `1/4` subgrid of the unit cells.
pub fn lhs_uniform(families: &[AffineFamily], p: &[f64], big_r: f64, scales: &TubeScales) -> Result<f64> {
    let n = check_families(families, p)?;
    check_scales(families, scales)?;
    let grid = DyadicGrid::new(n, big_r)?;
    const SUB: usize = 4;
    let h = 1.0 / SUB as f64;
    let per = SUB.pow(n as u32);
    let total: f64 = grid
        .corners()
        .par_iter()
        .map(|z| {
            let mut s = 0.0;
            for k in 0..per {
                let mut x = vec![0.0; n];
                let mut kk = k;
                for (xi, &zi) in x.iter_mut().zip(z) {
                    *xi = zi as f64 + ((kk % SUB) as f64 + 0.5) * h;
                    kk /= SUB;
                }
                if linalg::norm(&x) > big_r {
                    continue;
                }
                let mut prod = 1.0;
                for (j, fam) in families.iter().enumerate() {
                    let sum: f64 = fam
                        .members()
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| t.offset(&x).iter().all(|c| c.abs() <= 0.5))
                        .map(|(i, _)| tube_scale(scales, j, i))
                        .sum();
                    prod *= sum.powf(p[j]);
                    if prod == 0.0 {
                        break;
                    }
                }
                s += prod;
            }
            s * h.powi(n as i32)
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total)
}

/// `A Π_j (Σ_T ∫ f_{j,T})^{p_j}`; unit tubes have quotient integral 1.
pub fn rhs_uniform(families: &[AffineFamily], p: &[f64], a: f64, scales: &TubeScales) -> Result<f64> {
    check_families(families, p)?;
    check_scales(families, scales)?;
    Ok(a * families
        .iter()
        .enumerate()
        .map(|(j, f)| (0..f.len()).map(|i| tube_scale(scales, j, i)).sum::<f64>().powf(p[j]))
        .product::<f64>())
}

/// Where a BL constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlSource {
    ClosedForm,
    Gaussian,
    /// A lower estimate of the truncated constant; results built on it are
    /// diagnostic only.
    TruncatedEstimate,
}

impl BlSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlSource::ClosedForm => "closed-form",
            BlSource::Gaussian => "gaussian",
            BlSource::TruncatedEstimate => "truncated-estimate",
        }
    }
}

/// `BL(T, p, (1, R))` for one tuple of directions: closed form when the
/// datum is of Loomis-Whitney shape, else the Gaussian constant, else a
/// truncated lower estimate.
pub fn bl_for_tuple(d: &BLDatum, big_r: f64) -> Result<(f64, BlSource)> {
    if is_loomis_whitney(d) {
        return Ok((lw_constant(d)?.value(), BlSource::ClosedForm));
    }
    if let GaussianBl::Value(v) = bl_gaussian(d, GaussianOptions::default()) {
        return Ok((v, BlSource::Gaussian));
    }
    let w = TruncationWindow::new(1.0, big_r.max(1.0 + 1e-9))?;
    Ok((bl_truncated_estimate(d, &w, Budget::default())?.value, BlSource::TruncatedEstimate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRow {
    pub corner: Vec<i64>,
    pub incident: Vec<usize>,
    pub term: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KblReport {
    pub rows: Vec<CubeRow>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, or `None` when the right side vanishes.
    pub ratio: Option<f64>,
    pub radius: f64,
    pub family_sizes: Vec<usize>,
    pub exponents: Vec<f64>,
    pub bl_source: Vec<BlSource>,
    pub flags: Vec<String>,
}

impl KblReport {
    fn assemble(
        corners: &[Vec<i64>],
        terms: Vec<(Vec<usize>, f64)>,
        rhs: f64,
        radius: f64,
        families: &[AffineFamily],
        exponents: Vec<f64>,
        bl_source: Vec<BlSource>,
        flags: Vec<String>,
    ) -> Self {
        let mut cumulative = 0.0;
        let rows: Vec<CubeRow> = corners
            .iter()
            .zip(terms)
            .map(|(c, (incident, term))| {
                cumulative += term;
                CubeRow {
                    corner: c.clone(),
                    incident,
                    term,
                    cumulative,
                }
            })
            .collect();
        Self {
            rows,
            lhs: cumulative,
            rhs,
            ratio: (rhs > 0.0).then(|| cumulative / rhs),
            radius,
            family_sizes: families.iter().map(|f| f.len()).collect(),
            exponents,
            bl_source,
            flags,
        }
    }

    /// Per-cube rows followed by one summary row.
    pub fn to_csv(&self) -> String {
        let m = self.family_sizes.len();
        let mut s = String::from("cube");
        for j in 0..m {
            s.push_str(&format!(",incident_{}", j + 1));
        }
        s.push_str(",term,cumulative\n");
        for r in &self.rows {
            let corner: Vec<String> = r.corner.iter().map(|c| c.to_string()).collect();
            s.push_str(&corner.join(" "));
            for i in &r.incident {
                s.push_str(&format!(",{i}"));
            }
            s.push_str(&format!(",{:.12e},{:.12e}\n", r.term, r.cumulative));
        }
        let src: Vec<&str> = self.bl_source.iter().map(|b| b.as_str()).collect();
        s.push_str(&format!(
            "# summary lhs={:.12e} rhs={:.12e} ratio={} bl_source={} flags={}\n",
            self.lhs,
            self.rhs,
            self.ratio.map(|r| format!("{r:.12e}")).unwrap_or_else(|| "nan".into()),
            if src.is_empty() { "none".to_string() } else { src.join("+") },
            if self.flags.is_empty() { "none".to_string() } else { self.flags.join("+") },
        ));
        s
    }
}

/// Indices of the members of each family meeting each cube.
pub fn incidences(families: &[AffineFamily], grid: &DyadicGrid) -> Vec<Vec<Vec<usize>>> {
    (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let q = grid.cube(c);
            families
                .iter()
                .map(|f| (0..f.len()).filter(|&i| cube_incidence(&f.members()[i], &q)).collect())
                .collect()
        })
        .collect()
}

fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.iter().any(|&s| s == 0) {
        return;
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        f(&idx);
        let mut j = sizes.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < sizes[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn fremlin_exponents(p: &[f64]) -> Result<(f64, Vec<f64>)> {
    let big_p: f64 = p.iter().sum();
    let q: Vec<f64> = p.iter().map(|x| big_p / x).collect();
    if q.iter().any(|x| *x <= 1.0) {
        return Err(Error::Precondition(
            "the Fremlin form needs P / p_j > 1 for every j (at least two families)".into(),
        ));
    }
    Ok((big_p, q))
}

fn tuple_datum(families: &[AffineFamily], tuple: &[usize], p: &[f64]) -> Result<BLDatum> {
    let n = families[0].dim();
    let subs = families.iter().zip(tuple).map(|(f, &i)| f.members()[i].direction().clone()).collect();
    BLDatum::new(n, subs, p.to_vec())
}

/// BL constants for a set of tuples, evaluated in parallel.
fn bl_table(
    families: &[AffineFamily],
    tuples: BTreeSet<Vec<usize>>,
    p: &[f64],
    big_r: f64,
) -> Result<BTreeMap<Vec<usize>, (f64, BlSource)>> {
    let list: Vec<Vec<usize>> = tuples.into_iter().collect();
    let vals = list
        .par_iter()
        .map(|t| bl_for_tuple(&tuple_datum(families, t, p)?, big_r))
        .collect::<Result<Vec<_>>>()?;
    Ok(list.into_iter().zip(vals).collect())
}

/// Fremlin-norm left side: `Σ_Q ‖BL^{-1/P}‖^P` over the incident tuples of
/// each cube, with unit weights on the index sets.
pub fn lhs_fremlin(families: &[AffineFamily], p: &[f64], big_r: f64, opts: FremlinOptions) -> Result<KblReport> {
    let n = check_families(families, p)?;
    let (big_p, q) = fremlin_exponents(p)?;
    let grid = DyadicGrid::new(n, big_r)?;
    let inc = incidences(families, &grid);
    let mut needed = BTreeSet::new();
    for cube in &inc {
        let sizes: Vec<usize> = cube.iter().map(|v| v.len()).collect();
        let count: usize = sizes.iter().product();
        if count > TUPLE_CAP {
            return Err(Error::SizeCap(format!("{count} incident tuples in one cube")));
        }
        for_each_tuple(&sizes, |idx| {
            needed.insert(idx.iter().enumerate().map(|(j, &i)| cube[j][i]).collect::<Vec<usize>>());
        });
    }
    let table = bl_table(families, needed, p, big_r)?;
    let terms = inc
        .par_iter()
        .map(|cube| {
            let sizes: Vec<usize> = cube.iter().map(|v| v.len()).collect();
            let counts = sizes.clone();
            if sizes.iter().any(|&s| s == 0) {
                return Ok((counts, 0.0));
            }
            let mut entries = Vec::new();
            for_each_tuple(&sizes, |idx| {
                let key: Vec<usize> = idx.iter().enumerate().map(|(j, &i)| cube[j][i]).collect();
                let bl = table[&key].0;
                entries.push(if bl.is_finite() { bl.powf(-1.0 / big_p) } else { 0.0 });
            });
            let t = NonnegTensor::from_shape(&sizes, entries)?;
            let norm = fremlin_norm(&t, &q, opts)?.value;
            Ok((counts, norm.powf(big_p)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sources: BTreeSet<BlSource> = table.values().map(|v| v.1).collect();
    let mut flags = Vec::new();
    if sources.contains(&BlSource::TruncatedEstimate) {
        flags.push("diagnostic-only".to_string());
    }
    let rhs: f64 = families.iter().zip(p).map(|(f, pj)| (f.len() as f64).powf(*pj)).product();
    Ok(KblReport::assemble(
        grid.corners(),
        terms,
        rhs,
        big_r,
        families,
        p.to_vec(),
        sources.into_iter().collect(),
        flags,
    ))
}

/// Endpoint form: `Σ_Q (Σ_{incident tuples} |∧ T_j|)^{1/(m-1)}` against
/// `Π_j |𝒯_j|^{1/(m-1)}`.
pub fn lw_kakeya(families: &[AffineFamily], big_r: f64) -> Result<KblReport> {
    let m = families.len();
    if m < 2 {
        return Err(Error::Precondition("need at least two families".into()));
    }
    let p = vec![1.0 / (m as f64 - 1.0); m];
    let n = check_families(families, &p)?;
    let ksum: usize = families.iter().map(|f| f.k()).sum();
    if ksum != n {
        return Err(Error::Precondition(format!("family dimensions sum to {ksum}, not {n}")));
    }
    let grid = DyadicGrid::new(n, big_r)?;
    let inc = incidences(families, &grid);
    let terms: Vec<(Vec<usize>, f64)> = inc
        .par_iter()
        .map(|cube| {
            let sizes: Vec<usize> = cube.iter().map(|v| v.len()).collect();
            let mut s = 0.0;
            for_each_tuple(&sizes, |idx| {
                let mut rows = Vec::with_capacity(n);
                for (j, &i) in idx.iter().enumerate() {
                    rows.extend(families[j].members()[cube[j][i]].basis().iter().cloned());
                }
                s += linalg::det(&rows).abs();
            });
            (sizes, s.powf(p[0]))
        })
        .collect();
    let rhs: f64 = families.iter().map(|f| (f.len() as f64).powf(p[0])).product();
    Ok(KblReport::assemble(
        grid.corners(),
        terms,
        rhs,
        big_r,
        families,
        p,
        vec![BlSource::ClosedForm],
        Vec::new(),
    ))
}

/// `S_j(Q) = R^{-k} |<T_Q H, μ_Q^{∧k}>|` with `μ_Q` the average normal
/// measure of `σ` in `Q` and `T_Q H` the tangent measure of the members
/// meeting `Q`, weighted by `vol_k(T ∩ Q)`.
pub fn sj_functional(
    h: &AffineFamily,
    q: &Cube,
    sigma: &PolynomialMixture,
    big_r: f64,
    mesh: MeshOptions,
) -> Result<f64> {
    if !(big_r > 0.0) {
        return Err(invalid("R must be positive"));
    }
    let mu = mixture_normal_measure(sigma, q, mesh)?.compress_directions(1e-9)?;
    tangent_pairing(h, q, &mu).map(|v| v * big_r.powi(-(h.k() as i32)))
}

/// `Σ_T vol_k(T ∩ Q) |<blade(T), μ^{∧k}>|` over the members meeting `Q`.
pub fn tangent_pairing(h: &AffineFamily, q: &Cube, mu: &GradedMeasure) -> Result<f64> {
    let mut s = 0.0;
    for t in h.members() {
        if !cube_incidence(t, q) {
            continue;
        }
        let vol = section_volume(t, q)?;
        if vol > 0.0 {
            s += vol * mu.power_pairing_moment(t.blade())?;
        }
    }
    Ok(s)
}

/// `G(Q) = ‖BL^{-1/P}‖^P` in the Fremlin norm over the members meeting `Q`,
/// each weighted by `vol_{k_j}(T ∩ Q)`.
pub fn g_functional(families: &[AffineFamily], p: &[f64], q: &Cube, big_r: f64, opts: FremlinOptions) -> Result<(f64, Vec<BlSource>)> {
    check_families(families, p)?;
    let (big_p, qs) = fremlin_exponents(p)?;
    let mut members: Vec<Vec<(usize, f64)>> = Vec::new();
    for f in families {
        let mut v = Vec::new();
        for (i, t) in f.members().iter().enumerate() {
            if cube_incidence(t, q) {
                let w = section_volume(t, q)?;
                if w > 0.0 {
                    v.push((i, w));
                }
            }
        }
        members.push(v);
    }
    let sizes: Vec<usize> = members.iter().map(|v| v.len()).collect();
    if sizes.iter().any(|&s| s == 0) {
        return Ok((0.0, Vec::new()));
    }
    let mut tuples = BTreeSet::new();
    for_each_tuple(&sizes, |idx| {
        tuples.insert(idx.iter().enumerate().map(|(j, &i)| members[j][i].0).collect::<Vec<usize>>());
    });
    let table = bl_table(families, tuples, p, big_r)?;
    let mut entries = Vec::new();
    for_each_tuple(&sizes, |idx| {
        let key: Vec<usize> = idx.iter().enumerate().map(|(j, &i)| members[j][i].0).collect();
        let bl = table[&key].0;
        entries.push(if bl.is_finite() { bl.powf(-1.0 / big_p) } else { 0.0 });
    });
    let sets = members
        .iter()
        .map(|v| {
            WeightedIndexSet::new(v.iter().map(|(i, _)| i.to_string()).collect(), v.iter().map(|(_, w)| *w).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let t = NonnegTensor::new(sets, entries)?;
    let value = fremlin_norm(&t, &qs, opts)?.value.powf(big_p);
    let sources: BTreeSet<BlSource> = table.values().map(|v| v.1).collect();
    Ok((value, sources.into_iter().collect()))
}

/// Converse direction: from `ΣG <= K^P Π deg^{p_j}` build `S_j` by the
/// ansatz and check both conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityConverse {
    /// Realised constant `C_1 = (ΣG / Π deg^{p_j})^{1/P}`, with `C_2 = 1`.
    pub c1: f64,
    pub s: Vec<Vec<f64>>,
    /// `max_Q G M^{P-1} / (C_1^P Π S_j^{p_j})`; at most 1 when the product
    /// condition holds.
    pub product_ratio: f64,
    /// `max_j Σ_Q S_j / deg_j`.
    pub sum_ratio: f64,
    /// `(Σ G^{1/P} M^{1-1/P})^P / ΣG`, at most 1 by Hölder.
    pub holder_ratio: f64,
    pub holds: bool,
}

/// Forward direction: given `S_j`, take `M = G / ΣG` and walk the Hölder
/// chain down to `C_1^P C_2^P Π deg^{p_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityForward {
    pub c1: f64,
    pub c2: f64,
    /// The five members of the chain, each at most the previous.
    pub chain: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub total_g: f64,
    pub converse: DualityConverse,
    pub forward: DualityForward,
}

/// Relative slack for the arithmetic checks.
pub const DUALITY_TOL: f64 = 1e-9;

fn le(a: f64, b: f64) -> bool {
    a <= b + DUALITY_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Both directions of the multilinear duality on given `G`, `M`, `p`, and
/// degrees. `M` must be nonnegative with unit sum.
pub fn duality_check(g: &[f64], m: &[f64], p: &[f64], degs: &[f64]) -> Result<DualityReport> {
    if g.len() != m.len() || g.is_empty() {
        return Err(invalid("G and M must be nonempty and of equal length"));
    }
    if p.len() != degs.len() || p.is_empty() {
        return Err(invalid("exponents and degrees differ in length"));
    }
    if g.iter().chain(m).any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(invalid("G and M must be finite and nonnegative"));
    }
    if p.iter().any(|x| !(*x > 0.0)) || degs.iter().any(|x| !(*x > 0.0)) {
        return Err(invalid("exponents and degrees must be positive"));
    }
    let msum: f64 = m.iter().sum();
    if (msum - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("M must sum to 1, got {msum}")));
    }
    let big_p: f64 = p.iter().sum();
    if big_p < 1.0 {
        return Err(Error::Precondition(format!("Hölder steps need P = Σ p_j >= 1, got {big_p}")));
    }
    let total: f64 = g.iter().sum();
    let degprod: f64 = p.iter().zip(degs).map(|(pj, d)| d.powf(*pj)).product();

    // Converse.
    let c1 = (total / degprod).powf(1.0 / big_p);
    let weights: Vec<f64> = g.iter().zip(m).map(|(gq, mq)| gq.powf(1.0 / big_p) * mq.powf(1.0 - 1.0 / big_p)).collect();
    let z: f64 = weights.iter().sum();
    let s_shape: Vec<f64> = weights.iter().map(|w| if z > 0.0 { w / z } else { 0.0 }).collect();
    let s: Vec<Vec<f64>> = degs.iter().map(|d| s_shape.iter().map(|sq| sq * d).collect()).collect();
    let mut product_ratio = 0.0f64;
    let mut product_ok = true;
    for qi in 0..g.len() {
        let lhs = g[qi] * m[qi].powf(big_p - 1.0);
        let rhs = c1.powf(big_p) * (0..p.len()).map(|j| s[j][qi].powf(p[j])).product::<f64>();
        product_ok &= le(lhs, rhs);
        if lhs > 0.0 {
            product_ratio = product_ratio.max(lhs / rhs);
        }
    }
    let sum_ratio = s
        .iter()
        .zip(degs)
        .map(|(sj, d)| sj.iter().sum::<f64>() / d)
        .fold(0.0, f64::max);
    let holder_ratio = if total > 0.0 { z.powf(big_p) / total } else { 0.0 };
    let converse = DualityConverse {
        c1,
        s,
        product_ratio,
        sum_ratio,
        holder_ratio,
        holds: product_ok && le(sum_ratio, 1.0) && le(holder_ratio, 1.0),
    };

    // Forward, with the S_j just constructed.
    let forward = forward_chain(g, &converse.s, p, degs)?;
    Ok(DualityReport {
        total_g: total,
        converse,
        forward,
    })
}

/// Forward direction for arbitrary `S_j` (rows indexed by `j`).
pub fn forward_chain(g: &[f64], s: &[Vec<f64>], p: &[f64], degs: &[f64]) -> Result<DualityForward> {
    if s.len() != p.len() || s.iter().any(|r| r.len() != g.len()) {
        return Err(invalid("S has the wrong shape"));
    }
    let big_p: f64 = p.iter().sum();
    let total: f64 = g.iter().sum();
    if !(total > 0.0) {
        return Ok(DualityForward {
            c1: 0.0,
            c2: 0.0,
            chain: vec![0.0; 5],
            holds: true,
        });
    }
    let m: Vec<f64> = g.iter().map(|x| x / total).collect();
    // Smallest C_1 making the product condition hold for this M.
    let mut c1p = 0.0f64;
    for qi in 0..g.len() {
        let lhs = g[qi] * m[qi].powf(big_p - 1.0);
        if lhs == 0.0 {
            continue;
        }
        let prod: f64 = (0..p.len()).map(|j| s[j][qi].powf(p[j])).product();
        c1p = c1p.max(if prod > 0.0 { lhs / prod } else { f64::INFINITY });
    }
    let c2 = s
        .iter()
        .zip(degs)
        .map(|(sj, d)| sj.iter().sum::<f64>() / d)
        .fold(0.0, f64::max);
    let step1 = g.iter().zip(&m).map(|(gq, mq)| gq.powf(1.0 / big_p) * mq.powf(1.0 - 1.0 / big_p)).sum::<f64>().powf(big_p);
    let step2 = c1p
        * (0..g.len())
            .map(|qi| (0..p.len()).map(|j| s[j][qi].powf(p[j] / big_p)).product::<f64>())
            .sum::<f64>()
            .powf(big_p);
    let step3 = c1p * s.iter().zip(p).map(|(sj, pj)| sj.iter().sum::<f64>().powf(*pj)).product::<f64>();
    let step4 = c1p * c2.powf(big_p) * p.iter().zip(degs).map(|(pj, d)| d.powf(*pj)).product::<f64>();
    let chain = vec![total, step1, step2, step3, step4];
    let holds = (total - step1).abs() <= DUALITY_TOL * total && chain.windows(2).all(|w| le(w[0], w[1]));
    Ok(DualityForward {
        c1: c1p.powf(1.0 / big_p),
        c2,
        chain,
        holds,
    })
}

/// `N` horizontal and `N` vertical lines through half-integer offsets,
/// centred on the origin; every cube of the central `N x N` block meets one
/// of each.
pub fn grid_lines_instance(count: usize) -> Result<Vec<AffineFamily>> {
    let offsets: Vec<f64> = (0..count).map(|i| i as f64 - count as f64 / 2.0 + 0.5).collect();
    let h = offsets
        .iter()
        .map(|&c| AffineSubspace::line(vec![0.0, c], vec![1.0, 0.0]))
        .collect::<Result<Vec<_>>>()?;
    let v = offsets
        .iter()
        .map(|&c| AffineSubspace::line(vec![c, 0.0], vec![0.0, 1.0]))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![AffineFamily::new(2, 1, h)?, AffineFamily::new(2, 1, v)?])
}

/// Two families of `count` lines in the plane: the first within 45 degrees
/// of horizontal, the second within 45 degrees of vertical, each passing at
/// distance at most `r0` from the origin.
pub fn random_line_families(count: usize, r0: f64, seed: u64) -> Result<Vec<AffineFamily>> {
    let mut out = Vec::new();
    for j in 0..2 {
        let mut r = rng::substream(seed, j as u64);
        let mut members = Vec::with_capacity(count);
        for _ in 0..count {
            let t: f64 = r.random_range(-std::f64::consts::FRAC_PI_4..std::f64::consts::FRAC_PI_4)
                + j as f64 * std::f64::consts::FRAC_PI_2;
            let dir = vec![t.cos(), t.sin()];
            let normal = [-dir[1], dir[0]];
            // Keep offsets off half-integers so no line runs along a grid face.
            let mut s: f64 = r.random_range(-r0..r0);
            if (s - s.round()).abs() < 1e-6 {
                s += 2e-6;
            }
            members.push(AffineSubspace::line(vec![s * normal[0], s * normal[1]], dir)?);
        }
        out.push(AffineFamily::new(2, 1, members)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysurf::build_p0;

    fn x_axis() -> AffineSubspace {
        AffineSubspace::line(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn incidence_examples() {
        let q = Cube::unit(&[0, 0]);
        assert!(cube_incidence(&x_axis(), &q));
        let far = AffineSubspace::line(vec![0.0, 5.0], vec![1.0, 0.0]).unwrap();
        assert!(!cube_incidence(&far, &q));
        let edge = AffineSubspace::line(vec![0.0, 1.0 + 1e-12], vec![1.0, 0.0]).unwrap();
        assert!(cube_incidence(&edge, &q));
        let diag = AffineSubspace::line(vec![2.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(!cube_incidence(&diag, &q));
        assert!(cube_incidence(&diag, &Cube::unit(&[1, -1])));
        // Planes and points in space, and the descent fallback agreeing.
        let plane = AffineSubspace::new(vec![0.0, 0.0, 2.5], &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.1]]).unwrap();
        for z in [[0, 0, 2], [0, 0, 0], [3, 5, 2], [0, 4, 2]] {
            let c = Cube::unit(&z);
            assert_eq!(cube_incidence(&plane, &c), box_descent(&plane, &c) <= INCIDENCE_TOL, "{z:?}");
        }
        let pt = AffineSubspace::new(vec![0.5, 0.5, 0.5], &[]).unwrap();
        assert!(cube_incidence(&pt, &Cube::unit(&[0, 0, 0])));
        assert!(!cube_incidence(&pt, &Cube::unit(&[1, 0, 0])));
    }

    #[test]
    fn incidence_translation_invariant() {
        let l = AffineSubspace::line(vec![0.3, -0.2], vec![0.6, 0.8]).unwrap();
        for z in [[0, 0], [1, 1], [-2, 3], [0, -1]] {
            let q = Cube::unit(&z);
            let v = [7.0, -4.0];
            let moved = Cube::unit(&[z[0] + 7, z[1] - 4]);
            assert_eq!(cube_incidence(&l, &q), cube_incidence(&l.translated(&v), &moved));
        }
    }

    #[test]
    fn grid_counts() {
        let g = DyadicGrid::new(2, 1.0).unwrap();
        // Corners in {-2..1}^2 whose cube is within distance 1.
        assert_eq!(g.len(), 12);
        let g0 = DyadicGrid::new(2, 0.0).unwrap();
        assert_eq!(g0.len(), 4);
        let mut seen = std::collections::BTreeSet::new();
        for c in g.corners() {
            assert!(seen.insert(c.clone()));
        }
    }

    #[test]
    fn section_volumes() {
        let q = Cube::unit(&[0, 0, 0]);
        let diag = AffineSubspace::line(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert!((section_volume(&diag, &q).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        let plane = AffineSubspace::new(vec![0.0, 0.0, 0.5], &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((section_volume(&plane, &q).unwrap() - 1.0).abs() < 1e-12);
        let tilted = AffineSubspace::new(vec![0.0, 0.0, 0.0], &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        assert!((section_volume(&tilted, &q).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uniform_sides() {
        let fam = vec![AffineFamily::new(2, 1, vec![x_axis()]).unwrap()];
        let big_r = 10.0;
        let l = lhs_uniform(&fam, &[1.0], big_r, &None).unwrap();
        assert!((l / (2.0 * big_r) - 1.0).abs() < 0.02, "{l}");
        let empty = vec![AffineFamily::new(2, 1, vec![]).unwrap()];
        assert_eq!(lhs_uniform(&empty, &[1.0], big_r, &None).unwrap(), 0.0);
        let y = AffineSubspace::line(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
        let two = vec![
            AffineFamily::new(2, 1, vec![x_axis()]).unwrap(),
            AffineFamily::new(2, 1, vec![y]).unwrap(),
        ];
        assert!((lhs_uniform(&two, &[1.0, 1.0], big_r, &None).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rhs_uniform(&two, &[1.0, 1.0], 1.0, &None).unwrap(), 1.0);
        // Homogeneity: doubling every tube function scales both sides by 2^{Σp}.
        let sc = Some(vec![vec![2.0], vec![2.0]]);
        assert!((lhs_uniform(&two, &[1.0, 1.0], big_r, &sc).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(rhs_uniform(&two, &[1.0, 1.0], 1.0, &sc).unwrap(), 4.0);
    }

    #[test]
    fn fremlin_side_on_grid_lines() {
        // Lines at half-integers meet single cubes in the interior; each
        // cube of the central block has one tuple with BL = 1.
        let fam = grid_lines_instance(4).unwrap();
        let rep = lhs_fremlin(&fam, &[1.0, 1.0], 4.0, FremlinOptions::default()).unwrap();
        assert!((rep.lhs - 16.0).abs() < 1e-4, "{}", rep.lhs);
        assert_eq!(rep.rhs, 16.0);
        assert_eq!(rep.bl_source, vec![BlSource::ClosedForm]);
        // Integer offsets put each line on a shared face of two cube rows.
        let ints: Vec<AffineFamily> = (0..2)
            .map(|j| {
                let ms = (0..3)
                    .map(|i| {
                        let mut pt = vec![0.0, 0.0];
                        pt[1 - j] = i as f64 - 1.0;
                        let mut d = vec![0.0, 0.0];
                        d[j] = 1.0;
                        AffineSubspace::line(pt, d).unwrap()
                    })
                    .collect();
                AffineFamily::new(2, 1, ms).unwrap()
            })
            .collect();
        let rep = lhs_fremlin(&ints, &[1.0, 1.0], 3.0, FremlinOptions::default()).unwrap();
        for r in &rep.rows {
            let want = (r.incident[0] * r.incident[1]) as f64;
            assert!((r.term - want).abs() < 1e-4 * want.max(1.0), "{r:?}");
        }
        assert!(lhs_fremlin(&fam[..1], &[1.0], 4.0, FremlinOptions::default()).is_err());
    }

    #[test]
    fn lw_grid_ratio_is_one() {
        let rep = lw_kakeya(&grid_lines_instance(6).unwrap(), 6.0).unwrap();
        assert!((rep.ratio.unwrap() - 1.0).abs() < 1e-12, "{:?}", rep.ratio);
        let par = vec![
            AffineFamily::new(2, 1, vec![x_axis()]).unwrap(),
            AffineFamily::new(2, 1, vec![x_axis()]).unwrap(),
        ];
        assert_eq!(lw_kakeya(&par, 3.0).unwrap().lhs, 0.0);
    }

    #[test]
    fn sj_with_p0() {
        let q = Cube::unit(&[0, 0]);
        let sigma = PolynomialMixture::delta(build_p0(2.0, 2).unwrap()).unwrap();
        let h = AffineFamily::new(2, 1, vec![AffineSubspace::line(vec![0.0, 0.3], vec![1.0, 0.0]).unwrap()]).unwrap();
        let big_r = 2.0;
        let s = sj_functional(&h, &q, &sigma, big_r, MeshOptions::default()).unwrap();
        assert!((s - 1.0 / big_r).abs() < 1e-9, "{s}");
        // A line with no crossing sheet in the cube pairs to zero.
        let pure = PolyNVars::new(2, vec![(vec![0, 1], 1.0), (vec![0, 0], -0.5)]).unwrap();
        let s0 = sj_functional(&h, &q, &PolynomialMixture::delta(pure).unwrap(), big_r, MeshOptions::default()).unwrap();
        assert!(s0.abs() < 1e-12);
        // Doubling the measure doubles S.
        let mu = mixture_normal_measure(&sigma, &q, MeshOptions::default()).unwrap();
        let a = tangent_pairing(&h, &q, &mu).unwrap();
        let b = tangent_pairing(&h, &q, &mu.scaled(2.0)).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    use crate::polysurf::PolyNVars;

    #[test]
    fn g_functional_examples() {
        let q = Cube::unit(&[0, 0]);
        let a = AffineSubspace::line(vec![0.5, 0.5], vec![1.0, 0.0]).unwrap();
        let b = AffineSubspace::line(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let fams = vec![AffineFamily::new(2, 1, vec![a]).unwrap(), AffineFamily::new(2, 1, vec![b]).unwrap()];
        let (g, src) = g_functional(&fams, &[1.0, 1.0], &q, 4.0, FremlinOptions::default()).unwrap();
        // Weights are the chord lengths 1 and √2; BL = 1/sin(π/4).
        let want = 1.0 * 2f64.sqrt() * std::f64::consts::FRAC_PI_4.sin();
        assert!((g - want).abs() < 1e-6, "{g} vs {want}");
        assert_eq!(src, vec![BlSource::ClosedForm]);
        let far = AffineSubspace::line(vec![0.0, 9.5], vec![1.0, 0.0]).unwrap();
        let fams = vec![AffineFamily::new(2, 1, vec![far]).unwrap(), fams[1].clone()];
        assert_eq!(g_functional(&fams, &[1.0, 1.0], &q, 4.0, FremlinOptions::default()).unwrap().0, 0.0);
    }

    #[test]
    fn duality_cases() {
        let single = duality_check(&[3.0], &[1.0], &[1.0, 1.0], &[2.0, 5.0]).unwrap();
        assert!(single.converse.holds && single.forward.holds);
        assert!((single.converse.product_ratio - 1.0).abs() < 1e-12);
        let eq = duality_check(&[2.0; 4], &[0.25; 4], &[0.5, 0.5, 0.5], &[1.0, 2.0, 3.0]).unwrap();
        assert!((eq.converse.holder_ratio - 1.0).abs() < 1e-12);
        assert!(eq.forward.holds);
        assert!(duality_check(&[1.0, 2.0], &[0.5, 0.6], &[1.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(duality_check(&[1.0], &[1.0], &[0.3, 0.3], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn random_families_are_seeded() {
        let a = random_line_families(10, 8.0, 3).unwrap();
        let b = random_line_families(10, 8.0, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].len(), 10);
        let rep = lw_kakeya(&a, 24.0).unwrap();
        assert!(rep.ratio.unwrap() > 0.0);
    }
}
