//! Zero-set extraction: marching squares in the plane, marching tetrahedra
//! (six-simplex split of each cell) in space. Crossings are refined along
//! cell edges by bisection; grid values equal to zero count as non-positive.

use crate::error::{invalid, Error, Result};
use crate::exterior::GradedMeasure;
use crate::linalg;

use super::{Cube, PolyNVars};

#[derive(Debug, Clone, Copy)]
pub struct MeshOptions {
    /// Cells per cube side.
    pub cells: usize,
    /// Re-mesh at half the spacing and flag relative area changes above 2%.
    pub check_convergence: bool,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            cells: 32,
            check_convergence: false,
        }
    }
}

/// Segment (plane) or triangle (space) of the zero set.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: Vec<Vec<f64>>,
    pub centroid: Vec<f64>,
    /// `∇p / |∇p|` at the centroid.
    pub normal: Vec<f64>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSetMesh {
    pub cube: Cube,
    pub cells: usize,
    pub facets: Vec<Facet>,
    /// Area of facets dropped for a vanishing gradient; it is redistributed
    /// proportionally over the kept facets.
    pub discarded_area: f64,
    /// Set when the convergence check ran and the area moved by more than 2%.
    pub coarse: Option<bool>,
}

impl ZeroSetMesh {
    pub fn total_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    /// CSV rows `centroid..., normal..., area`.
    pub fn to_csv(&self) -> String {
        let n = self.cube.dim();
        let mut s = String::new();
        let axes = ["x", "y", "z"];
        let head: Vec<String> = (0..n)
            .map(|i| format!("c{}", axes[i]))
            .chain((0..n).map(|i| format!("n{}", axes[i])))
            .chain(std::iter::once("area".to_string()))
            .collect();
        s.push_str(&head.join(","));
        s.push('\n');
        for f in &self.facets {
            let row: Vec<String> = f
                .centroid
                .iter()
                .chain(&f.normal)
                .chain(std::iter::once(&f.area))
                .map(|v| format!("{v:.12e}"))
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

const ROOT_TOL: f64 = 1e-10;

/// Crossing on the edge `a -> b` where `p(a) <= 0 < p(b)` or the reverse.
fn refine(p: &PolyNVars, a: &[f64], b: &[f64], fa: f64, scale: f64) -> Vec<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let neg_at_lo = fa <= 0.0;
    let at = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    let len = linalg::norm(&linalg::sub(a, b)).max(1e-300);
    while (hi - lo) * len > ROOT_TOL * scale {
        let mid = 0.5 * (lo + hi);
        let v = p.eval(&at(mid));
        if (v <= 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

struct Grid<'a> {
    p: &'a PolyNVars,
    cube: &'a Cube,
    cells: usize,
    h: f64,
    values: Vec<f64>,
}

impl<'a> Grid<'a> {
    fn new(p: &'a PolyNVars, cube: &'a Cube, cells: usize) -> Self {
        let n = cube.dim();
        let h = cube.side / cells as f64;
        let pts = cells + 1;
        let total = pts.pow(n as u32);
        let mut values = Vec::with_capacity(total);
        for k in 0..total {
            values.push(p.eval(&Self::coord(cube, h, pts, n, k)));
        }
        Self {
            p,
            cube,
            cells,
            h,
            values,
        }
    }

    fn coord(cube: &Cube, h: f64, pts: usize, n: usize, mut k: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for xi in x.iter_mut().zip(&cube.lo) {
            *xi.0 = xi.1 + (k % pts) as f64 * h;
            k /= pts;
        }
        x
    }

    fn index(&self, idx: &[usize]) -> usize {
        let pts = self.cells + 1;
        idx.iter().rev().fold(0, |acc, &i| acc * pts + i)
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.cube.lo).map(|(&i, l)| l + i as f64 * self.h).collect()
    }

    fn crossing(&self, a: &[usize], b: &[usize]) -> Option<Vec<f64>> {
        let (fa, fb) = (self.values[self.index(a)], self.values[self.index(b)]);
        if (fa > 0.0) == (fb > 0.0) {
            return None;
        }
        Some(refine(self.p, &self.point(a), &self.point(b), fa, self.cube.side))
    }
}

fn marching_squares(g: &Grid) -> Vec<Vec<Vec<f64>>> {
    let mut segs = Vec::new();
    for j in 0..g.cells {
        for i in 0..g.cells {
            // corners counterclockwise
            let c = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]];
            let pos: Vec<bool> = c.iter().map(|k| g.values[g.index(k)] > 0.0).collect();
            let mut pts: Vec<(usize, Vec<f64>)> = Vec::new();
            for e in 0..4 {
                if let Some(x) = g.crossing(&c[e], &c[(e + 1) % 4]) {
                    pts.push((e, x));
                }
            }
            match pts.len() {
                2 => segs.push(vec![pts[0].1.clone(), pts[1].1.clone()]),
                4 => {
                    // Saddle: connect so that the centre's sign region stays joined.
                    let mid = [
                        g.cube.lo[0] + (i as f64 + 0.5) * g.h,
                        g.cube.lo[1] + (j as f64 + 0.5) * g.h,
                    ];
                    let centre_pos = g.p.eval(&mid) > 0.0;
                    // Edge e runs from corner e to e+1. If corner 0 agrees with the
                    // centre, corner 0's region is joined through the middle and the
                    // cuts isolate corners 1 and 3.
                    if pos[0] == centre_pos {
                        segs.push(vec![pts[0].1.clone(), pts[1].1.clone()]);
                        segs.push(vec![pts[2].1.clone(), pts[3].1.clone()]);
                    } else {
                        segs.push(vec![pts[3].1.clone(), pts[0].1.clone()]);
                        segs.push(vec![pts[1].1.clone(), pts[2].1.clone()]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

/// Six tetrahedra sharing the main diagonal of the unit cell.
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn marching_tetrahedra(g: &Grid) -> Vec<Vec<Vec<f64>>> {
    let mut tris = Vec::new();
    for k in 0..g.cells {
        for j in 0..g.cells {
            for i in 0..g.cells {
                let corner = |c: usize| [i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1)];
                for tet in KUHN {
                    let v: Vec<[usize; 3]> = tet.iter().map(|&c| corner(c)).collect();
                    let pos: Vec<bool> = v.iter().map(|x| g.values[g.index(x)] > 0.0).collect();
                    let inside: Vec<usize> = (0..4).filter(|&a| pos[a]).collect();
                    let outside: Vec<usize> = (0..4).filter(|&a| !pos[a]).collect();
                    let cut = |a: usize, b: usize| g.crossing(&v[a], &v[b]).unwrap();
                    match (inside.len(), outside.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, rest) = if inside.len() == 1 { (inside[0], &outside) } else { (outside[0], &inside) };
                            tris.push(rest.iter().map(|&b| cut(lone, b)).collect());
                        }
                        (2, 2) => {
                            let (a0, a1, b0, b1) = (inside[0], inside[1], outside[0], outside[1]);
                            let q = [cut(a0, b0), cut(a0, b1), cut(a1, b1), cut(a1, b0)];
                            tris.push(vec![q[0].clone(), q[1].clone(), q[2].clone()]);
                            tris.push(vec![q[0].clone(), q[2].clone(), q[3].clone()]);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    tris
}

fn simplex_area(v: &[Vec<f64>]) -> f64 {
    match v.len() {
        2 => linalg::norm(&linalg::sub(&v[1], &v[0])),
        3 => {
            let a = linalg::sub(&v[1], &v[0]);
            let b = linalg::sub(&v[2], &v[0]);
            let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            0.5 * linalg::norm(&c)
        }
        _ => 0.0,
    }
}

fn build(p: &PolyNVars, cube: &Cube, cells: usize) -> Result<ZeroSetMesh> {
    let n = cube.dim();
    let g = Grid::new(p, cube, cells);
    let pieces = if n == 2 { marching_squares(&g) } else { marching_tetrahedra(&g) };
    let mut facets = Vec::with_capacity(pieces.len());
    let mut discarded = 0.0;
    let gscale = p.degree().max(1) as f64;
    for v in pieces {
        let area = simplex_area(&v);
        if area <= 0.0 {
            continue;
        }
        let centroid: Vec<f64> = (0..n).map(|i| v.iter().map(|x| x[i]).sum::<f64>() / v.len() as f64).collect();
        let grad = p.gradient(&centroid);
        let gn = linalg::norm(&grad);
        let vals_scale: f64 = g.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if !(gn > 1e-12 * gscale * vals_scale.max(f64::MIN_POSITIVE) / cube.side) {
            discarded += area;
            continue;
        }
        facets.push(Facet {
            vertices: v,
            centroid,
            normal: linalg::scale(&grad, 1.0 / gn),
            area,
        });
    }
    if discarded > 0.0 {
        let kept: f64 = facets.iter().map(|f| f.area).sum();
        if kept > 0.0 {
            let s = (kept + discarded) / kept;
            facets.iter_mut().for_each(|f| f.area *= s);
        }
    }
    Ok(ZeroSetMesh {
        cube: cube.clone(),
        cells,
        facets,
        discarded_area: discarded,
        coarse: None,
    })
}

/// Mesh `Z_p ∩ Q` for `n ∈ {2, 3}`.
pub fn mesh_zero_set(p: &PolyNVars, q: &Cube, opts: MeshOptions) -> Result<ZeroSetMesh> {
    let n = q.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.dim(),
        });
    }
    if p.is_zero() {
        return Err(invalid("the zero polynomial has no hypersurface"));
    }
    if opts.cells == 0 {
        return Err(invalid("mesh needs at least one cell"));
    }
    let mut m = build(p, q, opts.cells)?;
    if opts.check_convergence {
        let fine = build(p, q, 2 * opts.cells)?;
        let (a, b) = (m.total_area(), fine.total_area());
        let rel = if a.max(b) > 0.0 { (a - b).abs() / a.max(b) } else { 0.0 };
        m.coarse = Some(rel > 0.02);
    }
    Ok(m)
}

/// One grade-1 atom per facet: (normal, area).
pub fn normal_measure(mesh: &ZeroSetMesh) -> Result<GradedMeasure> {
    let atoms: Vec<(Vec<f64>, f64)> = mesh.facets.iter().map(|f| (f.normal.clone(), f.area)).collect();
    GradedMeasure::from_directions(mesh.cube.dim(), &atoms)
}

/// `Σ area |<v, normal>|`.
pub fn directional_area(mesh: &ZeroSetMesh, v: &[f64]) -> f64 {
    mesh.facets.iter().map(|f| f.area * linalg::dot(&f.normal, v).abs()).sum()
}
