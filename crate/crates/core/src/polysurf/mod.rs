//! Polynomial hypersurfaces: zero-set meshing, normal measures, directional
//! areas, the grid polynomial `p₀`, and the root-count / area checks.
//!
//! Polynomials are stored as products of sparse factors. A product of many
//! linear factors (such as `p₀`) is evaluated factor by factor, which is
//! stable where the expanded form would not be.

mod checks;
mod mesh;
mod roots;

pub use checks::{
    bezout_area_check, bisection_area_check, crofton_agreement, crofton_root_oracle, ellipse_bisection_check, BezoutReport,
    BisectionCheck, CroftonEstimate, EllipseBisection,
};
pub use mesh::{directional_area, mesh_zero_set, normal_measure, Facet, MeshOptions, ZeroSetMesh};
pub use roots::{line_roots, real_roots_in, LineRoots};

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::exterior::GradedMeasure;

type Terms = BTreeMap<Vec<u32>, f64>;

/// Real polynomial in `n` variables, kept as a product of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyNVars {
    n: usize,
    factors: Vec<Terms>,
}

fn clean(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Terms> {
    let mut out = Terms::new();
    for (e, c) in terms {
        if e.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: e.len(),
            });
        }
        if !c.is_finite() {
            return Err(invalid("polynomial coefficients must be finite"));
        }
        if c != 0.0 {
            *out.entry(e).or_insert(0.0) += c;
        }
    }
    out.retain(|_, c| *c != 0.0);
    Ok(out)
}

fn term_degree(e: &[u32]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

fn eval_terms(t: &Terms, x: &[f64]) -> f64 {
    t.iter()
        .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
        .sum()
}

fn grad_terms(t: &Terms, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    for (e, c) in t {
        for i in 0..n {
            if e[i] == 0 {
                continue;
            }
            let mut v = c * e[i] as f64;
            for (j, (&k, &xj)) in e.iter().zip(x).enumerate() {
                let k = if j == i { k - 1 } else { k };
                v *= xj.powi(k as i32);
            }
            g[i] += v;
        }
    }
    g
}

impl PolyNVars {
    /// Polynomial from `(exponents, coefficient)` terms.
    pub fn new(n: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        Self::from_factors(n, vec![terms])
    }

    /// Product of the given factors.
    pub fn from_factors(n: usize, factors: Vec<Vec<(Vec<u32>, f64)>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        let factors = factors.into_iter().map(|f| clean(n, f)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, factors })
    }

    /// `Σ a_i x_i + b`.
    pub fn affine(a: &[f64], b: f64) -> Result<Self> {
        let n = a.len();
        let mut terms = vec![(vec![0; n], b)];
        for (i, &ai) in a.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            terms.push((e, ai));
        }
        Self::new(n, terms)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> impl Iterator<Item = Vec<(Vec<u32>, f64)>> + '_ {
        self.factors.iter().map(|t| t.iter().map(|(e, c)| (e.clone(), *c)).collect())
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn is_zero(&self) -> bool {
        self.factors.iter().any(|f| f.is_empty())
    }

    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|f| f.keys().map(|e| term_degree(e)).max().unwrap_or(0))
            .sum()
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { n: self.n, factors })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|f| eval_terms(f, x)).product()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let vals: Vec<f64> = self.factors.iter().map(|f| eval_terms(f, x)).collect();
        let mut g = vec![0.0; self.n];
        for (i, f) in self.factors.iter().enumerate() {
            let others: f64 = vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
            if others == 0.0 {
                continue;
            }
            for (gk, dk) in g.iter_mut().zip(grad_terms(f, x)) {
                *gk += others * dk;
            }
        }
        g
    }

    /// Expanded `(exponents, coefficient)` terms.
    pub fn expand(&self) -> Vec<(Vec<u32>, f64)> {
        let mut acc: Terms = Terms::new();
        acc.insert(vec![0; self.n], 1.0);
        for f in &self.factors {
            let mut next = Terms::new();
            for (ea, ca) in &acc {
                for (eb, cb) in f {
                    let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                    *next.entry(e).or_insert(0.0) += ca * cb;
                }
            }
            next.retain(|_, c| *c != 0.0);
            acc = next;
        }
        acc.into_iter().collect()
    }

    /// Coefficients (ascending in `t`) of each factor restricted to the line
    /// `a + t d`.
    pub fn restrict_to_line(&self, a: &[f64], d: &[f64]) -> Vec<Vec<f64>> {
        self.factors
            .iter()
            .map(|f| {
                let deg = f.keys().map(|e| term_degree(e)).max().unwrap_or(0);
                let mut out = vec![0.0; deg + 1];
                for (e, c) in f {
                    let mut poly = vec![*c];
                    for (i, &k) in e.iter().enumerate() {
                        for _ in 0..k {
                            let mut next = vec![0.0; poly.len() + 1];
                            for (j, &pj) in poly.iter().enumerate() {
                                next[j] += pj * a[i];
                                next[j + 1] += pj * d[i];
                            }
                            poly = next;
                        }
                    }
                    for (o, p) in out.iter_mut().zip(poly) {
                        *o += p;
                    }
                }
                out
            })
            .collect()
    }
}

/// Axis-parallel cube `lo + [0, side]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub lo: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(lo: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(invalid("cube side must be positive"));
        }
        Ok(Self { lo, side })
    }

    /// Unit cube with integer corner `z`.
    pub fn unit(z: &[i64]) -> Self {
        Self {
            lo: z.iter().map(|&v| v as f64).collect(),
            side: 1.0,
        }
    }

    /// `[-s/2, s/2]^n`.
    pub fn centered(n: usize, side: f64) -> Self {
        Self {
            lo: vec![-side / 2.0; n],
            side,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().map(|l| l + self.side / 2.0).collect()
    }

    pub fn contains(&self, x: &[f64], pad: f64) -> bool {
        x.iter().zip(&self.lo).all(|(xi, l)| *xi >= l - pad && *xi <= l + self.side + pad)
    }

    /// Parameter interval of the line `a + t d` inside the cube.
    pub fn clip_line(&self, a: &[f64], d: &[f64]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..a.len() {
            let (l, h) = (self.lo[i], self.lo[i] + self.side);
            if d[i].abs() < 1e-300 {
                if a[i] < l || a[i] > h {
                    return None;
                }
            } else {
                let (t0, t1) = ((l - a[i]) / d[i], (h - a[i]) / d[i]);
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        }
        (lo < hi).then_some((lo, hi))
    }
}

/// Finite atomic probability measure on nonzero polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMixture {
    items: Vec<(PolyNVars, f64)>,
}

impl PolynomialMixture {
    pub fn new(items: Vec<(PolyNVars, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(invalid("empty mixture"));
        }
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 || items.iter().any(|(_, w)| !(*w >= 0.0)) {
            return Err(invalid(format!("mixture weights must be >= 0 and sum to 1, got {total}")));
        }
        if items.iter().any(|(p, _)| p.is_zero()) {
            return Err(invalid("mixture members must be nonzero"));
        }
        let n = items[0].0.dim();
        if items.iter().any(|(p, _)| p.dim() != n) {
            return Err(invalid("mixture members differ in dimension"));
        }
        Ok(Self { items })
    }

    pub fn delta(p: PolyNVars) -> Result<Self> {
        Self::new(vec![(p, 1.0)])
    }

    pub fn items(&self) -> &[(PolyNVars, f64)] {
        &self.items
    }

    pub fn max_degree(&self) -> usize {
        self.items.iter().map(|(p, _)| p.degree()).max().unwrap_or(0)
    }
}

/// `∫ N(Z_p ∩ Q) dσ(p)` for an atomic mixture.
pub fn mixture_normal_measure(sigma: &PolynomialMixture, q: &Cube, opts: MeshOptions) -> Result<GradedMeasure> {
    let n = q.dim();
    let mut out = GradedMeasure::empty(n, 1)?;
    for (p, w) in sigma.items() {
        let m = mesh_zero_set(p, q, opts)?;
        out = out.union(&normal_measure(&m)?.scaled(*w))?;
    }
    Ok(out)
}

/// Half-integers `c` with `|c| <= R + 1`.
pub fn p0_levels(big_r: f64) -> Vec<f64> {
    let top = (big_r + 1.0 - 0.5).floor() as i64;
    (-top - 1..=top).map(|k| k as f64 + 0.5).filter(|c| c.abs() <= big_r + 1.0).collect()
}

/// `p₀(x) = Π_{c ∈ ℤ+1/2, |c| <= R+1} Π_i (x_i - c)`.
pub fn build_p0(big_r: f64, n: usize) -> Result<PolyNVars> {
    if !(big_r > 0.0) {
        return Err(invalid("R must be positive"));
    }
    let mut factors = Vec::new();
    for c in p0_levels(big_r) {
        for i in 0..n {
            let mut e = vec![0; n];
            let zero = e.clone();
            e[i] = 1;
            factors.push(vec![(e, 1.0), (zero, -c)]);
        }
    }
    PolyNVars::from_factors(n, factors)
}
