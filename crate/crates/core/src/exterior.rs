//! Exterior algebra over `R^n` in the dense multi-index basis, and finite
//! atomic measures on simple blades taken modulo sign.
//!
//! A grade-`k` element is stored as `C(n, k)` coefficients indexed by the
//! `k`-element subsets of `{0, .., n-1}` in lexicographic order. With the
//! Euclidean inner product this basis is orthonormal, so the Gram-determinant
//! inner product of two simple blades is the coefficient dot product.
//!
//! Blades are identified only up to sign. Nothing here canonicalises a sign;
//! every consumer takes absolute values instead.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg;

pub const MAX_DIM: usize = 8;

struct BasisTable {
    masks: Vec<u16>,
    index_of: Vec<u32>,
}

fn tables() -> &'static Vec<Vec<BasisTable>> {
    static TABLES: OnceLock<Vec<Vec<BasisTable>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| {
                (0..=n)
                    .map(|k| {
                        let mut masks = Vec::new();
                        lex_subsets(n, k, 0, 0, &mut masks);
                        let mut index_of = vec![u32::MAX; 1 << n];
                        for (i, &m) in masks.iter().enumerate() {
                            index_of[m as usize] = i as u32;
                        }
                        BasisTable { masks, index_of }
                    })
                    .collect()
            })
            .collect()
    })
}

fn lex_subsets(n: usize, k: usize, start: usize, acc: u16, out: &mut Vec<u16>) {
    if k == 0 {
        out.push(acc);
        return;
    }
    for i in start..n {
        if n - i < k {
            break;
        }
        lex_subsets(n, k - 1, i + 1, acc | (1 << i), out);
    }
}

fn table(n: usize, k: usize) -> &'static BasisTable {
    &tables()[n][k]
}

/// Sign of `e_a ^ e_b` relative to `e_{a | b}` for disjoint masks.
fn merge_sign(a: u16, b: u16) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        let above = if j >= 15 { 0 } else { a & !((1u16 << (j + 1)) - 1) };
        swaps += above.count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

/// Homogeneous element of `Λ^k R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiVector {
    n: usize,
    k: usize,
    coeffs: Vec<f64>,
}

impl MultiVector {
    pub fn zero(n: usize, k: usize) -> Result<Self> {
        check_dim(n)?;
        if k > n {
            return Err(Error::GradeOverflow { left: k, right: 0, n });
        }
        Ok(Self {
            n,
            k,
            coeffs: vec![0.0; linalg::binomial(n, k)],
        })
    }

    pub fn from_coeffs(n: usize, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut mv = Self::zero(n, k)?;
        if coeffs.len() != mv.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: mv.coeffs.len(),
                got: coeffs.len(),
            });
        }
        mv.coeffs = coeffs;
        Ok(mv)
    }

    pub fn scalar(n: usize, value: f64) -> Result<Self> {
        Self::from_coeffs(n, 0, vec![value])
    }

    pub fn vector(v: &[f64]) -> Result<Self> {
        Self::from_coeffs(v.len(), 1, v.to_vec())
    }

    /// Basis blade `e_{i_1} ^ .. ^ e_{i_k}` for zero-based `indices`, signed by
    /// the permutation sorting them.
    pub fn basis_blade(n: usize, indices: &[usize]) -> Result<Self> {
        let mut mv = Self::scalar(n, 1.0)?;
        for &i in indices {
            if i >= n {
                return Err(Error::DimensionMismatch { expected: n, got: i + 1 });
            }
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            mv = mv.wedge(&Self::vector(&e)?)?;
        }
        Ok(mv)
    }

    /// Volume form `e_0 ^ .. ^ e_{n-1}`.
    pub fn volume(n: usize) -> Result<Self> {
        Self::from_coeffs(n, n, vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient on the basis blade with (sorted, zero-based) `indices`.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        let mask = indices.iter().fold(0u16, |m, &i| m | (1 << i));
        let idx = table(self.n, self.k).index_of[mask as usize];
        if idx == u32::MAX {
            0.0
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let n = self.n;
        if self.k + other.k > n {
            return Err(Error::GradeOverflow {
                left: self.k,
                right: other.k,
                n,
            });
        }
        let ta = table(n, self.k);
        let tb = table(n, other.k);
        let tc = table(n, self.k + other.k);
        let mut out = vec![0.0; tc.masks.len()];
        for (ia, &ma) in ta.masks.iter().enumerate() {
            let ca = self.coeffs[ia];
            if ca == 0.0 {
                continue;
            }
            for (ib, &mb) in tb.masks.iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let cb = other.coeffs[ib];
                if cb == 0.0 {
                    continue;
                }
                let ic = tc.index_of[(ma | mb) as usize] as usize;
                out[ic] += merge_sign(ma, mb) * ca * cb;
            }
        }
        Ok(Self {
            n,
            k: self.k + other.k,
            coeffs: out,
        })
    }

    /// Hodge star with the convention `a ^ *b = <a, b> vol`.
    pub fn hodge_star(&self) -> Self {
        let n = self.n;
        let full: u16 = ((1u32 << n) - 1) as u16;
        let ta = table(n, self.k);
        let tc = table(n, n - self.k);
        let mut out = vec![0.0; tc.masks.len()];
        for (i, &m) in ta.masks.iter().enumerate() {
            let comp = full & !m;
            let j = tc.index_of[comp as usize] as usize;
            out[j] = merge_sign(m, comp) * self.coeffs[i];
        }
        Self {
            n,
            k: n - self.k,
            coeffs: out,
        }
    }

    /// Signed inner product induced by the Gram determinant.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.k != other.k {
            return Err(Error::GradeMismatch {
                left: self.k,
                right: other.k,
            });
        }
        Ok(linalg::dot(&self.coeffs, &other.coeffs))
    }

    /// `|<a, b>|`, well defined on blades modulo sign.
    pub fn abs_inner(&self, other: &Self) -> Result<f64> {
        self.inner(other).map(f64::abs)
    }

    /// Euclidean norm; for a simple blade, the volume of the parallelepiped
    /// spanned by its generators.
    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coeffs)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            k: self.k,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::GradeMismatch {
                left: self.k,
                right: other.k,
            });
        }
        Ok(Self {
            n: self.n,
            k: self.k,
            coeffs: linalg::add(&self.coeffs, &other.coeffs),
        })
    }
}

/// `|<a, b>|` for same-grade elements.
pub fn abs_inner(a: &MultiVector, b: &MultiVector) -> Result<f64> {
    a.abs_inner(b)
}

pub fn blade_norm(a: &MultiVector) -> f64 {
    a.norm()
}

/// Simple multivector together with vectors generating it.
#[derive(Debug, Clone, PartialEq)]
pub struct Blade {
    mv: MultiVector,
    rep: Vec<Vec<f64>>,
}

impl Blade {
    /// Wedge of the given vectors (rows). An empty list gives the unit scalar
    /// of grade 0 in dimension `n`.
    pub fn from_vectors(n: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut mv = MultiVector::scalar(n, 1.0)?;
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            mv = mv.wedge(&MultiVector::vector(r)?)?;
        }
        Ok(Self {
            mv,
            rep: rows.to_vec(),
        })
    }

    pub fn vector(v: &[f64]) -> Result<Self> {
        Self::from_vectors(v.len(), &[v.to_vec()])
    }

    pub fn mv(&self) -> &MultiVector {
        &self.mv
    }

    pub fn rep(&self) -> &[Vec<f64>] {
        &self.rep
    }

    pub fn grade(&self) -> usize {
        self.mv.k
    }

    pub fn dim(&self) -> usize {
        self.mv.n
    }

    pub fn norm(&self) -> f64 {
        self.mv.norm()
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let mv = self.mv.wedge(&other.mv)?;
        let mut rep = self.rep.clone();
        rep.extend(other.rep.iter().cloned());
        Ok(Self { mv, rep })
    }

    pub fn abs_inner(&self, other: &Self) -> Result<f64> {
        self.mv.abs_inner(&other.mv)
    }

    /// Hodge dual. The generators of the result span the orthogonal
    /// complement of this blade's span and are scaled to carry its norm.
    pub fn hodge_star(&self) -> Result<Self> {
        let n = self.dim();
        let mv = self.mv.hodge_star();
        let span = linalg::orthonormal_span(&self.rep, 1e-12);
        let mut rep = linalg::orthogonal_complement(&span, n);
        if span.len() < self.rep.len() || rep.len() != n - self.grade() {
            // Degenerate blade: the dual is zero.
            rep = vec![vec![0.0; n]; n - self.grade()];
        } else if let Some(first) = rep.first_mut() {
            let s = self.norm();
            for x in first.iter_mut() {
                *x *= s;
            }
        }
        Ok(Self { mv, rep })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub blade: Blade,
    pub weight: f64,
}

/// Finite atomic measure on `|Λ^k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMeasure {
    n: usize,
    k: usize,
    atoms: Vec<Atom>,
}

const PRUNE_REL: f64 = 1e-15;

impl GradedMeasure {
    pub fn empty(n: usize, k: usize) -> Result<Self> {
        check_dim(n)?;
        if k > n {
            return Err(Error::GradeOverflow { left: k, right: 0, n });
        }
        Ok(Self {
            n,
            k,
            atoms: Vec::new(),
        })
    }

    pub fn new(n: usize, k: usize, atoms: Vec<(Blade, f64)>) -> Result<Self> {
        let mut m = Self::empty(n, k)?;
        for (b, w) in atoms {
            m.push(b, w)?;
        }
        Ok(m)
    }

    /// Point mass of weight 1 at `b`.
    pub fn delta(b: Blade) -> Result<Self> {
        Self::new(b.dim(), b.grade(), vec![(b, 1.0)])
    }

    /// Grade-1 measure from `(direction, weight)` pairs.
    pub fn from_directions(n: usize, atoms: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut m = Self::empty(n, 1)?;
        for (u, w) in atoms {
            m.push(Blade::vector(u)?, *w)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, blade: Blade, weight: f64) -> Result<()> {
        if blade.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: blade.dim(),
            });
        }
        if blade.grade() != self.k {
            return Err(Error::GradeMismatch {
                left: self.k,
                right: blade.grade(),
            });
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidInput(format!(
                "measure weights must be finite and nonnegative, got {weight}"
            )));
        }
        self.atoms.push(Atom { blade, weight });
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// First moment `|μ| = ∫ |v| dμ(v)`.
    pub fn first_moment(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.blade.norm()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.weight *= s;
        }
        out
    }

    /// Sum of measures (concatenation of atoms).
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::GradeMismatch {
                left: self.k,
                right: other.k,
            });
        }
        let mut out = self.clone();
        out.atoms.extend(other.atoms.iter().cloned());
        Ok(out)
    }

    /// Pushforward of `m1 x m2` under the wedge product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.k + other.k > self.n {
            return Err(Error::GradeOverflow {
                left: self.k,
                right: other.k,
                n: self.n,
            });
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom {
                    blade: a.blade.wedge(&b.blade)?,
                    weight: a.weight * b.weight,
                });
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        atoms.retain(|a| a.weight >= PRUNE_REL * total);
        Ok(Self {
            n: self.n,
            k: self.k + other.k,
            atoms,
        })
    }

    /// `μ^{∧k}` for a grade-1 measure; `k = 0` gives the unit point mass.
    pub fn wedge_power(&self, k: usize) -> Result<Self> {
        if self.k != 1 {
            return Err(Error::GradeMismatch { left: self.k, right: 1 });
        }
        let mut out = Self::delta(Blade::from_vectors(self.n, &[])?)?;
        for _ in 0..k {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Pushforward under the Hodge star.
    pub fn hodge_star(&self) -> Result<Self> {
        let mut out = Self::empty(self.n, self.n - self.k)?;
        for a in &self.atoms {
            out.push(a.blade.hodge_star()?, a.weight)?;
        }
        Ok(out)
    }

    /// First moment of the pairing measure against a point mass at `t`:
    /// `Σ w |<b, t>|`.
    pub fn pairing_moment(&self, t: &Blade) -> Result<f64> {
        if t.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: t.dim(),
            });
        }
        if t.grade() != self.k {
            return Err(Error::GradeMismatch {
                left: self.k,
                right: t.grade(),
            });
        }
        let mut s = 0.0;
        for a in &self.atoms {
            s += a.weight * a.blade.abs_inner(t)?;
        }
        Ok(s)
    }

    /// `|<μ^{∧k}, t>|` for a grade-1 measure and a grade-`k` blade, summed over
    /// ordered `k`-tuples of atoms without materialising the power. Uses
    /// `<u_1 ^ .. ^ u_k, t_1 ^ .. ^ t_k> = det(<u_i, t_j>)`.
    pub fn power_pairing_moment(&self, t: &Blade) -> Result<f64> {
        if self.k != 1 {
            return Err(Error::GradeMismatch { left: self.k, right: 1 });
        }
        if t.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: t.dim(),
            });
        }
        let k = t.grade();
        if k == 0 {
            return Ok(1.0);
        }
        let proj: Vec<(Vec<f64>, f64)> = self
            .atoms
            .iter()
            .map(|a| {
                let u = &a.blade.rep()[0];
                (
                    t.rep().iter().map(|tj| linalg::dot(u, tj)).collect(),
                    a.weight,
                )
            })
            .collect();
        Ok(tuple_det_moment(&proj, k))
    }

    /// `|μ^{∧k}|` for a grade-1 measure.
    pub fn power_first_moment(&self, k: usize) -> Result<f64> {
        if self.k != 1 {
            return Err(Error::GradeMismatch { left: self.k, right: 1 });
        }
        if k > self.n {
            return Err(Error::GradeOverflow {
                left: k,
                right: 0,
                n: self.n,
            });
        }
        if k == self.n {
            let proj: Vec<(Vec<f64>, f64)> = self
                .atoms
                .iter()
                .map(|a| (a.blade.rep()[0].clone(), a.weight))
                .collect();
            return Ok(tuple_det_moment(&proj, k));
        }
        Ok(self.wedge_power(k)?.first_moment())
    }

    /// Merge grade-1 atoms whose directions agree up to sign (within `tol`
    /// in angle). Direction vectors are normalised and the weight absorbs
    /// their length, so every moment is preserved.
    pub fn compress_directions(&self, tol: f64) -> Result<Self> {
        if self.k != 1 {
            return Err(Error::GradeMismatch { left: self.k, right: 1 });
        }
        let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
        for a in &self.atoms {
            let u = &a.blade.rep()[0];
            let len = linalg::norm(u);
            if len == 0.0 || a.weight == 0.0 {
                continue;
            }
            let u = linalg::scale(u, 1.0 / len);
            let w = a.weight * len;
            match dirs
                .iter_mut()
                .find(|(d, _)| 1.0 - linalg::dot(d, &u).abs() < tol)
            {
                Some((_, acc)) => *acc += w,
                None => dirs.push((u, w)),
            }
        }
        Self::from_directions(self.n, &dirs)
    }
}

/// `Σ_{ordered k-tuples} Π w |det(rows)|` where each atom contributes a row
/// in `R^k`.
fn tuple_det_moment(rows: &[(Vec<f64>, f64)], k: usize) -> f64 {
    fn rec(rows: &[(Vec<f64>, f64)], k: usize, chosen: &mut Vec<usize>, acc: f64, sum: &mut f64) {
        if chosen.len() == k {
            let m: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].0.clone()).collect();
            *sum += acc * linalg::det(&m).abs();
            return;
        }
        for i in 0..rows.len() {
            if chosen.contains(&i) || rows[i].1 == 0.0 {
                continue;
            }
            chosen.push(i);
            rec(rows, k, chosen, acc * rows[i].1, sum);
            chosen.pop();
        }
    }
    match k {
        1 => rows.iter().map(|(r, w)| w * r[0].abs()).sum(),
        2 => {
            let mut s = 0.0;
            for (i, (a, wa)) in rows.iter().enumerate() {
                for (b, wb) in &rows[i + 1..] {
                    s += wa * wb * (a[0] * b[1] - a[1] * b[0]).abs();
                }
            }
            2.0 * s
        }
        _ => {
            let mut sum = 0.0;
            rec(rows, k, &mut Vec::new(), 1.0, &mut sum);
            sum
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::f64::consts::PI;

    fn e(n: usize, i: usize) -> MultiVector {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        MultiVector::vector(&v).unwrap()
    }

    #[test]
    fn basis_wedge() {
        let w = e(2, 0).wedge(&e(2, 1)).unwrap();
        assert_eq!(w.grade(), 2);
        assert_eq!(w.coeffs(), &[1.0]);
        let w = e(3, 2).wedge(&e(3, 0)).unwrap();
        assert_eq!(w.coeff(&[0, 2]), -1.0);
    }

    #[test]
    fn wedge_angle_is_sine() {
        for &t in &[0.3, 1.0, 2.5] {
            let a = MultiVector::vector(&[1.0, 0.0]).unwrap();
            let b = MultiVector::vector(&[f64::cos(t), f64::sin(t)]).unwrap();
            let w = a.wedge(&b).unwrap();
            assert!((w.coeffs()[0] - t.sin()).abs() < 1e-15);
            assert!((blade_norm(&w) - t.sin().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn wedge_errors() {
        let a = e(2, 0).wedge(&e(2, 1)).unwrap();
        assert!(matches!(a.wedge(&e(2, 0)), Err(Error::GradeOverflow { .. })));
        assert!(matches!(e(2, 0).wedge(&e(3, 0)), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            MultiVector::zero(9, 1),
            Err(Error::UnsupportedDimension(9))
        ));
    }

    #[test]
    fn hodge_examples() {
        let s = e(2, 0).hodge_star();
        assert_eq!(s.coeffs().iter().map(|c| c.abs()).collect::<Vec<_>>(), vec![0.0, 1.0]);
        let s = e(3, 0).wedge(&e(3, 1)).unwrap().hodge_star();
        assert_eq!(s.coeff(&[2]).abs(), 1.0);
        assert_eq!(s.coeff(&[0]), 0.0);
    }

    #[test]
    fn hodge_defining_identity_and_double_star() {
        let mut r = rng::stream(7);
        for n in 1..=5 {
            for k in 0..=n {
                let c = linalg::binomial(n, k);
                let a = MultiVector::from_coeffs(n, k, rng::gaussian_vec(&mut r, c)).unwrap();
                let b = MultiVector::from_coeffs(n, k, rng::gaussian_vec(&mut r, c)).unwrap();
                let lhs = a.wedge(&b.hodge_star()).unwrap();
                let ip = a.inner(&b).unwrap();
                assert!((lhs.coeffs()[0] - ip).abs() < 1e-12, "n={n} k={k}");
                let ss = a.hodge_star().hodge_star();
                let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
                for (x, y) in ss.coeffs().iter().zip(a.coeffs()) {
                    assert!((x - sign * y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn abs_inner_examples() {
        let e12 = e(2, 0).wedge(&e(2, 1)).unwrap();
        let e21 = e(2, 1).wedge(&e(2, 0)).unwrap();
        assert_eq!(abs_inner(&e12, &e12).unwrap(), 1.0);
        assert_eq!(abs_inner(&e12, &e21).unwrap(), 1.0);
        let a = Blade::from_vectors(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let b = Blade::from_vectors(2, &[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        // det [[0, 1], [1, 2]] = -1
        assert!((a.abs_inner(&b).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            abs_inner(&e12, &e(2, 0)),
            Err(Error::GradeMismatch { .. })
        ));
    }

    #[test]
    fn norm_scaling() {
        let b = Blade::from_vectors(2, &[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(b.norm(), 6.0);
        let b = Blade::from_vectors(2, &[vec![1.0, 0.0], vec![(PI / 3.0).cos(), (PI / 3.0).sin()]]).unwrap();
        assert!((b.norm() - (PI / 3.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn measure_wedge_examples() {
        let e1 = Blade::vector(&[1.0, 0.0]).unwrap();
        let e2 = Blade::vector(&[0.0, 1.0]).unwrap();
        let d1 = GradedMeasure::delta(e1.clone()).unwrap();
        let d2 = GradedMeasure::delta(e2.clone()).unwrap();
        let w = d1.wedge(&d2).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.atoms()[0].blade.mv().coeffs(), &[1.0]);

        let mu = d1.union(&d2).unwrap();
        let sq = mu.wedge(&mu).unwrap();
        assert_eq!(sq.len(), 4);
        assert!((sq.first_moment() - 2.0).abs() < 1e-15);
        assert!((mu.power_first_moment(2).unwrap() - 2.0).abs() < 1e-15);

        let empty = GradedMeasure::empty(2, 1).unwrap();
        assert!(mu.wedge(&empty).unwrap().is_empty());
    }

    #[test]
    fn pairing_examples() {
        let e1 = Blade::vector(&[1.0, 0.0]).unwrap();
        let e2 = Blade::vector(&[0.0, 1.0]).unwrap();
        let e12 = e1.wedge(&e2).unwrap();
        let d = GradedMeasure::delta(e12.clone()).unwrap();
        assert_eq!(d.pairing_moment(&e12).unwrap(), 1.0);

        let mu = GradedMeasure::from_directions(2, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]).unwrap();
        let sq = mu.wedge_power(2).unwrap();
        assert!((sq.pairing_moment(&e12).unwrap() - 2.0).abs() < 1e-15);
        assert!((mu.power_pairing_moment(&e12).unwrap() - 2.0).abs() < 1e-15);

        let e3 = Blade::vector(&[0.0, 0.0, 1.0]).unwrap();
        let m = GradedMeasure::from_directions(3, &[(vec![1.0, 0.0, 0.0], 2.0), (vec![0.0, 1.0, 0.0], 0.5)]).unwrap();
        assert_eq!(m.pairing_moment(&e3).unwrap(), 0.0);
    }

    #[test]
    fn zero_atoms_retained() {
        let mu = GradedMeasure::from_directions(2, &[(vec![1.0, 0.0], 1.0)]).unwrap();
        let sq = mu.wedge(&mu).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(sq.first_moment(), 0.0);
    }

    #[test]
    fn negative_weight_rejected() {
        let mut m = GradedMeasure::empty(2, 1).unwrap();
        assert!(m.push(Blade::vector(&[1.0, 0.0]).unwrap(), -1.0).is_err());
    }

    #[test]
    fn power_pairing_matches_materialised() {
        let mut r = rng::stream(3);
        let atoms: Vec<(Vec<f64>, f64)> = (0..5)
            .map(|i| (rng::gaussian_vec(&mut r, 3), 0.5 + i as f64 * 0.1))
            .collect();
        let mu = GradedMeasure::from_directions(3, &atoms).unwrap();
        let t = Blade::from_vectors(3, &[rng::gaussian_vec(&mut r, 3), rng::gaussian_vec(&mut r, 3)]).unwrap();
        let a = mu.wedge_power(2).unwrap().pairing_moment(&t).unwrap();
        let b = mu.power_pairing_moment(&t).unwrap();
        assert!((a - b).abs() < 1e-12 * a.max(1.0));
        let c = mu.wedge_power(3).unwrap().first_moment();
        let d = mu.power_first_moment(3).unwrap();
        assert!((c - d).abs() < 1e-12 * c.max(1.0));
    }

    #[test]
    fn hodge_measure_keeps_norms() {
        let mu = GradedMeasure::from_directions(3, &[(vec![1.0, 2.0, 0.0], 1.0), (vec![0.0, 0.0, 3.0], 2.0)]).unwrap();
        let s = mu.hodge_star().unwrap();
        assert_eq!(s.grade(), 2);
        assert!((s.first_moment() - mu.first_moment()).abs() < 1e-12);
        for (a, b) in s.atoms().iter().zip(mu.atoms()) {
            let dual = Blade::from_vectors(3, a.blade.rep()).unwrap();
            assert!((dual.norm() - b.blade.norm()).abs() < 1e-12);
        }
    }
}
