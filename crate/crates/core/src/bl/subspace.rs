use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exterior::Blade;
use crate::linalg;

const SPAN_TOL: f64 = 1e-9;

/// Linear subspace of `R^n` stored as orthonormal basis rows, together with a
/// fixed orthonormal basis of its orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubspace {
    n: usize,
    basis: Vec<Vec<f64>>,
    complement: Vec<Vec<f64>>,
}

impl LinearSubspace {
    /// Span of `rows`, orthonormalised. Rank-deficient input is accepted and
    /// reduced to its span.
    pub fn from_rows(n: usize, rows: &[Vec<f64>]) -> Result<Self> {
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
        }
        let basis = linalg::orthonormal_span(rows, SPAN_TOL);
        Ok(Self::from_orthonormal(n, basis))
    }

    /// Like [`from_rows`](Self::from_rows) but also reports how far the input
    /// was from orthonormal (max entry change).
    pub fn from_rows_reporting(n: usize, rows: &[Vec<f64>]) -> Result<(Self, f64)> {
        let s = Self::from_rows(n, rows)?;
        let adj = if s.basis.len() != rows.len() {
            f64::INFINITY
        } else {
            s.basis
                .iter()
                .zip(rows)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max)
        };
        Ok((s, adj))
    }

    fn from_orthonormal(n: usize, basis: Vec<Vec<f64>>) -> Self {
        let complement = linalg::orthogonal_complement(&basis, n);
        Self {
            n,
            basis,
            complement,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_orthonormal(n, Vec::new())
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::from_orthonormal(n, basis)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Orthonormal basis of `T^⊥`; coordinates in this basis identify the
    /// quotient `R^n / T`.
    pub fn complement_basis(&self) -> &[Vec<f64>] {
        &self.complement
    }

    pub fn orthogonal(&self) -> Self {
        Self::from_orthonormal(self.n, self.complement.clone())
    }

    /// Quotient coordinates of `x`.
    pub fn quotient_coords(&self, x: &[f64]) -> Vec<f64> {
        self.complement.iter().map(|c| linalg::dot(c, x)).collect()
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::from_orthonormal(self.n, linalg::orthonormal_span(&rows, SPAN_TOL))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut rows = self.complement.clone();
        rows.extend(other.complement.iter().cloned());
        let perp = linalg::orthonormal_span(&rows, SPAN_TOL);
        Self::from_orthonormal(self.n, linalg::orthogonal_complement(&perp, self.n))
    }

    /// `dim(self + other)`.
    pub fn sum_dim(&self, other: &Self) -> usize {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        linalg::rank(&rows, SPAN_TOL)
    }

    /// `dim(self ∩ other)`.
    pub fn intersection_dim(&self, other: &Self) -> usize {
        self.dim() + other.dim() - self.sum_dim(other)
    }

    /// Frobenius distance between orthogonal projectors.
    pub fn distance(&self, other: &Self) -> f64 {
        let a = linalg::projector(&self.basis, self.n);
        let b = linalg::projector(&other.basis, self.n);
        (a - b).norm()
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let p: f64 = self.complement.iter().map(|c| linalg::dot(c, v).powi(2)).sum();
        p.sqrt() <= tol * linalg::norm(v).max(1.0)
    }

    /// Unit volume form of the subspace (grade `dim`).
    pub fn blade(&self) -> Result<Blade> {
        Blade::from_vectors(self.n, &self.basis)
    }

    /// Ordering used for deterministic tie-breaks: dimension, then the
    /// flattened basis read lexicographically.
    pub fn tie_order(&self, other: &Self) -> Ordering {
        self.dim().cmp(&other.dim()).then_with(|| {
            let a = self.basis.iter().flatten();
            let b = other.basis.iter().flatten();
            for (x, y) in a.zip(b) {
                match x.partial_cmp(y) {
                    Some(Ordering::Equal) | None => continue,
                    Some(o) => return o,
                }
            }
            Ordering::Equal
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_and_intersection() {
        let x = LinearSubspace::from_rows(3, &[vec![1.0, 0.0, 0.0]]).unwrap();
        let xy = LinearSubspace::from_rows(3, &[vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]]).unwrap();
        let yz = LinearSubspace::from_rows(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(xy.dim(), 2);
        assert_eq!(x.sum(&yz).dim(), 3);
        let i = xy.intersect(&yz);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&[0.0, 1.0, 0.0], 1e-9));
        assert_eq!(xy.intersection_dim(&yz), 1);
        assert_eq!(x.intersection_dim(&yz), 0);
    }

    #[test]
    fn rank_deficient_rows_collapse() {
        let s = LinearSubspace::from_rows(2, &[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(s.dim(), 1);
        let (_, adj) = LinearSubspace::from_rows_reporting(2, &[vec![2.0, 0.0]]).unwrap();
        assert!((adj - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quotient_coordinates_kill_subspace() {
        let s = LinearSubspace::from_rows(3, &[vec![1.0, 2.0, 3.0]]).unwrap();
        let q = s.quotient_coords(&[2.0, 4.0, 6.0]);
        assert_eq!(q.len(), 2);
        assert!(q.iter().all(|c| c.abs() < 1e-12));
    }
}
