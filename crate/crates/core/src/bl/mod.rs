//! Brascamp-Lieb data: subspaces with exponents, the growth exponents of the
//! truncated constant, the finiteness conditions, the closed Loomis-Whitney
//! form, and numerical estimation of truncated and Gaussian constants.
//!
//! Quotients `R^n / T_j` are realised as the orthogonal complements `T_j^⊥`
//! with the Euclidean metric, using a fixed orthonormal complement basis. A
//! function constant at scale `r` on the quotient is constant on the cubes of
//! side `r` of the grid spanned by that basis.

mod estimate;
mod gaussian;
mod lattice;
mod subspace;

pub use estimate::{bl_ratio, bl_truncated_estimate, Budget, SampleTable, TruncatedEstimate};
pub use gaussian::{bl_gaussian, GaussianBl, GaussianOptions};
pub use lattice::{
    check_discrete, check_local, default_lattice, kappa, kappa_term, kappa_tilde, kappa_tilde_term, ExponentResult,
    SubspaceLattice, DEFAULT_LATTICE_CAP,
};
pub use subspace::LinearSubspace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exterior::Blade;

/// Tolerance for the scaling condition `n = Σ p_j n_j`.
pub const SCALING_TOL: f64 = 1e-9;

/// `(T_1, .., T_m)` with exponents `(p_1, .., p_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BLDatum {
    n: usize,
    subspaces: Vec<LinearSubspace>,
    exponents: Vec<f64>,
}

impl BLDatum {
    pub fn new(n: usize, subspaces: Vec<LinearSubspace>, exponents: Vec<f64>) -> Result<Self> {
        if n == 0 || n > crate::exterior::MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if subspaces.len() != exponents.len() {
            return Err(invalid(format!(
                "{} subspaces but {} exponents",
                subspaces.len(),
                exponents.len()
            )));
        }
        if subspaces.is_empty() {
            return Err(invalid("a datum needs at least one subspace"));
        }
        for s in &subspaces {
            if s.ambient() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.ambient(),
                });
            }
        }
        for &p in &exponents {
            if !(p > 0.0) || !p.is_finite() {
                return Err(invalid(format!("exponents must be positive, got {p}")));
            }
        }
        Ok(Self {
            n,
            subspaces,
            exponents,
        })
    }

    /// Build from raw spanning rows; each family of rows is orthonormalised.
    pub fn from_rows(n: usize, rows: &[Vec<Vec<f64>>], exponents: Vec<f64>) -> Result<Self> {
        let subspaces = rows
            .iter()
            .map(|r| LinearSubspace::from_rows(n, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, subspaces, exponents)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[LinearSubspace] {
        &self.subspaces
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// `n_j = n - dim T_j`.
    pub fn codims(&self) -> Vec<usize> {
        self.subspaces.iter().map(|s| self.n - s.dim()).collect()
    }

    /// `P = Σ p_j`.
    pub fn total_power(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// `n - Σ p_j n_j`, the exponent of `r` in the scaling identity.
    pub fn scaling_exponent(&self) -> f64 {
        self.n as f64
            - self
                .exponents
                .iter()
                .zip(self.codims())
                .map(|(p, nj)| p * nj as f64)
                .sum::<f64>()
    }
}

/// Scaling condition: returns `(holds, n - Σ p_j n_j)`.
pub fn check_scaling(d: &BLDatum) -> (bool, f64) {
    let res = d.scaling_exponent();
    (res.abs() < SCALING_TOL, res)
}

/// Inner and outer scales `0 < r < R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationWindow {
    r: f64,
    big_r: f64,
}

impl TruncationWindow {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(invalid(format!(
                "truncation window needs 0 < r < R < inf, got ({r}, {big_r})"
            )));
        }
        Ok(Self { r, big_r })
    }

    pub fn inner(&self) -> f64 {
        self.r
    }

    pub fn outer(&self) -> f64 {
        self.big_r
    }

    /// Outer radius in units of the inner scale, `R / r`.
    pub fn normalized_outer(&self) -> f64 {
        self.big_r / self.r
    }
}

/// Nonnegative function on the quotient `R^n / T_j`, constant on the cells of
/// side `r` of the complement grid. Cell `z` covers `[z r, (z + 1) r)` in
/// complement coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientFn {
    pub j: usize,
    pub r: f64,
    pub values: BTreeMap<Vec<i64>, f64>,
}

impl QuotientFn {
    pub fn new(j: usize, r: f64) -> Self {
        Self {
            j,
            r,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, cell: Vec<i64>, value: f64) -> Result<()> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(invalid(format!("quotient function values must be >= 0, got {value}")));
        }
        if value == 0.0 {
            self.values.remove(&cell);
        } else {
            self.values.insert(cell, value);
        }
        Ok(())
    }

    pub fn get(&self, cell: &[i64]) -> f64 {
        self.values.get(cell).copied().unwrap_or(0.0)
    }

    /// `∫ f` over the quotient: cell volume `r^{n_j}` times the value sum.
    pub fn integral(&self, codim: usize) -> f64 {
        self.r.powi(codim as i32) * self.values.values().sum::<f64>()
    }
}

/// Loomis-Whitney constant `|∧ T_j|^{-1/(m-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LwConstant {
    Finite(f64),
    /// The subspaces fail to span `R^n` transversally.
    Infinite,
}

impl LwConstant {
    pub fn value(&self) -> f64 {
        match self {
            LwConstant::Finite(v) => *v,
            LwConstant::Infinite => f64::INFINITY,
        }
    }
}

/// Whether the datum has the Loomis-Whitney shape `Σ k_j = n`,
/// `p_j = 1/(m-1)`, `m >= 2`.
pub fn is_loomis_whitney(d: &BLDatum) -> bool {
    let m = d.len();
    if m < 2 {
        return false;
    }
    let ksum: usize = d.subspaces.iter().map(|s| s.dim()).sum();
    let p = 1.0 / (m as f64 - 1.0);
    ksum == d.n && d.exponents.iter().all(|&e| (e - p).abs() < 1e-12)
}

/// Norm of the wedge of the subspaces' unit volume forms.
pub fn subspace_wedge_norm(subspaces: &[LinearSubspace]) -> Result<f64> {
    let n = subspaces.first().map(|s| s.ambient()).ok_or_else(|| invalid("no subspaces"))?;
    let mut rows = Vec::new();
    for s in subspaces {
        rows.extend(s.basis().iter().cloned());
    }
    if rows.len() > n {
        return Ok(0.0);
    }
    Ok(Blade::from_vectors(n, &rows)?.norm())
}

pub fn lw_constant(d: &BLDatum) -> Result<LwConstant> {
    if !is_loomis_whitney(d) {
        return Err(Error::Precondition(
            "Loomis-Whitney form needs m >= 2, Σ dim T_j = n and p_j = 1/(m-1)".into(),
        ));
    }
    let w = subspace_wedge_norm(&d.subspaces)?;
    if w < 1e-14 {
        return Ok(LwConstant::Infinite);
    }
    Ok(LwConstant::Finite(w.powf(-1.0 / (d.len() as f64 - 1.0))))
}
