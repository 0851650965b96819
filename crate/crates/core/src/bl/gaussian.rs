//! Gaussian BL constant by ascent over positive definite inputs.
//!
//! With `C_j` the quotient coordinate map and `M(A) = Σ p_j C_jᵀ A_j C_j`, the
//! constant is `sup exp(Φ(A))` where
//! `Φ(A) = ½ (Σ p_j log det A_j - log det M(A))`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::rng;

use super::{check_scaling, BLDatum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianBl {
    Value(f64),
    /// The supremum exceeded the divergence cap or `M` was singular.
    Divergent,
    /// The scaling condition fails, so the constant is infinite for trivial
    /// reasons and no optimisation is attempted.
    NotApplicable,
}

impl GaussianBl {
    pub fn value(&self) -> Option<f64> {
        match self {
            GaussianBl::Value(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GaussianOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub divergence_cap: f64,
    pub seed: u64,
}

impl Default for GaussianOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 4000,
            tol: 1e-11,
            divergence_cap: 1e12,
            seed: 0,
        }
    }
}

fn sym_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let e = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

fn log_det_spd(a: &DMatrix<f64>) -> Option<f64> {
    if a.nrows() == 0 {
        return Some(0.0);
    }
    let e = SymmetricEigen::new(a.clone());
    let mut s = 0.0;
    for &l in e.eigenvalues.iter() {
        if !(l > 0.0) {
            return None;
        }
        s += l.ln();
    }
    Some(s)
}

struct Problem {
    n: usize,
    p: Vec<f64>,
    c: Vec<DMatrix<f64>>,
}

impl Problem {
    fn m(&self, a: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for ((c, aj), &p) in self.c.iter().zip(a).zip(&self.p) {
            if c.nrows() > 0 {
                m += c.transpose() * aj * c * p;
            }
        }
        m
    }

    /// `Φ(A)`, or `None` when `M(A)` is singular.
    fn phi(&self, a: &[DMatrix<f64>]) -> Option<f64> {
        let mut s = 0.0;
        for (aj, &p) in a.iter().zip(&self.p) {
            s += p * log_det_spd(aj)?;
        }
        let lm = log_det_spd(&self.m(a))?;
        Some(0.5 * (s - lm))
    }
}

/// Gaussian BL constant, maximised from `restarts` seeded starting points.
pub fn bl_gaussian(d: &BLDatum, opts: GaussianOptions) -> GaussianBl {
    if !check_scaling(d).0 {
        return GaussianBl::NotApplicable;
    }
    let n = d.dim();
    let c: Vec<DMatrix<f64>> = d
        .subspaces()
        .iter()
        .map(|s| {
            let comp = s.complement_basis();
            DMatrix::from_fn(comp.len(), n, |i, k| comp[i][k])
        })
        .collect();
    let prob = Problem {
        n,
        p: d.exponents().to_vec(),
        c,
    };
    let cap = opts.divergence_cap.ln();
    let mut best = f64::NEG_INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let mut r = rng::substream(opts.seed, restart as u64);
        let a0: Vec<DMatrix<f64>> = prob
            .c
            .iter()
            .map(|cj| {
                let k = cj.nrows();
                if restart == 0 || k == 0 {
                    DMatrix::identity(k, k)
                } else {
                    let g = DMatrix::from_iterator(k, k, rng::gaussian_vec(&mut r, k * k));
                    &g * g.transpose() + DMatrix::identity(k, k) * 0.1
                }
            })
            .collect();
        match ascend(&prob, a0, &opts, cap) {
            None => return GaussianBl::Divergent,
            Some(v) => best = best.max(v),
        }
    }
    if best > cap {
        GaussianBl::Divergent
    } else {
        GaussianBl::Value(best.exp())
    }
}

/// Returns the final `Φ`, or `None` when `M` is singular at the start.
fn ascend(prob: &Problem, mut a: Vec<DMatrix<f64>>, opts: &GaussianOptions, cap: f64) -> Option<f64> {
    let mut phi = prob.phi(&a)?;
    let mut eta = 0.5;
    for _ in 0..opts.max_iters {
        if phi > cap {
            return Some(phi);
        }
        let minv = prob.m(&a).try_inverse()?;
        // Riemannian gradient H_j = A^{1/2} G_j A^{1/2}, G_j = ½ p_j (A_j^{-1} - C_j M^{-1} C_jᵀ).
        let mut dirs = Vec::with_capacity(a.len());
        let mut gnorm = 0.0f64;
        for ((aj, cj), &p) in a.iter().zip(&prob.c).zip(&prob.p) {
            if cj.nrows() == 0 {
                dirs.push((aj.clone(), aj.clone()));
                continue;
            }
            let half = sym_fn(aj, f64::sqrt);
            let ainv = aj.clone().try_inverse()?;
            let g = (ainv - cj * &minv * cj.transpose()) * (0.5 * p);
            let h = &half * g * &half;
            gnorm = gnorm.max(h.norm());
            dirs.push((half, h));
        }
        if gnorm < opts.tol {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<DMatrix<f64>> = a
                .iter()
                .zip(&dirs)
                .zip(&prob.c)
                .map(|((aj, (half, h)), cj)| {
                    if cj.nrows() == 0 {
                        aj.clone()
                    } else {
                        let step = sym_fn(&(h * eta), f64::exp);
                        let t = half * step * half;
                        (&t + t.transpose()) * 0.5
                    }
                })
                .collect();
            if let Some(v) = prob.phi(&trial) {
                if v > phi {
                    a = trial;
                    phi = v;
                    accepted = true;
                    eta *= 1.5;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(phi)
}
