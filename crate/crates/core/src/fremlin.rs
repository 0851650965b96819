//! Fremlin projective tensor norm of nonnegative tensors over finite weighted
//! index sets:
//!
//! `‖F‖ = inf { Π_j ‖F_j‖_{q_j} : F ≤ F_1 ⊗ .. ⊗ F_m pointwise }`.
//!
//! In logarithmic variables `x_j = log F_j` the problem is convex: minimise
//! `Σ_j (1/q_j) log Σ_t w_jt e^{q_j x_jt}` subject to the linear constraints
//! `Σ_j x_{j,t_j} >= log F(t)`. [`fremlin_norm`] solves this with a log-barrier
//! Newton method, then polishes with cyclic pointwise-max updates from the
//! barrier solution and from jittered marginal roots. The reported value is
//! the smallest `Π ‖F_j‖` among exactly feasible factorisations found.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

const EXPONENT_TOL: f64 = 1e-12;
/// Total index-set size accepted by [`fremlin_bruteforce`].
pub const BRUTEFORCE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedIndexSet {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightedIndexSet {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(invalid("labels and weights differ in length"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(invalid(format!("index weights must be positive, got {w}")));
        }
        Ok(Self { labels, weights })
    }

    /// `len` points of weight 1 labelled `0..len`.
    pub fn uniform(len: usize) -> Self {
        Self {
            labels: (0..len).map(|i| i.to_string()).collect(),
            weights: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Dense nonnegative array over a product of weighted index sets, stored
/// row-major (last index fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonnegTensor {
    pub sets: Vec<WeightedIndexSet>,
    pub entries: Vec<f64>,
}

impl NonnegTensor {
    pub fn new(sets: Vec<WeightedIndexSet>, entries: Vec<f64>) -> Result<Self> {
        if sets.is_empty() {
            return Err(invalid("tensor needs at least one index set"));
        }
        let size: usize = sets.iter().map(|s| s.len()).product();
        if size != entries.len() {
            return Err(invalid(format!("shape has {size} entries, got {}", entries.len())));
        }
        if let Some(e) = entries.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
            return Err(invalid(format!("tensor entries must be >= 0, got {e}")));
        }
        Ok(Self { sets, entries })
    }

    /// Unit-weight tensor of the given shape.
    pub fn from_shape(shape: &[usize], entries: Vec<f64>) -> Result<Self> {
        Self::new(shape.iter().map(|&n| WeightedIndexSet::uniform(n)).collect(), entries)
    }

    /// `a_1 ⊗ .. ⊗ a_m` with unit weights.
    pub fn outer(factors: &[Vec<f64>]) -> Result<Self> {
        let shape: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let mut entries = Vec::with_capacity(shape.iter().product());
        let mut idx = vec![0usize; shape.len()];
        if shape.iter().all(|&s| s > 0) {
            loop {
                entries.push(idx.iter().enumerate().map(|(j, &t)| factors[j][t]).product());
                if !next_index(&mut idx, &shape) {
                    break;
                }
            }
        }
        Self::from_shape(&shape, entries)
    }

    pub fn order(&self) -> usize {
        self.sets.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.sets.iter().map(|s| s.len()).collect()
    }

    pub fn total_size(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            sets: self.sets.clone(),
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(invalid("tensor shapes differ"));
        }
        Ok(Self {
            sets: self.sets.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    fn nonzero(&self) -> Vec<(Vec<usize>, f64)> {
        let shape = self.shape();
        let mut out = Vec::new();
        let mut idx = vec![0usize; shape.len()];
        if shape.iter().any(|&s| s == 0) {
            return out;
        }
        for &e in &self.entries {
            if e > 0.0 {
                out.push((idx.clone(), e));
            }
            next_index(&mut idx, &shape);
        }
        out
    }
}

fn next_index(idx: &mut [usize], shape: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

#[derive(Debug, Clone, Copy)]
pub struct FremlinOptions {
    /// Maximum sweeps of cyclic pointwise-max updates per start.
    pub iters: usize,
    /// Jittered marginal-root starts in addition to the barrier start.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FremlinOptions {
    fn default() -> Self {
        Self {
            iters: 500,
            restarts: 16,
            seed: 0,
        }
    }
}

/// Feasible factorisation and its value `Π ‖F_j‖_{q_j}`.
#[derive(Debug, Clone)]
pub struct FremlinResult {
    pub value: f64,
    pub factors: Vec<Vec<f64>>,
}

fn validate_exponents(f: &NonnegTensor, q: &[f64]) -> Result<()> {
    if q.len() != f.order() {
        return Err(Error::DimensionMismatch {
            expected: f.order(),
            got: q.len(),
        });
    }
    if let Some(x) = q.iter().find(|x| !(**x >= 1.0) || !x.is_finite()) {
        return Err(invalid(format!("exponents must be finite and >= 1, got {x}")));
    }
    let s: f64 = q.iter().map(|x| 1.0 / x).sum();
    if (s - 1.0).abs() > EXPONENT_TOL {
        return Err(invalid(format!("Σ 1/q_j must be 1, got {s}")));
    }
    Ok(())
}

/// `Π_j ‖F_j‖_{L^{q_j}(X_j)}`.
pub fn factor_value(f: &NonnegTensor, q: &[f64], factors: &[Vec<f64>]) -> f64 {
    factors
        .iter()
        .zip(&f.sets)
        .zip(q)
        .map(|((fj, s), &qj)| {
            fj.iter()
                .zip(&s.weights)
                .map(|(x, w)| w * x.powf(qj))
                .sum::<f64>()
                .powf(1.0 / qj)
        })
        .product()
}

/// Whether `F <= ⊗ F_j` holds up to relative slack `tol`.
pub fn is_feasible(f: &NonnegTensor, factors: &[Vec<f64>], tol: f64) -> bool {
    f.nonzero().iter().all(|(idx, v)| {
        let p: f64 = idx.iter().enumerate().map(|(j, &t)| factors[j][t]).product();
        p >= v * (1.0 - tol)
    })
}

struct Problem<'a> {
    f: &'a NonnegTensor,
    q: &'a [f64],
    nz: Vec<(Vec<usize>, f64)>,
    /// Per factor, per index: whether the slice has a nonzero entry.
    active: Vec<Vec<bool>>,
}

impl<'a> Problem<'a> {
    fn new(f: &'a NonnegTensor, q: &'a [f64]) -> Self {
        let nz = f.nonzero();
        let mut active: Vec<Vec<bool>> = f.sets.iter().map(|s| vec![false; s.len()]).collect();
        for (idx, _) in &nz {
            for (j, &t) in idx.iter().enumerate() {
                active[j][t] = true;
            }
        }
        Self { f, q, nz, active }
    }

    fn value(&self, factors: &[Vec<f64>]) -> f64 {
        factor_value(self.f, self.q, factors)
    }

    /// Smallest `F_j` making the factorisation feasible with the others
    /// fixed: `F_j(t) = max_{s : s_j = t} F(s) / Π_{i≠j} F_i(s_i)`.
    fn project(&self, factors: &mut [Vec<f64>], j: usize) {
        let mut new = vec![0.0; factors[j].len()];
        for (idx, v) in &self.nz {
            let mut denom = 1.0;
            for (i, &t) in idx.iter().enumerate() {
                if i != j {
                    denom *= factors[i][t];
                }
            }
            let need = if denom > 0.0 { v / denom } else { f64::INFINITY };
            if need > new[idx[j]] {
                new[idx[j]] = need;
            }
        }
        factors[j] = new;
    }

    /// Rescale factors so that all norms agree; the product is unchanged.
    fn balance(&self, factors: &mut [Vec<f64>]) {
        let norms: Vec<f64> = factors
            .iter()
            .zip(&self.f.sets)
            .zip(self.q)
            .map(|((fj, s), &qj)| {
                fj.iter()
                    .zip(&s.weights)
                    .map(|(x, w)| w * x.powf(qj))
                    .sum::<f64>()
                    .powf(1.0 / qj)
            })
            .collect();
        if norms.iter().any(|n| !(*n > 0.0) || !n.is_finite()) {
            return;
        }
        let g = (norms.iter().map(|n| n.ln()).sum::<f64>() / norms.len() as f64).exp();
        for (fj, n) in factors.iter_mut().zip(&norms) {
            let c = g / n;
            fj.iter_mut().for_each(|x| *x *= c);
        }
    }

    /// Cyclic pointwise-max updates; returns the final value.
    fn alternate(&self, factors: &mut Vec<Vec<f64>>, sweeps: usize) -> f64 {
        let m = factors.len();
        self.project(factors, m - 1);
        let mut val = self.value(factors);
        for _ in 0..sweeps {
            for j in 0..m {
                self.project(factors, j);
            }
            self.balance(factors);
            let nv = self.value(factors);
            let done = (val - nv).abs() <= 1e-8 * val.max(f64::MIN_POSITIVE);
            val = nv;
            if done {
                break;
            }
        }
        val
    }

    /// `F_j(t) = (max of the t-slice)^{1/q_j}`; feasible since `Σ 1/q_j = 1`.
    fn marginal_roots(&self) -> Vec<Vec<f64>> {
        let mut mx: Vec<Vec<f64>> = self.f.sets.iter().map(|s| vec![0.0; s.len()]).collect();
        for (idx, v) in &self.nz {
            for (j, &t) in idx.iter().enumerate() {
                mx[j][t] = mx[j][t].max(*v);
            }
        }
        mx.iter()
            .zip(self.q)
            .map(|(v, &qj)| v.iter().map(|x| x.powf(1.0 / qj)).collect())
            .collect()
    }

    /// Log-barrier Newton solve of the convex log-domain problem.
    fn barrier(&self) -> Option<Vec<Vec<f64>>> {
        let m = self.f.order();
        let mut var = Vec::new();
        let mut offset = Vec::with_capacity(m);
        let mut nvar = 0usize;
        for a in &self.active {
            offset.push(nvar);
            let ids: Vec<Option<usize>> = a
                .iter()
                .map(|&on| {
                    if on {
                        nvar += 1;
                        Some(nvar - 1)
                    } else {
                        None
                    }
                })
                .collect();
            var.push(ids);
        }
        if nvar == 0 {
            return None;
        }
        let rows: Vec<Vec<usize>> = self
            .nz
            .iter()
            .map(|(idx, _)| idx.iter().enumerate().map(|(j, &t)| var[j][t].unwrap()).collect())
            .collect();
        let rhs: Vec<f64> = self.nz.iter().map(|(_, v)| v.ln()).collect();
        let groups: Vec<(Vec<usize>, Vec<f64>, f64)> = (0..m)
            .map(|j| {
                let ids: Vec<usize> = var[j].iter().flatten().copied().collect();
                let w: Vec<f64> = var[j]
                    .iter()
                    .zip(&self.f.sets[j].weights)
                    .filter(|(v, _)| v.is_some())
                    .map(|(_, w)| *w)
                    .collect();
                (ids, w, self.q[j])
            })
            .collect();

        let top = rhs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut x = DVector::from_element(nvar, (top + 1.0) / m as f64);

        let objective = |x: &DVector<f64>| -> f64 {
            groups
                .iter()
                .map(|(ids, w, q)| {
                    let mx = ids.iter().map(|&i| q * x[i]).fold(f64::NEG_INFINITY, f64::max);
                    let s: f64 = ids.iter().zip(w).map(|(&i, w)| w * (q * x[i] - mx).exp()).sum();
                    (mx + s.ln()) / q
                })
                .sum()
        };
        let slacks = |x: &DVector<f64>| -> Vec<f64> {
            rows.iter()
                .zip(&rhs)
                .map(|(r, b)| r.iter().map(|&i| x[i]).sum::<f64>() - b)
                .collect()
        };
        let merit = |x: &DVector<f64>, tau: f64| -> Option<f64> {
            let s = slacks(x);
            if s.iter().any(|v| !(*v > 0.0)) {
                return None;
            }
            Some(tau * objective(x) - s.iter().map(|v| v.ln()).sum::<f64>())
        };

        let nc = rows.len() as f64;
        let mut tau = 1.0;
        for _outer in 0..40 {
            for _newton in 0..80 {
                let s = slacks(&x);
                let mut g = DVector::zeros(nvar);
                let mut h = DMatrix::zeros(nvar, nvar);
                for (ids, w, q) in &groups {
                    let mx = ids.iter().map(|&i| q * x[i]).fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = ids.iter().zip(w).map(|(&i, w)| w * (q * x[i] - mx).exp()).collect();
                    let tot: f64 = e.iter().sum();
                    let pi: Vec<f64> = e.iter().map(|v| v / tot).collect();
                    for (a, &ia) in ids.iter().enumerate() {
                        g[ia] += tau * pi[a];
                        h[(ia, ia)] += tau * q * pi[a];
                        for (b, &ib) in ids.iter().enumerate() {
                            h[(ia, ib)] -= tau * q * pi[a] * pi[b];
                        }
                    }
                }
                for (r, &sv) in rows.iter().zip(&s) {
                    let inv = 1.0 / sv;
                    let inv2 = inv * inv;
                    for &a in r {
                        g[a] -= inv;
                        for &b in r {
                            h[(a, b)] += inv2;
                        }
                    }
                }
                let scale = (0..nvar).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
                let mut reg = 1e-12 * scale;
                let chol = loop {
                    let mut hr = h.clone();
                    for i in 0..nvar {
                        hr[(i, i)] += reg;
                    }
                    if let Some(c) = hr.cholesky() {
                        break Some(c);
                    }
                    reg *= 100.0;
                    if reg > scale {
                        break None;
                    }
                };
                let chol = chol?;
                let d = -chol.solve(&g);
                let dec = -g.dot(&d);
                if dec / 2.0 < 1e-10 {
                    break;
                }
                let f0 = merit(&x, tau)?;
                let mut step = 1.0;
                let mut moved = false;
                for _ in 0..60 {
                    let xn = &x + &d * step;
                    if let Some(fv) = merit(&xn, tau) {
                        if fv <= f0 - 0.25 * step * dec {
                            x = xn;
                            moved = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            if nc / tau < 1e-11 {
                break;
            }
            tau *= 10.0;
        }

        Some(
            (0..m)
                .map(|j| {
                    var[j]
                        .iter()
                        .map(|v| v.map_or(0.0, |i| x[i].exp()))
                        .collect()
                })
                .collect(),
        )
    }
}

/// Upper bound for the Fremlin norm together with feasible factors.
pub fn fremlin_norm(f: &NonnegTensor, q: &[f64], opts: FremlinOptions) -> Result<FremlinResult> {
    validate_exponents(f, q)?;
    let prob = Problem::new(f, q);
    if prob.nz.is_empty() {
        return Ok(FremlinResult {
            value: 0.0,
            factors: f.sets.iter().map(|s| vec![0.0; s.len()]).collect(),
        });
    }
    let mut starts: Vec<Vec<Vec<f64>>> = Vec::new();
    if let Some(b) = prob.barrier() {
        starts.push(b);
    }
    let roots = prob.marginal_roots();
    starts.push(roots.clone());
    for k in 1..opts.restarts {
        let mut r = rng::substream(opts.seed, k as u64);
        let mut s = roots.clone();
        for fj in s.iter_mut() {
            let noise = rng::gaussian_vec(&mut r, fj.len());
            for (x, z) in fj.iter_mut().zip(noise) {
                *x *= (0.3 * z).exp();
            }
        }
        starts.push(s);
    }
    let results: Vec<(f64, Vec<Vec<f64>>)> = starts
        .into_par_iter()
        .map(|mut s| {
            let v = prob.alternate(&mut s, opts.iters.max(1));
            (v, s)
        })
        .collect();
    let (value, factors) = results
        .into_iter()
        .filter(|(v, _)| v.is_finite())
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .ok_or_else(|| Error::NoConvergence {
            iters: opts.iters,
            detail: "no finite factorisation found".into(),
        })?;
    Ok(FremlinResult { value, factors })
}

/// Grid-search oracle for tensors with at most [`BRUTEFORCE_CAP`] index
/// points in total. The free factors range over a logarithmic grid of
/// `grid` points (ratio √2, centred on 1) followed by local pattern search;
/// the last factor is always the pointwise-max projection, so every
/// candidate is feasible.
pub fn fremlin_bruteforce(f: &NonnegTensor, q: &[f64], grid: usize) -> Result<f64> {
    validate_exponents(f, q)?;
    if f.total_size() > BRUTEFORCE_CAP {
        return Err(Error::SizeCap(format!(
            "brute force needs total index size <= {BRUTEFORCE_CAP}, got {}",
            f.total_size()
        )));
    }
    let prob = Problem::new(f, q);
    if prob.nz.is_empty() {
        return Ok(0.0);
    }
    let m = f.order();
    if m == 1 {
        let mut fac = vec![vec![0.0; f.sets[0].len()]];
        prob.project(&mut fac, 0);
        return Ok(prob.value(&fac));
    }
    // Free log-coordinates: every active entry of factors 0..m-1, except the
    // first active entry of factor 0 which is pinned (homogeneity).
    let mut free: Vec<(usize, usize)> = Vec::new();
    let mut pinned = None;
    for j in 0..m - 1 {
        for t in 0..f.sets[j].len() {
            if prob.active[j][t] {
                if pinned.is_none() {
                    pinned = Some((j, t));
                } else {
                    free.push((j, t));
                }
            }
        }
    }
    let base = |logs: &[f64]| -> Vec<Vec<f64>> {
        let mut fac: Vec<Vec<f64>> = f.sets.iter().map(|s| vec![0.0; s.len()]).collect();
        if let Some((j, t)) = pinned {
            fac[j][t] = 1.0;
        }
        for (&(j, t), &l) in free.iter().zip(logs) {
            fac[j][t] = l.exp2();
        }
        fac
    };
    let eval = |logs: &[f64]| -> f64 {
        let mut fac = base(logs);
        prob.project(&mut fac, m - 1);
        prob.value(&fac)
    };

    let grid = grid.max(1);
    let half = (grid as f64 - 1.0) / 2.0;
    let levels: Vec<f64> = (0..grid).map(|i| 0.5 * (i as f64 - half)).collect();
    let nfree = free.len();
    let mut best_logs = vec![0.0; nfree];
    let mut best = eval(&best_logs);
    let mut idx = vec![0usize; nfree];
    let mut logs = vec![0.0; nfree];
    if nfree > 0 {
        loop {
            for (l, &i) in logs.iter_mut().zip(&idx) {
                *l = levels[i];
            }
            let v = eval(&logs);
            if v < best {
                best = v;
                best_logs.copy_from_slice(&logs);
            }
            let shape = vec![grid; nfree];
            if !next_index(&mut idx, &shape) {
                break;
            }
        }
        // Local refinement around the best grid point.
        let mut step = 0.25;
        while step > 1e-6 {
            let mut improved = true;
            while improved {
                improved = false;
                for k in 0..nfree {
                    for dir in [-1.0, 1.0] {
                        let mut t = best_logs.clone();
                        t[k] += dir * step;
                        let v = eval(&t);
                        if v < best * (1.0 - 1e-15) {
                            best = v;
                            best_logs = t;
                            improved = true;
                        }
                    }
                }
            }
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Weighted `L^m` norm of `F` over the product measure; requires all
/// `q_j = m`.
pub fn lm_lower_bound(f: &NonnegTensor, q: &[f64]) -> Result<f64> {
    let m = f.order() as f64;
    if q.len() != f.order() || q.iter().any(|&x| (x - m).abs() > EXPONENT_TOL) {
        return Err(invalid(format!("the L^m comparison needs every q_j = {m}")));
    }
    let shape = f.shape();
    let mut idx = vec![0usize; shape.len()];
    let mut s = 0.0;
    if shape.iter().any(|&x| x == 0) {
        return Ok(0.0);
    }
    for &e in &f.entries {
        if e > 0.0 {
            let w: f64 = idx.iter().enumerate().map(|(j, &t)| f.sets[j].weights[t]).product();
            s += w * e.powf(m);
        }
        next_index(&mut idx, &shape);
    }
    Ok(s.powf(1.0 / m))
}

/// Best available value: the oracle on small shapes, otherwise the
/// alternating-minimisation bound.
fn best_value(f: &NonnegTensor, q: &[f64]) -> Result<f64> {
    let v = fremlin_norm(f, q, FremlinOptions::default())?.value;
    if f.total_size() <= BRUTEFORCE_CAP {
        Ok(v.min(fremlin_bruteforce(f, q, 13)?))
    } else {
        Ok(v)
    }
}

/// `‖F + G‖ <= ‖F‖ + ‖G‖` up to 2% slack. Invalid input yields `false`.
pub fn subadditivity_check(f: &NonnegTensor, g: &NonnegTensor, q: &[f64]) -> bool {
    let Ok(sum) = f.add(g) else { return false };
    match (best_value(&sum, q), best_value(f, q), best_value(g, q)) {
        (Ok(s), Ok(a), Ok(b)) => s <= (a + b) * 1.02 + 1e-12,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> FremlinOptions {
        FremlinOptions::default()
    }

    #[test]
    fn identity_two_by_two() {
        let f = NonnegTensor::from_shape(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = fremlin_norm(&f, &[2.0, 2.0], opts()).unwrap();
        assert!((v.value - 2.0).abs() < 1e-6, "{}", v.value);
        assert!(is_feasible(&f, &v.factors, 1e-12));
        let b = fremlin_bruteforce(&f, &[2.0, 2.0], 13).unwrap();
        assert!((b - 2.0).abs() < 0.04, "{b}");
    }

    #[test]
    fn diagonal_one_four() {
        let f = NonnegTensor::from_shape(&[2, 2], vec![1.0, 0.0, 0.0, 4.0]).unwrap();
        let v = fremlin_norm(&f, &[2.0, 2.0], opts()).unwrap().value;
        assert!((v - 5.0).abs() < 0.1, "{v}");
        let b = fremlin_bruteforce(&f, &[2.0, 2.0], 13).unwrap();
        assert!((b - 5.0).abs() < 0.1, "{b}");
    }

    #[test]
    fn rank_one_and_all_ones() {
        let a = vec![1.0, 2.0, 0.5];
        let b = vec![3.0, 0.25];
        let f = NonnegTensor::outer(&[a.clone(), b.clone()]).unwrap();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v = fremlin_norm(&f, &[2.0, 2.0], opts()).unwrap().value;
        assert!((v / (na * nb) - 1.0).abs() < 1e-6);
        let lm = lm_lower_bound(&f, &[2.0, 2.0]).unwrap();
        assert!((lm / (na * nb) - 1.0).abs() < 1e-12);

        let ones = NonnegTensor::from_shape(&[3, 4], vec![1.0; 12]).unwrap();
        let v = fremlin_norm(&ones, &[2.0, 2.0], opts()).unwrap().value;
        assert!((v - 12f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn lm_examples() {
        let f = NonnegTensor::from_shape(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((lm_lower_bound(&f, &[2.0, 2.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let z = NonnegTensor::from_shape(&[2, 2], vec![0.0; 4]).unwrap();
        assert_eq!(lm_lower_bound(&z, &[2.0, 2.0]).unwrap(), 0.0);
        assert!(lm_lower_bound(&f, &[3.0, 1.5]).is_err());
    }

    #[test]
    fn weighted_three_way() {
        let sets = vec![
            WeightedIndexSet::new(vec!["a".into(), "b".into()], vec![0.5, 2.0]).unwrap(),
            WeightedIndexSet::uniform(2),
            WeightedIndexSet::new(vec!["x".into()], vec![3.0]).unwrap(),
        ];
        let f = NonnegTensor::new(sets, vec![1.0, 2.0, 0.0, 1.5]).unwrap();
        let q = [3.0, 3.0, 3.0];
        let v = fremlin_norm(&f, &q, opts()).unwrap();
        assert!(is_feasible(&f, &v.factors, 1e-12));
        let b = fremlin_bruteforce(&f, &q, 13).unwrap();
        assert!(v.value <= b * 1.02 && v.value >= b * 0.98, "{} vs {b}", v.value);
        assert!(v.value >= lm_lower_bound(&f, &q).unwrap() - 1e-9);
    }

    #[test]
    fn errors() {
        let f = NonnegTensor::from_shape(&[2, 2], vec![1.0; 4]).unwrap();
        assert!(fremlin_norm(&f, &[2.0, 3.0], opts()).is_err());
        assert!(NonnegTensor::from_shape(&[2, 2], vec![1.0, -1.0, 0.0, 0.0]).is_err());
        let big = NonnegTensor::from_shape(&[5, 4], vec![1.0; 20]).unwrap();
        assert!(matches!(fremlin_bruteforce(&big, &[2.0, 2.0], 13), Err(Error::SizeCap(_))));
        let z = NonnegTensor::from_shape(&[2, 2], vec![0.0; 4]).unwrap();
        assert_eq!(fremlin_norm(&z, &[2.0, 2.0], opts()).unwrap().value, 0.0);
    }

    #[test]
    fn subadditivity_examples() {
        let a = NonnegTensor::outer(&[vec![1.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let b = a.scaled(3.0);
        assert!(subadditivity_check(&a, &b, &[2.0, 2.0]));
        let z = a.scaled(0.0);
        assert!(subadditivity_check(&z, &a, &[2.0, 2.0]));
    }
}
