//! Truncated BL ratio evaluation and lower-bound estimation of the truncated
//! constant.
//!
//! All work happens in units of the inner scale: a window `(r, R)` is
//! evaluated as `(1, R/r)` and the ratio is multiplied by
//! `r^{n - Σ p_j n_j}`. Inputs are rescaled bijectively (cell `z` at scale `r`
//! is cell `z` at scale 1), so the scaling identity holds by construction.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::linalg;

use super::lattice::{default_lattice, kappa};
use super::{BLDatum, QuotientFn, TruncationWindow};

/// Sub-samples per axis inside each ambient cell.
const SUBSAMPLES: usize = 4;

/// Aggregated incidence between ambient sample points in `B(0, R/r)` and
/// quotient cells. Each entry is a tuple of quotient-cell ids (one per
/// subspace) with the total volume of sample points mapping to it.
#[derive(Debug, Clone)]
pub struct SampleTable {
    n: usize,
    radius: f64,
    cells: Vec<Vec<Vec<i64>>>,
    tuples: Vec<Vec<u32>>,
    weights: Vec<f64>,
    centroids: Vec<Vec<f64>>,
    incidence: Vec<Vec<Vec<u32>>>,
}

impl SampleTable {
    /// Table for `d` over the ball of radius `radius` (in inner-scale units).
    pub fn build(d: &BLDatum, radius: f64) -> Self {
        let n = d.dim();
        let m = d.len();
        let complements: Vec<&[Vec<f64>]> =
            d.subspaces().iter().map(|s| s.complement_basis()).collect();
        let lo = -(radius.ceil() as i64) - 1;
        let hi = radius.ceil() as i64;
        let sub_w = (SUBSAMPLES as f64).powi(n as i32).recip();
        let offsets: Vec<f64> = (0..SUBSAMPLES)
            .map(|i| (i as f64 + 0.5) / SUBSAMPLES as f64)
            .collect();

        let mut cell_ids: Vec<HashMap<Vec<i64>, u32>> = vec![HashMap::new(); m];
        let mut cells: Vec<Vec<Vec<i64>>> = vec![Vec::new(); m];
        let mut tuple_ids: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut tuples: Vec<Vec<u32>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut sums: Vec<Vec<f64>> = Vec::new();

        let mut corner = vec![lo; n];
        let mut x = vec![0.0; n];
        let mut sub = vec![0usize; n];
        let r2 = radius * radius;
        loop {
            // distance from the origin to the cell [corner, corner + 1]
            let dist2: f64 = corner
                .iter()
                .map(|&c| {
                    let (a, b) = (c as f64, c as f64 + 1.0);
                    if a > 0.0 {
                        a * a
                    } else if b < 0.0 {
                        b * b
                    } else {
                        0.0
                    }
                })
                .sum();
            if dist2 <= r2 {
                sub.iter_mut().for_each(|s| *s = 0);
                loop {
                    for i in 0..n {
                        x[i] = corner[i] as f64 + offsets[sub[i]];
                    }
                    if linalg::dot(&x, &x) <= r2 {
                        let mut key = Vec::with_capacity(m);
                        for (j, comp) in complements.iter().enumerate() {
                            let cell: Vec<i64> = comp
                                .iter()
                                .map(|c| linalg::dot(c, &x).floor() as i64)
                                .collect();
                            let next = cells[j].len() as u32;
                            let id = *cell_ids[j].entry(cell.clone()).or_insert_with(|| {
                                cells[j].push(cell);
                                next
                            });
                            key.push(id);
                        }
                        let t = match tuple_ids.get(&key) {
                            Some(&t) => t,
                            None => {
                                tuple_ids.insert(key.clone(), tuples.len());
                                tuples.push(key);
                                weights.push(0.0);
                                sums.push(vec![0.0; n]);
                                tuples.len() - 1
                            }
                        };
                        weights[t] += sub_w;
                        for i in 0..n {
                            sums[t][i] += sub_w * x[i];
                        }
                    }
                    if !advance(&mut sub, SUBSAMPLES) {
                        break;
                    }
                }
            }
            if !advance_range(&mut corner, lo, hi) {
                break;
            }
        }

        // Canonical ordering: cells sorted lexicographically per subspace.
        let mut remap: Vec<Vec<u32>> = Vec::with_capacity(m);
        for cj in cells.iter_mut() {
            let mut order: Vec<usize> = (0..cj.len()).collect();
            order.sort_by(|&a, &b| cj[a].cmp(&cj[b]));
            let mut map = vec![0u32; cj.len()];
            for (new, &old) in order.iter().enumerate() {
                map[old] = new as u32;
            }
            let sorted: Vec<Vec<i64>> = order.iter().map(|&o| cj[o].clone()).collect();
            *cj = sorted;
            remap.push(map);
        }
        let mut entries: Vec<(Vec<u32>, f64, Vec<f64>)> = tuples
            .into_iter()
            .zip(weights)
            .zip(sums)
            .map(|((t, w), s)| {
                let t: Vec<u32> = t.iter().enumerate().map(|(j, &id)| remap[j][id as usize]).collect();
                let c = s.iter().map(|v| v / w).collect();
                (t, w, c)
            })
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));

        let mut incidence: Vec<Vec<Vec<u32>>> = cells.iter().map(|c| vec![Vec::new(); c.len()]).collect();
        for (ti, (t, _, _)) in entries.iter().enumerate() {
            for (j, &id) in t.iter().enumerate() {
                incidence[j][id as usize].push(ti as u32);
            }
        }
        let (tuples, rest): (Vec<_>, Vec<_>) = entries.into_iter().map(|(t, w, c)| (t, (w, c))).unzip();
        let (weights, centroids) = rest.into_iter().unzip();
        Self {
            n,
            radius,
            cells,
            tuples,
            weights,
            centroids,
            incidence,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn num_tuples(&self) -> usize {
        self.tuples.len()
    }

    pub fn cells(&self, j: usize) -> &[Vec<i64>] {
        &self.cells[j]
    }

    /// Total sampled volume, an estimate of `vol B(0, radius)`.
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn dense(&self, f: &QuotientFn) -> Vec<f64> {
        self.cells[f.j].iter().map(|c| f.get(c)).collect()
    }

    /// `Σ_t w_t Π_j f_j(t_j)^{p_j}` for dense inputs.
    fn lhs(&self, vals: &[Vec<f64>], p: &[f64]) -> f64 {
        let pw: Vec<Vec<f64>> = vals
            .iter()
            .zip(p)
            .map(|(v, &pj)| v.iter().map(|x| if *x > 0.0 { x.powf(pj) } else { 0.0 }).collect())
            .collect();
        self.lhs_pow(&pw)
    }

    fn lhs_pow(&self, pw: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for (t, w) in self.tuples.iter().zip(&self.weights) {
            let mut prod = *w;
            for (j, &id) in t.iter().enumerate() {
                prod *= pw[j][id as usize];
                if prod == 0.0 {
                    break;
                }
            }
            s += prod;
        }
        s
    }
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for v in idx.iter_mut() {
        *v += 1;
        if *v < base {
            return true;
        }
        *v = 0;
    }
    false
}

fn advance_range(idx: &mut [i64], lo: i64, hi: i64) -> bool {
    for v in idx.iter_mut() {
        *v += 1;
        if *v <= hi {
            return true;
        }
        *v = lo;
    }
    false
}

fn normalized_ratio(d: &BLDatum, table: &SampleTable, vals: &[Vec<f64>]) -> Result<f64> {
    let p = d.exponents();
    let mut rhs = 1.0;
    for (j, v) in vals.iter().enumerate() {
        let integral: f64 = v.iter().sum();
        if !(integral > 0.0) {
            return Err(invalid(format!("input {j} has zero integral")));
        }
        rhs *= integral.powf(p[j]);
    }
    Ok(table.lhs(vals, p) / rhs)
}

/// Left side of the truncated inequality divided by `Π (∫ f_j)^{p_j}` for
/// explicit inputs constant at scale `r`.
pub fn bl_ratio(d: &BLDatum, w: &TruncationWindow, inputs: &[QuotientFn]) -> Result<f64> {
    let table = SampleTable::build(d, w.normalized_outer());
    ratio_with_table(d, w, &table, inputs)
}

/// [`bl_ratio`] reusing a prebuilt table for `(d, R/r)`.
pub fn ratio_with_table(
    d: &BLDatum,
    w: &TruncationWindow,
    table: &SampleTable,
    inputs: &[QuotientFn],
) -> Result<f64> {
    if inputs.is_empty() {
        return Err(invalid("no inputs"));
    }
    if inputs.len() != d.len() {
        return Err(invalid(format!("{} inputs for {} subspaces", inputs.len(), d.len())));
    }
    let codims = d.codims();
    let mut by_j: Vec<Option<&QuotientFn>> = vec![None; d.len()];
    for f in inputs {
        if f.j >= d.len() || by_j[f.j].is_some() {
            return Err(invalid(format!("bad or repeated input index {}", f.j)));
        }
        if (f.r - w.inner()).abs() > 1e-12 * w.inner() {
            return Err(invalid(format!("input scale {} differs from window scale {}", f.r, w.inner())));
        }
        for cell in f.values.keys() {
            if cell.len() != codims[f.j] {
                return Err(Error::DimensionMismatch {
                    expected: codims[f.j],
                    got: cell.len(),
                });
            }
        }
        by_j[f.j] = Some(f);
    }
    let p = d.exponents();
    // Dense values on table cells carry the LHS; the full integral (including
    // cells the ball never reaches) carries the RHS.
    let vals: Vec<Vec<f64>> = by_j.iter().map(|f| table.dense(f.unwrap())).collect();
    let mut rhs = 1.0;
    for (j, f) in by_j.iter().enumerate() {
        let s: f64 = f.unwrap().values.values().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid(format!("input {j} must have finite positive integral")));
        }
        rhs *= s.powf(p[j]);
    }
    let ratio = table.lhs(&vals, p) / rhs;
    Ok(ratio * w.inner().powf(d.scaling_exponent()))
}

/// Search budget for [`bl_truncated_estimate`].
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Number of geometric radii tried for union-of-cells inputs.
    pub radii: usize,
    /// Number of geometric widths tried for Gaussian inputs.
    pub gaussian_scales: usize,
    /// Full greedy coordinate-ascent sweeps over cell values.
    pub greedy_sweeps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            radii: 12,
            gaussian_scales: 8,
            greedy_sweeps: 2,
        }
    }
}

/// Best ratio found and the inputs attaining it.
#[derive(Debug, Clone)]
pub struct TruncatedEstimate {
    pub value: f64,
    pub inputs: Vec<QuotientFn>,
    /// Which input family produced the value.
    pub family: String,
}

/// Lower bound for the truncated constant: the best ratio over cell
/// indicators, unions of cells over projected boxes aligned with lattice
/// subspaces, discretised Gaussians, and greedy coordinate ascent from the
/// best of these. Every reported value is the ratio of explicit inputs.
pub fn bl_truncated_estimate(d: &BLDatum, w: &TruncationWindow, budget: Budget) -> Result<TruncatedEstimate> {
    let table = SampleTable::build(d, w.normalized_outer());
    estimate_with_table(d, w, &table, budget)
}

pub fn estimate_with_table(
    d: &BLDatum,
    w: &TruncationWindow,
    table: &SampleTable,
    budget: Budget,
) -> Result<TruncatedEstimate> {
    let m = d.len();
    let n = d.dim();
    let radius = table.radius;
    let mut best: Option<(f64, Vec<Vec<f64>>, String)> = None;
    let consider = |vals: Vec<Vec<f64>>, family: String, best: &mut Option<(f64, Vec<Vec<f64>>, String)>| {
        if vals.iter().any(|v| v.iter().sum::<f64>() <= 0.0) {
            return;
        }
        if let Ok(r) = normalized_ratio(d, table, &vals) {
            if best.as_ref().map_or(true, |b| r > b.0 * (1.0 + 1e-12)) {
                *best = Some((r, vals, family));
            }
        }
    };

    // Candidate subspace directions: {0}, R^n, each T_j, and the argmax of
    // the discrete exponent.
    let lat = default_lattice(d)?;
    let mut dirs = vec![super::LinearSubspace::zero(n), super::LinearSubspace::full(n)];
    dirs.push(kappa(d, &lat).subspace);
    for t in d.subspaces() {
        dirs.push(t.clone());
        dirs.push(t.orthogonal());
    }

    // Single cells and unions over projected boxes {|P_V x| <= a, |P_V⊥ x| <= b}.
    let mut scales = vec![0.5_f64.min(radius)];
    let ratio = (radius / scales[0]).max(1.0).powf(1.0 / budget.radii.max(1) as f64);
    for i in 1..=budget.radii {
        scales.push((scales[0] * ratio.powi(i as i32)).min(radius));
    }
    scales.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for v in &dirs {
        let proj = linalg::projector(v.basis(), n);
        for &a in &scales {
            for &b in &scales {
                if v.dim() == 0 && a != scales[0] {
                    continue;
                }
                if v.dim() == n && b != scales[0] {
                    continue;
                }
                let vals = box_union(table, &proj, a, b);
                consider(vals, format!("box(dim {}, {a:.3}, {b:.3})", v.dim()), &mut best);
            }
        }
    }

    // Discretised Gaussians exp(-|P_V x|^2/(2a^2) - |P_V⊥ x|^2/(2b^2)) pushed to
    // each quotient.
    let g_scales: Vec<f64> = (0..budget.gaussian_scales)
        .map(|i| {
            let t = if budget.gaussian_scales > 1 {
                i as f64 / (budget.gaussian_scales - 1) as f64
            } else {
                0.0
            };
            0.5 * (2.0 * radius).powf(t)
        })
        .collect();
    for v in &dirs {
        for &a in &g_scales {
            for &b in &g_scales {
                let vals: Vec<Vec<f64>> = (0..m)
                    .map(|j| gaussian_on_quotient(d, j, table, v, a, b))
                    .collect();
                consider(vals, format!("gaussian(dim {}, {a:.3}, {b:.3})", v.dim()), &mut best);
            }
        }
    }

    let (mut value, mut vals, mut family) = best.ok_or_else(|| Error::Precondition("no admissible inputs".into()))?;
    if budget.greedy_sweeps > 0 {
        let (v2, vals2) = greedy_ascent(d, table, vals.clone(), budget.greedy_sweeps);
        if v2 > value * (1.0 + 1e-12) {
            value = v2;
            vals = vals2;
            family = format!("{family} + greedy");
        }
    }

    let scale = w.inner().powf(d.scaling_exponent());
    let inputs = vals
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut f = QuotientFn::new(j, w.inner());
            for (c, &x) in table.cells[j].iter().zip(v) {
                if x > 0.0 {
                    f.values.insert(c.clone(), x);
                }
            }
            f
        })
        .collect();
    Ok(TruncatedEstimate {
        value: value * scale,
        inputs,
        family,
    })
}

/// Indicators of the quotient cells reached by table tuples whose centroid
/// lies in the box `{|P x| <= a, |(I - P) x| <= b}`.
fn box_union(table: &SampleTable, proj: &nalgebra::DMatrix<f64>, a: f64, b: f64) -> Vec<Vec<f64>> {
    let n = table.n;
    let mut vals: Vec<Vec<f64>> = table.cells.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut hit = false;
    for (t, c) in table.tuples.iter().zip(&table.centroids) {
        let x = nalgebra::DVector::from_column_slice(c);
        let px = proj * &x;
        let along = px.norm();
        let across = (x - px).norm();
        if along <= a && across <= b {
            hit = true;
            for (j, &id) in t.iter().enumerate() {
                vals[j][id as usize] = 1.0;
            }
        }
    }
    if !hit {
        // Fall back to the tuple nearest the origin.
        if let Some((t, _)) = table
            .tuples
            .iter()
            .zip(&table.centroids)
            .min_by(|x, y| linalg::norm(x.1).partial_cmp(&linalg::norm(y.1)).unwrap())
        {
            for (j, &id) in t.iter().enumerate() {
                vals[j][id as usize] = 1.0;
            }
        }
    }
    let _ = n;
    vals
}

fn gaussian_on_quotient(
    d: &BLDatum,
    j: usize,
    table: &SampleTable,
    v: &super::LinearSubspace,
    a: f64,
    b: f64,
) -> Vec<f64> {
    use nalgebra::DMatrix;
    let n = d.dim();
    let comp = d.subspaces()[j].complement_basis();
    let nj = comp.len();
    if nj == 0 {
        return vec![1.0; table.cells[j].len()];
    }
    let pv = linalg::projector(v.basis(), n);
    let cov = &pv * (a * a) + (DMatrix::identity(n, n) - &pv) * (b * b);
    let c = DMatrix::from_fn(nj, n, |i, k| comp[i][k]);
    let qcov = &c * cov * c.transpose();
    let inv = match qcov.try_inverse() {
        Some(i) => i,
        None => return vec![0.0; table.cells[j].len()],
    };
    table.cells[j]
        .iter()
        .map(|cell| {
            let y = nalgebra::DVector::from_iterator(nj, cell.iter().map(|&z| z as f64 + 0.5));
            (-0.5 * (y.transpose() * &inv * &y)[(0, 0)]).exp()
        })
        .collect()
}

/// Multiplicative coordinate ascent on individual cell values.
fn greedy_ascent(d: &BLDatum, table: &SampleTable, mut vals: Vec<Vec<f64>>, sweeps: usize) -> (f64, Vec<Vec<f64>>) {
    let p = d.exponents();
    let m = d.len();
    let mut pw: Vec<Vec<f64>> = vals
        .iter()
        .zip(p)
        .map(|(v, &pj)| v.iter().map(|x| if *x > 0.0 { x.powf(pj) } else { 0.0 }).collect())
        .collect();
    let mut lhs = table.lhs_pow(&pw);
    let mut integrals: Vec<f64> = vals.iter().map(|v| v.iter().sum()).collect();
    let objective = |lhs: f64, ints: &[f64]| -> f64 {
        if lhs <= 0.0 {
            return f64::NEG_INFINITY;
        }
        lhs.ln() - ints.iter().zip(p).map(|(i, pj)| pj * i.ln()).sum::<f64>()
    };
    let mut current = objective(lhs, &integrals);
    for _ in 0..sweeps {
        let mut improved = false;
        for j in 0..m {
            let vmax = vals[j].iter().cloned().fold(0.0, f64::max);
            for c in 0..vals[j].len() {
                let mut a_c = 0.0;
                for &ti in &table.incidence[j][c] {
                    let t = &table.tuples[ti as usize];
                    let mut prod = table.weights[ti as usize];
                    for (i, &id) in t.iter().enumerate() {
                        if i != j {
                            prod *= pw[i][id as usize];
                        }
                    }
                    a_c += prod;
                }
                let v = vals[j][c];
                let mut cands = vec![0.0, 0.5 * v, 2.0 * v, vmax];
                cands.retain(|&x| x != v);
                let mut best: Option<(f64, f64)> = None;
                for &nv in &cands {
                    let new_pw = if nv > 0.0 { nv.powf(p[j]) } else { 0.0 };
                    let new_lhs = lhs + a_c * (new_pw - pw[j][c]);
                    let new_int = integrals[j] + nv - v;
                    if new_int <= 0.0 {
                        continue;
                    }
                    let mut ints = integrals.clone();
                    ints[j] = new_int;
                    let obj = objective(new_lhs, &ints);
                    if obj > current + 1e-12 && best.map_or(true, |b| obj > b.0) {
                        best = Some((obj, nv));
                    }
                }
                if let Some((obj, nv)) = best {
                    let new_pw = if nv > 0.0 { nv.powf(p[j]) } else { 0.0 };
                    lhs += a_c * (new_pw - pw[j][c]);
                    integrals[j] += nv - v;
                    vals[j][c] = nv;
                    pw[j][c] = new_pw;
                    current = obj;
                    improved = true;
                }
            }
        }
        // Resynchronise against drift from incremental updates.
        lhs = table.lhs_pow(&pw);
        integrals = vals.iter().map(|v| v.iter().sum()).collect();
        current = objective(lhs, &integrals);
        if !improved {
            break;
        }
    }
    (current.exp(), vals)
}
