use crate::error::Result;
use crate::rng;

use super::{BLDatum, LinearSubspace};

const DEDUP_TOL: f64 = 1e-8;
const ZERO_TOL: f64 = 1e-12;

/// Finite family of candidate subspaces closed (up to the cap) under sums and
/// intersections, containing `{0}`, `R^n` and every `T_j`.
///
/// Exponents computed over a lattice are exact whenever the extremal subspace
/// belongs to it, which is the case for data generated by the `T_j`; in
/// general they are bounds and are reported as "lattice-certified".
#[derive(Debug, Clone)]
pub struct SubspaceLattice {
    members: Vec<LinearSubspace>,
    capped: bool,
}

pub const DEFAULT_LATTICE_CAP: usize = 512;

impl SubspaceLattice {
    /// Explicit member list, deduplicated. No closure is applied.
    pub fn from_members(members: Vec<LinearSubspace>) -> Self {
        let mut out = Self {
            members: Vec::new(),
            capped: false,
        };
        for m in members {
            out.insert(m);
        }
        out
    }

    /// Closure of `{0, R^n, T_1, .., T_m}` under sum and intersection, plus
    /// `random_extra` random subspaces of each proper dimension.
    pub fn generate(d: &BLDatum, cap: usize, random_extra: usize, seed: u64) -> Self {
        let n = d.dim();
        let mut lat = Self::from_members(vec![LinearSubspace::zero(n), LinearSubspace::full(n)]);
        for t in d.subspaces() {
            lat.insert(t.clone());
        }
        let mut done = 0usize;
        'outer: loop {
            let len = lat.members.len();
            if done == len {
                break;
            }
            for i in done..len {
                for j in 0..i {
                    let (a, b) = (&lat.members[i], &lat.members[j]);
                    let s = a.sum(b);
                    let x = a.intersect(b);
                    lat.insert(s);
                    lat.insert(x);
                    if lat.members.len() >= cap {
                        lat.capped = true;
                        lat.members.truncate(cap);
                        break 'outer;
                    }
                }
            }
            done = len;
        }
        if random_extra > 0 {
            let mut r = rng::stream(seed);
            for k in 1..n {
                for _ in 0..random_extra {
                    let rows: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(&mut r, n)).collect();
                    if let Ok(s) = LinearSubspace::from_rows(n, &rows) {
                        lat.insert(s);
                    }
                }
            }
        }
        lat
    }

    fn insert(&mut self, s: LinearSubspace) -> bool {
        if self
            .members
            .iter()
            .any(|m| m.dim() == s.dim() && m.distance(&s) < DEDUP_TOL)
        {
            return false;
        }
        self.members.push(s);
        true
    }

    pub fn members(&self) -> &[LinearSubspace] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether generation stopped at the cap before closure.
    pub fn capped(&self) -> bool {
        self.capped
    }
}

/// Extremal value of an exponent functional and the subspace attaining it.
#[derive(Debug, Clone)]
pub struct ExponentResult {
    pub value: f64,
    pub subspace: LinearSubspace,
    /// Always true: the optimisation ran over a finite lattice.
    pub lattice_certified: bool,
}

/// `dim V - Σ p_j dim(V / T_j)`, with `dim(V/T_j) = dim V - dim(V ∩ T_j)`.
pub fn kappa_term(d: &BLDatum, v: &LinearSubspace) -> f64 {
    let dv = v.dim() as f64;
    dv - d
        .subspaces()
        .iter()
        .zip(d.exponents())
        .map(|(t, p)| p * (v.dim() - v.intersection_dim(t)) as f64)
        .sum::<f64>()
}

/// `codim V - Σ p_j codim(V / T_j)`, with the quotient codimension
/// `n - dim(V + T_j)`.
pub fn kappa_tilde_term(d: &BLDatum, v: &LinearSubspace) -> f64 {
    let n = d.dim();
    (n - v.dim()) as f64
        - d.subspaces()
            .iter()
            .zip(d.exponents())
            .map(|(t, p)| p * (n - v.sum_dim(t)) as f64)
            .sum::<f64>()
}

fn extremum(
    d: &BLDatum,
    lat: &SubspaceLattice,
    term: impl Fn(&BLDatum, &LinearSubspace) -> f64,
    maximize: bool,
) -> Option<ExponentResult> {
    let mut best: Option<(f64, &LinearSubspace)> = None;
    for v in lat.members() {
        let t = term(d, v);
        let better = match best {
            None => true,
            Some((b, bv)) => {
                let diff = if maximize { t - b } else { b - t };
                diff > ZERO_TOL || (diff.abs() <= ZERO_TOL && v.tie_order(bv).is_lt())
            }
        };
        if better {
            best = Some((t, v));
        }
    }
    best.map(|(value, v)| ExponentResult {
        value,
        subspace: v.clone(),
        lattice_certified: true,
    })
}

/// Growth exponent in `R`: maximum of [`kappa_term`] over the lattice.
/// The lattice is expected to contain `{0}`, which makes the result `>= 0`.
pub fn kappa(d: &BLDatum, lat: &SubspaceLattice) -> ExponentResult {
    extremum(d, lat, kappa_term, true).unwrap_or_else(|| ExponentResult {
        value: 0.0,
        subspace: LinearSubspace::zero(d.dim()),
        lattice_certified: true,
    })
}

/// Growth exponent in `r`: minimum of [`kappa_tilde_term`] over the lattice.
pub fn kappa_tilde(d: &BLDatum, lat: &SubspaceLattice) -> ExponentResult {
    extremum(d, lat, kappa_tilde_term, false).unwrap_or_else(|| ExponentResult {
        value: 0.0,
        subspace: LinearSubspace::full(d.dim()),
        lattice_certified: true,
    })
}

/// Discrete condition: `dim V <= Σ p_j dim(V/T_j)` for all lattice `V`.
pub fn check_discrete(d: &BLDatum, lat: &SubspaceLattice) -> bool {
    kappa(d, lat).value.abs() <= ZERO_TOL
}

/// Local condition: `codim V >= Σ p_j codim(V/T_j)` for all lattice `V`.
pub fn check_local(d: &BLDatum, lat: &SubspaceLattice) -> bool {
    kappa_tilde(d, lat).value.abs() <= ZERO_TOL
}

/// Convenience: closure lattice with default cap and no random members.
pub fn default_lattice(d: &BLDatum) -> Result<SubspaceLattice> {
    Ok(SubspaceLattice::generate(d, DEFAULT_LATTICE_CAP, 0, 0))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{axes, line};
    use super::super::{check_scaling, BLDatum, LinearSubspace};
    use super::*;

    fn point(p: f64) -> BLDatum {
        BLDatum::new(1, vec![LinearSubspace::zero(1)], vec![p]).unwrap()
    }

    #[test]
    fn axes_lattice_and_exponents() {
        let d = axes();
        let lat = default_lattice(&d).unwrap();
        assert_eq!(lat.len(), 4);
        let k = kappa(&d, &lat);
        assert_eq!(k.value, 0.0);
        assert_eq!(k.subspace.dim(), 0);
        let kt = kappa_tilde(&d, &lat);
        assert_eq!(kt.value, 0.0);
        assert!(check_discrete(&d, &lat));
        assert!(check_local(&d, &lat));
    }

    #[test]
    fn one_dimensional_point_data() {
        let d = point(0.5);
        let lat = default_lattice(&d).unwrap();
        let k = kappa(&d, &lat);
        assert_eq!(k.value, 0.5);
        assert_eq!(k.subspace.dim(), 1);
        assert!(!check_discrete(&d, &lat));
        assert!(check_local(&d, &lat));

        let d = point(2.0);
        let lat = default_lattice(&d).unwrap();
        let kt = kappa_tilde(&d, &lat);
        assert_eq!(kt.value, -1.0);
        // V = {0}: codim 1 - 2 * codim({0}/{0}) = 1 - 2.
        assert_eq!(kt.subspace.dim(), 0);
        assert!(check_discrete(&d, &lat));
        assert!(!check_local(&d, &lat));
    }

    #[test]
    fn singleton_lattices() {
        let d = point(0.5);
        let only_zero = SubspaceLattice::from_members(vec![LinearSubspace::zero(1)]);
        assert_eq!(kappa(&d, &only_zero).value, 0.0);
        let only_full = SubspaceLattice::from_members(vec![LinearSubspace::full(1)]);
        assert!(kappa_tilde(&d, &only_full).value <= 0.0);
    }

    #[test]
    fn sum_identity_and_two_of_three() {
        let data = vec![
            axes(),
            BLDatum::new(2, vec![line(0.0), line(1.0), line(2.0)], vec![0.5, 0.5, 0.5]).unwrap(),
            BLDatum::new(2, vec![line(0.0), line(0.0)], vec![1.0, 1.0]).unwrap(),
            BLDatum::new(2, vec![line(0.0), line(1.0)], vec![0.7, 0.4]).unwrap(),
        ];
        for d in data {
            let lat = default_lattice(&d).unwrap();
            let k = kappa(&d, &lat).value;
            let kt = kappa_tilde(&d, &lat).value;
            assert!((k + kt - d.scaling_exponent()).abs() < 1e-12);
            let conds = [check_discrete(&d, &lat), check_local(&d, &lat), check_scaling(&d).0];
            let count = conds.iter().filter(|&&c| c).count();
            assert_ne!(count, 2, "two conditions must force the third: {conds:?}");
        }
    }
}
