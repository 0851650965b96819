//! Randomised invariant suites run by the `proptest` subcommand. Each suite
//! draws `budget` seeded cases and counts failures.

use rand::Rng;
use serde::Serialize;

use crate::bl::{self, BLDatum, LinearSubspace};
use crate::exterior::MultiVector;
use crate::fremlin::{fremlin_norm, lm_lower_bound, FremlinOptions, NonnegTensor};
use crate::geometry::{john_ellipsoid, john_sandwich, JohnOptions, SymmetricPolytope};
use crate::harness::{cube_incidence, duality_check, AffineSubspace};
use crate::linalg;
use crate::polysurf::{line_roots, mesh_zero_set, normal_measure, Cube, MeshOptions, PolyNVars};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub budget: usize,
    pub seed: u64,
    /// Replace every tolerance by a negative number so that each suite
    /// fails; used to check that the gate can fail.
    pub inject_bad_tolerance: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            budget: 20,
            seed: 0,
            inject_bad_tolerance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// First failing case, if any.
    pub detail: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Ctx {
    bad: bool,
}

impl Ctx {
    fn tol(&self, t: f64) -> f64 {
        if self.bad {
            -1.0
        } else {
            t
        }
    }
}

/// Random polynomial in `n` variables of total degree `deg`, dense.
pub fn random_polynomial(n: usize, deg: u32, r: &mut Stream) -> PolyNVars {
    let mut terms = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        if e.iter().sum::<u32>() <= deg {
            terms.push((e.clone(), r.random_range(-1.0..1.0)));
        }
        let mut i = 0;
        while i < n {
            e[i] += 1;
            if e[i] <= deg {
                break;
            }
            e[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    PolyNVars::new(n, terms).expect("well-formed terms")
}

/// Random datum with `n <= 3`, up to three subspaces of random dimension
/// and exponents in quarter steps.
pub fn random_datum(r: &mut Stream) -> BLDatum {
    let n = r.random_range(1..=3usize);
    let m = r.random_range(1..=3usize);
    let subs: Vec<LinearSubspace> = (0..m)
        .map(|_| {
            let k = r.random_range(0..=n);
            let rows: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(r, n)).collect();
            LinearSubspace::from_rows(n, &rows).expect("rows have length n")
        })
        .collect();
    let p: Vec<f64> = (0..m).map(|_| r.random_range(1..=8u32) as f64 / 4.0).collect();
    BLDatum::new(n, subs, p).expect("valid datum")
}

type Case = Box<dyn Fn(&mut Stream, &Ctx) -> Result<(), String>>;

fn run(name: &str, cases: usize, seed: u64, ctx: &Ctx, case: Case) -> SuiteResult {
    let mut failures = 0;
    let mut detail = None;
    for i in 0..cases {
        let mut r = rng::substream(seed, i as u64);
        if let Err(msg) = case(&mut r, ctx) {
            failures += 1;
            detail.get_or_insert(format!("case {i}: {msg}"));
        }
    }
    SuiteResult {
        name: name.to_string(),
        cases,
        failures,
        detail,
    }
}

fn exterior_case() -> Case {
    Box::new(|r, ctx| {
        let n = r.random_range(2..=4usize);
        let u = rng::gaussian_vec(r, n);
        let v = rng::gaussian_vec(r, n);
        let w = MultiVector::vector(&u)
            .and_then(|a| a.wedge(&MultiVector::vector(&v)?))
            .map_err(|e| e.to_string())?;
        let want = linalg::dot(&u, &u) * linalg::dot(&v, &v) - linalg::dot(&u, &v).powi(2);
        let got = w.norm().powi(2);
        if (got - want).abs() > ctx.tol(1e-9) * want.max(1.0) {
            return Err(format!("|u^v|^2 = {got}, Lagrange identity gives {want}"));
        }
        Ok(())
    })
}

fn exponent_case() -> Case {
    Box::new(|r, ctx| {
        let d = random_datum(r);
        let lat = bl::SubspaceLattice::generate(&d, bl::DEFAULT_LATTICE_CAP, 2, r.random());
        let (k, kt) = (bl::kappa(&d, &lat).value, bl::kappa_tilde(&d, &lat).value);
        let s = d.scaling_exponent();
        if (k + kt - s).abs() > ctx.tol(1e-9) || k < -ctx.tol(0.0) - 1e-12 || kt > ctx.tol(0.0) + 1e-12 {
            return Err(format!("kappa {k}, kappa~ {kt}, scaling exponent {s}"));
        }
        Ok(())
    })
}

fn fremlin_case() -> Case {
    Box::new(|r, ctx| {
        let (a, b) = (r.random_range(1..=3usize), r.random_range(1..=3usize));
        let entries: Vec<f64> = (0..a * b).map(|_| if r.random::<f64>() < 0.3 { 0.0 } else { r.random() }).collect();
        let t = NonnegTensor::from_shape(&[a, b], entries).map_err(|e| e.to_string())?;
        let q = [2.0, 2.0];
        let v = fremlin_norm(&t, &q, FremlinOptions::default()).map_err(|e| e.to_string())?.value;
        let lb = lm_lower_bound(&t, &q).map_err(|e| e.to_string())?;
        if v < lb * (1.0 - ctx.tol(1e-9)) {
            return Err(format!("norm {v} below L^2 bound {lb}"));
        }
        let x: Vec<f64> = (0..a).map(|_| r.random_range(0.1..2.0)).collect();
        let y: Vec<f64> = (0..b).map(|_| r.random_range(0.1..2.0)).collect();
        let one = NonnegTensor::outer(&[x.clone(), y.clone()]).map_err(|e| e.to_string())?;
        let want = linalg::norm(&x) * linalg::norm(&y);
        let got = fremlin_norm(&one, &q, FremlinOptions::default()).map_err(|e| e.to_string())?.value;
        if (got - want).abs() > ctx.tol(1e-6) * want {
            return Err(format!("rank one: {got} vs {want}"));
        }
        Ok(())
    })
}

fn john_case() -> Case {
    Box::new(|r, ctx| {
        let n = r.random_range(2..=3usize);
        let m = r.random_range(n..=n + 4);
        let k = SymmetricPolytope::random(n, m, r.random()).map_err(|e| e.to_string())?;
        let e = john_ellipsoid(&k, JohnOptions::default()).map_err(|e| e.to_string())?;
        let s = john_sandwich(&k, &e, 2000);
        if !(s.inner <= 1.0 + ctx.tol(1e-9) && s.outer <= (n as f64).sqrt() * (1.0 + ctx.tol(1e-3))) {
            return Err(format!("sandwich inner {} outer {}", s.inner, s.outer));
        }
        Ok(())
    })
}

fn roots_case() -> Case {
    Box::new(|r, ctx| {
        let deg = r.random_range(1..=6u32);
        let p = random_polynomial(2, deg, r);
        let q = Cube::centered(2, 2.0);
        for _ in 0..25 {
            let v = rng::unit_vec(r, 2);
            let a = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            if let Some((lo, hi)) = q.clip_line(&a, &v) {
                let c = line_roots(&p, &a, &v, lo, hi).count();
                if c as f64 > deg as f64 + ctx.tol(0.0) {
                    return Err(format!("{c} roots on a line, degree {deg}"));
                }
            }
        }
        let m = mesh_zero_set(&p, &q, MeshOptions::default()).map_err(|e| e.to_string())?;
        let mass = normal_measure(&m).map_err(|e| e.to_string())?.total_weight();
        if (mass - m.total_area()).abs() > ctx.tol(1e-12) * mass.max(1.0) {
            return Err(format!("normal mass {mass} vs area {}", m.total_area()));
        }
        Ok(())
    })
}

fn harness_case() -> Case {
    Box::new(|r, ctx| {
        let n = r.random_range(2..=3usize);
        let k = r.random_range(0..n);
        let basis: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(r, n)).collect();
        let point: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let t = AffineSubspace::new(point, &basis).map_err(|e| e.to_string())?;
        let shift: Vec<i64> = (0..n).map(|_| r.random_range(-5..=5)).collect();
        let sv: Vec<f64> = shift.iter().map(|&s| s as f64).collect();
        let moved = t.translated(&sv);
        for _ in 0..10 {
            let z: Vec<i64> = (0..n).map(|_| r.random_range(-3..=2)).collect();
            let z2: Vec<i64> = z.iter().zip(&shift).map(|(a, b)| a + b).collect();
            if cube_incidence(&t, &Cube::unit(&z)) != cube_incidence(&moved, &Cube::unit(&z2)) {
                return Err(format!("incidence changed under translation by {shift:?} at {z:?}"));
            }
        }
        let cubes = r.random_range(1..=6usize);
        let g: Vec<f64> = (0..cubes).map(|_| r.random_range(0.0..3.0)).collect();
        let mut m: Vec<f64> = (0..cubes).map(|_| r.random_range(0.0..1.0)).collect();
        let ms: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= ms);
        let p: Vec<f64> = (0..r.random_range(2..=3)).map(|_| r.random_range(0.5..1.5)).collect();
        let degs: Vec<f64> = p.iter().map(|_| r.random_range(1..=8) as f64).collect();
        let rep = duality_check(&g, &m, &p, &degs).map_err(|e| e.to_string())?;
        if !(rep.converse.holds && rep.forward.holds) || rep.converse.holder_ratio > 1.0 + ctx.tol(1e-9) {
            return Err(format!("duality failed: {rep:?}"));
        }
        Ok(())
    })
}

/// Run every suite with `budget` cases each (the John suite uses a quarter
/// of the budget, being slower). A zero budget runs nothing and passes.
pub fn run_suites(opts: SuiteOptions) -> Vec<SuiteResult> {
    let ctx = Ctx {
        bad: opts.inject_bad_tolerance,
    };
    let b = opts.budget;
    if b == 0 {
        log::warn!("proptest budget is 0: no cases run");
    }
    vec![
        run("exterior", b, opts.seed, &ctx, exterior_case()),
        run("bl-exponents", b, opts.seed ^ 1, &ctx, exponent_case()),
        run("fremlin", b, opts.seed ^ 2, &ctx, fremlin_case()),
        run("john", b.div_ceil(4), opts.seed ^ 3, &ctx, john_case()),
        run("polysurf", b, opts.seed ^ 4, &ctx, roots_case()),
        run("harness", b, opts.seed ^ 5, &ctx, harness_case()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_gate_can_fail() {
        let ok = run_suites(SuiteOptions {
            budget: 4,
            seed: 11,
            inject_bad_tolerance: false,
        });
        for s in &ok {
            assert!(s.passed(), "{s:?}");
        }
        let bad = run_suites(SuiteOptions {
            budget: 2,
            seed: 11,
            inject_bad_tolerance: true,
        });
        assert!(bad.iter().all(|s| !s.passed()), "{bad:?}");
        let none = run_suites(SuiteOptions {
            budget: 0,
            ..Default::default()
        });
        assert!(none.iter().all(|s| s.passed() && s.cases == 0));
    }
}
