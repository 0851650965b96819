//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Reference values come from closed forms computed here,
//! not from the library under test.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use kbl_core::bl::{self, BLDatum, Budget, GaussianBl, GaussianOptions, LinearSubspace, SubspaceLattice, TruncationWindow};
use kbl_core::exterior::GradedMeasure;
use kbl_core::fremlin::{self, FremlinOptions, NonnegTensor};
use kbl_core::geometry::{self, JohnOptions, SeminormBall, SymmetricPolytope};
use kbl_core::harness::{self, DyadicGrid};
use kbl_core::polysurf::{self, Cube, MeshOptions, PolyNVars, PolynomialMixture};
use kbl_core::suites::{random_datum, random_polynomial};
use kbl_core::{linalg, rng};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("{what} took {t:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn est(d: &BLDatum, r: f64, big_r: f64) -> f64 {
    let w = TruncationWindow::new(r, big_r).unwrap();
    bl::bl_truncated_estimate(d, &w, Budget::default()).unwrap().value
}

/// Least-squares slope, written out here rather than borrowed.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn point(p: f64) -> BLDatum {
    BLDatum::new(1, vec![LinearSubspace::zero(1)], vec![p]).unwrap()
}

fn axes() -> BLDatum {
    BLDatum::from_rows(2, &[vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]], vec![1.0, 1.0]).unwrap()
}

/// `n - Σ p_j codim T_j`, computed from the raw data.
fn scaling_exponent(d: &BLDatum) -> f64 {
    let n = d.dim() as f64;
    n - d
        .subspaces()
        .iter()
        .zip(d.exponents())
        .map(|(t, p)| p * (d.dim() - t.dim()) as f64)
        .sum::<f64>()
}

fn c1_scaling() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut r = rng::substream(101, i);
        let d = random_datum(&mut r);
        let (sr, big_r) = (0.5, 1.5);
        let a = est(&d, sr, big_r);
        let b = est(&d, 1.0, big_r / sr);
        let want = sr.powf(scaling_exponent(&d)) * b;
        worst = worst.max((a - want).abs() / a.abs().max(f64::MIN_POSITIVE));
    }
    within_time(start, Duration::from_secs(60), "scaling")?;
    ensure(worst < 1e-9, format!("max relative defect {worst:.3e} over 20 data"))
}

fn c2_exponent_fits() -> Check {
    let start = Instant::now();
    let mut msgs = Vec::new();
    let mut ok = true;

    let half = point(0.5);
    let rs: Vec<f64> = (2..=8).map(|k| 2f64.powi(k)).collect();
    let v: Vec<f64> = rs.iter().map(|&br| est(&half, 1.0, br)).collect();
    let oracle_gap = rs.iter().zip(&v).map(|(br, e)| (e / (2.0 * br).sqrt() - 1.0).abs()).fold(0.0, f64::max);
    let lr: Vec<f64> = rs.iter().map(|x| x.ln()).collect();
    let k_hat = slope(&lr, &v.iter().map(|x| x.ln()).collect::<Vec<_>>());
    ok &= (k_hat - 0.5).abs() <= 0.05 && oracle_gap < 0.02;
    msgs.push(format!("p=1/2 slope {k_hat:.4} (sqrt(2R) gap {oracle_gap:.2e})"));

    let two = point(2.0);
    let small: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).collect();
    let v: Vec<f64> = small.iter().map(|&r| est(&two, r, 1.0)).collect();
    let oracle_gap = small.iter().zip(&v).map(|(r, e)| (e * r - 1.0).abs()).fold(0.0, f64::max);
    let li: Vec<f64> = small.iter().map(|x| -x.ln()).collect();
    let kt = slope(&li, &v.iter().map(|x| x.ln()).collect::<Vec<_>>());
    ok &= (kt - 1.0).abs() <= 0.05 && oracle_gap < 0.02;
    msgs.push(format!("p=2 slope {kt:.4} (1/r gap {oracle_gap:.2e})"));

    let lw = axes();
    let rs: Vec<f64> = (2..=5).map(|k| 2f64.powi(k)).collect();
    let small: Vec<f64> = (1..=5).map(|k| 2f64.powi(-k)).collect();
    let a: Vec<f64> = rs.iter().map(|&br| est(&lw, 1.0, br).ln()).collect();
    let b: Vec<f64> = small.iter().map(|&r| est(&lw, r, 1.0).ln()).collect();
    let s1 = slope(&rs.iter().map(|x| x.ln()).collect::<Vec<_>>(), &a);
    let s2 = slope(&small.iter().map(|x| -x.ln()).collect::<Vec<_>>(), &b);
    ok &= s1.abs() <= 0.05 && s2.abs() <= 0.05;
    msgs.push(format!("LW slopes {s1:.4}, {s2:.4}"));

    within_time(start, Duration::from_secs(300), "exponent fits")?;
    ensure(ok, msgs.join("; "))
}

fn c3_exponent_identity() -> Check {
    for i in 0..50 {
        let mut r = rng::substream(303, i);
        let d = random_datum(&mut r);
        let lat = SubspaceLattice::generate(&d, bl::DEFAULT_LATTICE_CAP, 2, r.random());
        let (k, kt) = (bl::kappa(&d, &lat).value, bl::kappa_tilde(&d, &lat).value);
        let s = scaling_exponent(&d);
        if (k + kt - s).abs() > 1e-12 || k < 0.0 || kt > 0.0 {
            return Err(format!("datum {i}: kappa {k} kappa~ {kt} exponent {s}"));
        }
    }
    Ok("kappa + kappa~ = n - sum p_j codim on 50 data, signs correct".into())
}

fn c4_gaussian_lines() -> Check {
    let mut worst = 0.0f64;
    for theta in [PI / 2.0, PI / 3.0, PI / 4.0, PI / 6.0] {
        let d = BLDatum::from_rows(2, &[vec![vec![1.0, 0.0]], vec![vec![theta.cos(), theta.sin()]]], vec![1.0, 1.0]).unwrap();
        let v = match bl::bl_gaussian(&d, GaussianOptions::default()) {
            GaussianBl::Value(v) => v,
            other => return Err(format!("theta {theta}: {other:?}")),
        };
        worst = worst.max((v - 1.0 / theta.sin()).abs());
    }
    ensure(worst < 1e-4, format!("max |BL - 1/sin| = {worst:.2e}"))
}

fn c5_fremlin() -> Check {
    let q = [2.0, 2.0];
    let opts = FremlinOptions::default();
    let id = NonnegTensor::from_shape(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let v = fremlin::fremlin_norm(&id, &q, opts).unwrap().value;
    let brute = fremlin::fremlin_bruteforce(&id, &q, 13).unwrap();
    if (v - brute).abs() > 1e-6 || (v - 2.0).abs() > 1e-6 {
        return Err(format!("identity {v}, brute force {brute}"));
    }
    let dg = NonnegTensor::from_shape(&[2, 2], vec![1.0, 0.0, 0.0, 4.0]).unwrap();
    let v2 = fremlin::fremlin_norm(&dg, &q, opts).unwrap().value;
    if (v2 / 5.0 - 1.0).abs() > 0.02 {
        return Err(format!("diag(1,4) gives {v2}"));
    }
    for i in 0..100 {
        let mut r = rng::substream(505, i);
        let order = r.random_range(2..=3usize);
        let shape: Vec<usize> = (0..order).map(|_| r.random_range(1..=3)).collect();
        let entries: Vec<f64> = (0..shape.iter().product()).map(|_| r.random()).collect();
        let t = NonnegTensor::from_shape(&shape, entries.clone()).unwrap();
        let m = order as f64;
        let qm = vec![m; order];
        let lb = entries.iter().map(|e| e.powf(m)).sum::<f64>().powf(1.0 / m);
        let v = fremlin::fremlin_norm(&t, &qm, opts).unwrap().value;
        if v < lb * (1.0 - 1e-9) {
            return Err(format!("tensor {i}: {v} below L^m bound {lb}"));
        }
    }
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut r = rng::substream(506, i);
        let xs: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..r.random_range(1..=4)).map(|_| r.random_range(0.1..2.0)).collect())
            .collect();
        let t = NonnegTensor::outer(&xs).unwrap();
        let want = linalg::norm(&xs[0]) * linalg::norm(&xs[1]);
        let v = fremlin::fremlin_norm(&t, &q, opts).unwrap().value;
        worst = worst.max((v - want).abs() / want);
    }
    ensure(
        worst < 1e-6,
        format!("identity {v:.9}, diag(1,4) {v2:.6}, L^m bound on 100 tensors, rank-one error {worst:.1e}"),
    )
}

fn c6_kakeya() -> Check {
    let start = Instant::now();
    let n = 8;
    let fam = harness::grid_lines_instance(n).unwrap();
    let rep = harness::lw_kakeya(&fam, n as f64).unwrap();
    // Each cube of the central block meets one horizontal and one vertical
    // line, at right angles: N^2 unit terms against N * N.
    let lhs_oracle = (n * n) as f64;
    let rhs_oracle = (n as f64) * (n as f64);
    if (rep.lhs - lhs_oracle).abs() > 1e-9 || (rep.rhs - rhs_oracle).abs() > 1e-9 {
        return Err(format!("grid lhs {} rhs {}", rep.lhs, rep.rhs));
    }
    let ratio = rep.ratio.unwrap();
    if (ratio - 1.0).abs() > 0.1 {
        return Err(format!("grid ratio {ratio}"));
    }
    let mut ratios = Vec::new();
    for size in [10, 40, 160] {
        let f = harness::random_line_families(size, 8.0, 0).unwrap();
        ratios.push(harness::lw_kakeya(&f, 24.0).unwrap().ratio.unwrap());
    }
    let drift = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
    within_time(start, Duration::from_secs(600), "kakeya")?;
    ensure(drift <= 0.2, format!("grid ratio {ratio:.6}; sweep ratios {ratios:.4?}, drift {drift:.3}"))
}

/// Sign changes of `p` along the segment on a fine grid: a lower bound for
/// the number of roots that does not use the root finder.
fn sign_changes(p: &PolyNVars, a: &[f64], d: &[f64], lo: f64, hi: f64) -> usize {
    let steps = 4000;
    let mut prev = 0.0f64;
    let mut count = 0;
    for i in 0..=steps {
        let t = lo + (hi - lo) * i as f64 / steps as f64;
        let x: Vec<f64> = a.iter().zip(d).map(|(ai, di)| ai + t * di).collect();
        let v = p.eval(&x);
        if v != 0.0 {
            if prev != 0.0 && (v < 0.0) != (prev < 0.0) {
                count += 1;
            }
            prev = v;
        }
    }
    count
}

fn c7_bezout_crofton() -> Check {
    let q = Cube::centered(2, 2.0);
    let mut lines = 0;
    for i in 0..20 {
        let mut r = rng::substream(707, i);
        let deg = r.random_range(1..=6u32);
        let p = random_polynomial(2, deg, &mut r);
        for _ in 0..25 {
            let v = rng::unit_vec(&mut r, 2);
            let a = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            let (lo, hi) = q.clip_line(&a, &v).unwrap();
            let c = polysurf::line_roots(&p, &a, &v, lo, hi).count();
            let seen = sign_changes(&p, &a, &v, lo, hi);
            if c > p.degree() || seen > c {
                return Err(format!("poly {i}: {c} roots, {seen} sign changes, degree {}", p.degree()));
            }
            lines += 1;
        }
    }
    let mut gap = 0.0f64;
    for i in 0..3 {
        let mut r = rng::substream(708, i);
        let p = random_polynomial(2, 4, &mut r);
        let v = rng::unit_vec(&mut r, 2);
        let mesh = polysurf::mesh_zero_set(&p, &q, MeshOptions { cells: 64, ..Default::default() }).unwrap();
        let area = polysurf::directional_area(&mesh, &v);
        let c = polysurf::crofton_root_oracle(&p, &q, &v, 4000, r.random()).unwrap();
        gap = gap.max((c.value - area).abs() / area);
    }
    let rho = 0.6;
    let circle = PolyNVars::new(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -rho * rho)]).unwrap();
    let m = polysurf::mesh_zero_set(&circle, &q, MeshOptions::default()).unwrap();
    let anchor = (polysurf::directional_area(&m, &[1.0, 0.0]) / (4.0 * rho) - 1.0).abs();
    ensure(
        gap <= 0.03 && anchor <= 0.02,
        format!("{lines} lines within degree; Crofton gap {gap:.4}; circle anchor error {anchor:.2e}"),
    )
}

fn random_plane_measure(r: &mut rng::Stream) -> GradedMeasure {
    loop {
        let atoms: Vec<(Vec<f64>, f64)> = (0..r.random_range(2..=5))
            .map(|_| (rng::unit_vec(r, 2), r.random_range(0.1..2.0)))
            .collect();
        let mu = GradedMeasure::from_directions(2, &atoms).unwrap();
        if SeminormBall::new(&mu).unwrap().is_bounded() {
            return mu;
        }
    }
}

fn c8_convex() -> Check {
    for i in 0..50 {
        let mut r = rng::substream(808, i);
        let n = 2 + (i as usize % 2);
        let k = SymmetricPolytope::random(n, r.random_range(n..=n + 4), r.random()).unwrap();
        let e = geometry::john_ellipsoid(&k, JohnOptions::default()).unwrap();
        let s = geometry::john_sandwich(&k, &e, 4000);
        if !(s.inner <= 1.0 + 1e-9 && s.outer <= (n as f64).sqrt() * (1.0 + 1e-3)) {
            return Err(format!("polytope {i}: inner {} outer {}", s.inner, s.outer));
        }
    }
    for i in 0..200 {
        let mut r = rng::substream(809, i);
        let n = 2 + (i as usize % 2);
        let k = if r.random::<bool>() { 1 } else { n - 1 };
        let body = SymmetricPolytope::random(n, r.random_range(n..=n + 4), r.random()).unwrap();
        let rows: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(&mut r, n)).collect();
        let t = LinearSubspace::from_rows(n, &rows).unwrap();
        let c = geometry::slice_projection_check(&body, &t, 200_000, r.random()).unwrap();
        let binom = if k == 1 { n } else { n * (n - 1) / 2 } as f64;
        if (c.rhs / binom) <= 0.0 || c.lhs > c.rhs * (1.0 + 3.0 * c.rel_err) + 1e-12 {
            return Err(format!("pair {i}: {} > {}", c.lhs, c.rhs));
        }
    }
    let mut floor = f64::INFINITY;
    for i in 0..50 {
        let mut r = rng::substream(810, i);
        let mu = random_plane_measure(&mut r);
        floor = floor.min(geometry::wedge_visibility_check(&mu, 200_000, r.random()).unwrap().rhs);
    }
    if floor < 0.1 {
        return Err(format!("wedge/visibility floor {floor}"));
    }
    // The l1 seminorm ball is the square |x| + |y| <= 1 of area 2, inside
    // the unit disk.
    let l1 = SeminormBall::from_directions(2, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]).unwrap();
    let vis = geometry::visibility(&l1, 200_000, 1).unwrap();
    ensure(
        (vis / 0.5 - 1.0).abs() <= 0.01,
        format!("John on 50 polytopes; slice/projection on 200 pairs; wedge floor {floor:.3}; l1 visibility {vis:.6}"),
    )
}

/// Both duality conditions recomputed from the returned `S_j`.
fn duality_case(g: &[f64], m: &[f64], p: &[f64], degs: &[f64]) -> Result<f64, String> {
    let rep = harness::duality_check(g, m, p, degs).map_err(|e| e.to_string())?;
    let big_p: f64 = p.iter().sum();
    let total: f64 = g.iter().sum();
    let c1p = rep.converse.c1.powf(big_p);
    let degprod: f64 = p.iter().zip(degs).map(|(pj, d)| d.powf(*pj)).product();
    let tol = 1e-9;
    if (total - c1p * degprod).abs() > tol * total.max(1.0) {
        return Err(format!("C1^P prod deg^p = {} vs total {total}", c1p * degprod));
    }
    for q in 0..g.len() {
        let lhs = g[q] * m[q].powf(big_p - 1.0);
        let rhs = c1p * (0..p.len()).map(|j| rep.converse.s[j][q].powf(p[j])).product::<f64>();
        if lhs > rhs * (1.0 + tol) + tol * f64::MIN_POSITIVE {
            return Err(format!("cube {q}: {lhs} > {rhs}"));
        }
    }
    for (sj, d) in rep.converse.s.iter().zip(degs) {
        if sj.iter().sum::<f64>() > d * (1.0 + tol) {
            return Err("sum of S_j exceeds the degree".into());
        }
    }
    // Forward: with M = G / ΣG the Hölder step is an equality.
    let mf: Vec<f64> = g.iter().map(|x| x / total).collect();
    let h: f64 = g.iter().zip(&mf).map(|(a, b)| a.powf(1.0 / big_p) * b.powf(1.0 - 1.0 / big_p)).sum::<f64>().powf(big_p);
    if (h - total).abs() > tol * total || !rep.forward.holds {
        return Err(format!("forward chain {:?}", rep.forward.chain));
    }
    let c = &rep.forward.chain;
    if c.windows(2).any(|w| w[0] > w[1] * (1.0 + tol)) {
        return Err(format!("chain not monotone {c:?}"));
    }
    Ok(rep.converse.holder_ratio)
}

fn c9_duality() -> Check {
    for i in 0..50 {
        let mut r = rng::substream(909, i);
        let cubes = r.random_range(1..=12);
        let g: Vec<f64> = (0..cubes).map(|_| r.random_range(0.0..3.0)).collect();
        if g.iter().sum::<f64>() == 0.0 {
            continue;
        }
        let mut m: Vec<f64> = (0..cubes).map(|_| r.random_range(0.01..1.0)).collect();
        let s: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= s);
        let fams = r.random_range(2..=3);
        let p: Vec<f64> = (0..fams).map(|_| r.random_range(0.5..1.5)).collect();
        let degs: Vec<f64> = (0..fams).map(|_| r.random_range(1..=8) as f64).collect();
        duality_case(&g, &m, &p, &degs).map_err(|e| format!("instance {i}: {e}"))?;
    }
    let single = duality_case(&[2.5], &[1.0], &[1.0, 0.5], &[3.0, 2.0])?;
    let equal = duality_case(&[0.7; 6], &[1.0 / 6.0; 6], &[0.5, 0.5, 0.5], &[1.0, 4.0, 2.0])?;
    ensure(
        (single - 1.0).abs() <= 1e-9 && (equal - 1.0).abs() <= 1e-9,
        format!("50 random instances; Hölder ratio single-cube {single:.12}, equal-weight {equal:.12}"),
    )
}

fn c10_p0() -> Check {
    let p = polysurf::build_p0(1.0, 2).unwrap();
    // Half-integers in [-2, 2]: ±1/2, ±3/2, for each of two coordinates.
    if p.degree() != 8 {
        return Err(format!("degree {} at R = 1", p.degree()));
    }
    let dirs: Vec<[f64; 2]> = (0..360).map(|i| {
        let t = PI * i as f64 / 180.0;
        [t.cos(), t.sin()]
    }).collect();
    let mut worst = f64::INFINITY;
    let mut cubes = 0;
    for big_r in [1.0, 2.0, 4.0, 8.0] {
        let sigma = PolynomialMixture::delta(polysurf::build_p0(big_r, 2).unwrap()).unwrap();
        let grid = DyadicGrid::new(2, big_r).unwrap();
        for ci in 0..grid.len() {
            let mu = polysurf::mixture_normal_measure(&sigma, &grid.cube(ci), MeshOptions::default()).unwrap();
            let s = SeminormBall::new(&mu).unwrap();
            for v in &dirs {
                worst = worst.min(s.eval(v).unwrap());
            }
            cubes += 1;
        }
    }
    ensure(worst >= 0.5, format!("degree 8 at R = 1; min seminorm {worst:.4} over {cubes} cubes"))
}

fn run_cli(bin: &str, dir: &Path, cmd: &str, extra: &[&str]) -> Result<(), String> {
    let status = Command::new(bin)
        .args(["--seed", "7", "--out"])
        .arg(dir)
        .args(extra)
        .arg(cmd)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.code() == Some(2) {
        return Err(format!("{cmd}: {}", String::from_utf8_lossy(&status.stderr)));
    }
    Ok(())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn c11_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_kbl");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_dir = tmp.path().join("cfg");
    std::fs::create_dir_all(&cfg_dir).unwrap();
    // Reduced budgets keep the double run short; the code paths are the same.
    let configs = [
        ("exponents", r#"{"data": [{"name": "half", "datum": {"n": 1, "subspaces": [[]], "exponents": [0.5]}, "big_r": [4, 8], "r": [0.5, 0.25]}]}"#),
        ("kakeya", r#"{"grid_lines": 4, "sweep_sizes": [10, 20], "sweep_seeds": 2}"#),
        ("fremlin", r#"{"random": 10, "rank_one": 4}"#),
        ("geometry-checks", r#"{"john": 4, "slice_pairs": 6, "wedge_measures": 6}"#),
        ("polysurf-checks", r#"{"bezout_polynomials": 3, "crofton_polynomials": 1, "bisection_polynomials": 2, "p0_radii": [1, 2]}"#),
        ("duality", r#"{"random": 10}"#),
        ("proptest", r#"{"budget": 3}"#),
    ];
    let mut threads = ["1", "4"].iter().cycle();
    for (cmd, cfg) in configs {
        let cfg_path = cfg_dir.join(format!("{cmd}.json"));
        std::fs::write(&cfg_path, cfg).unwrap();
        let mut snaps = Vec::new();
        for run in 0..2 {
            let dir = tmp.path().join(format!("{cmd}-{run}"));
            let t = threads.next().unwrap();
            run_cli(
                bin,
                &dir,
                cmd,
                &["--config", cfg_path.to_str().unwrap(), "--samples", "20000", "--threads", t],
            )?;
            snaps.push(snapshot(&dir));
        }
        if snaps[0].is_empty() || snaps[0] != snaps[1] {
            return Err(format!("{cmd}: outputs differ between runs"));
        }
    }
    Ok("all 7 subcommands byte-identical across repeated runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("1 scaling identity", c1_scaling),
        ("2 exponent fits", c2_exponent_fits),
        ("3 kappa identity", c3_exponent_identity),
        ("4 gaussian lines", c4_gaussian_lines),
        ("5 fremlin", c5_fremlin),
        ("6 kakeya ratios", c6_kakeya),
        ("7 bezout/crofton", c7_bezout_crofton),
        ("8 convex geometry", c8_convex),
        ("9 duality", c9_duality),
        ("10 p0 construction", c10_p0),
        ("11 determinism", c11_determinism),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
