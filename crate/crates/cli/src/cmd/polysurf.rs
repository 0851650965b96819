use std::f64::consts::PI;

use rand::Rng;
use serde::Deserialize;

use kbl_core::geometry::SeminormBall;
use kbl_core::harness::DyadicGrid;
use kbl_core::io::PolynomialJson;
use kbl_core::polysurf::{self, Cube, MeshOptions, PolyNVars, PolynomialMixture};
use kbl_core::suites::random_polynomial;
use kbl_core::{linalg, rng};

use crate::out::{self, f, Csv};
use crate::{Cli, CmdResult, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    circle_radii: Vec<f64>,
    bezout_polynomials: usize,
    bezout_lines: usize,
    max_degree: u32,
    crofton_polynomials: usize,
    crofton_cells: usize,
    crofton_batches: usize,
    bisection_polynomials: usize,
    p0_radii: Vec<f64>,
    p0_directions: usize,
    p0_floor: f64,
    /// Optional polynomial JSON to mesh into `mesh.csv`.
    mesh: Option<String>,
    mesh_cells: usize,
    mesh_side: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            circle_radii: vec![0.25, 0.5, 0.8],
            bezout_polynomials: 20,
            bezout_lines: 25,
            max_degree: 6,
            crofton_polynomials: 4,
            crofton_cells: 64,
            crofton_batches: 4,
            bisection_polynomials: 10,
            p0_radii: vec![1.0, 2.0, 4.0, 8.0],
            p0_directions: 360,
            p0_floor: 0.5,
            mesh: None,
            mesh_cells: 32,
            mesh_side: 2.0,
        }
    }
}

fn circle(rho: f64) -> kbl_core::Result<PolyNVars> {
    PolyNVars::new(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -rho * rho)])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Number of half-integers `c` with `|c| <= R + 1`, counted directly.
fn half_integer_count(big_r: f64) -> usize {
    let top = (big_r + 2.0).ceil() as i64;
    (-top..=top).filter(|k| (*k as f64 + 0.5).abs() <= big_r + 1.0).count()
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.expect("checked by caller");
    let samples = cli.samples.unwrap_or(200_000);
    let mut failures = Vec::new();
    let square = Cube::centered(2, 2.0);
    let mesh_opts = MeshOptions::default();

    let mut circ = Csv::new(&["rho", "length", "length_exact", "area_along_e1", "area_along_e1_exact"]);
    for &rho in &cfg.circle_radii {
        let m = polysurf::mesh_zero_set(&circle(rho)?, &square, mesh_opts)?;
        let (len, dir) = (m.total_area(), polysurf::directional_area(&m, &[1.0, 0.0]));
        if rel(len, 2.0 * PI * rho) > 0.02 || rel(dir, 4.0 * rho) > 0.02 {
            failures.push(format!("circle rho {rho}: length {len}, directional {dir}"));
        }
        circ.row(&[f(rho), f(len), f(2.0 * PI * rho), f(dir), f(4.0 * rho)]);
    }
    circ.write(cli, "circle.csv")?;

    let mut bez = Csv::new(&["case", "degree", "area", "area_over_degree", "lines", "max_roots", "violations"]);
    for i in 0..cfg.bezout_polynomials {
        let mut r = rng::substream(seed, i as u64);
        let deg = r.random_range(1..=cfg.max_degree.max(1));
        let p = random_polynomial(2, deg, &mut r);
        let rep = polysurf::bezout_area_check(&p, &square, mesh_opts, cfg.bezout_lines, r.random())?;
        if rep.violations > 0 {
            failures.push(format!("Bezout case {i}: {} lines exceed degree {}", rep.violations, rep.degree));
        }
        bez.row(&[
            i.to_string(),
            rep.degree.to_string(),
            f(rep.area),
            f(rep.ratio),
            rep.lines_checked.to_string(),
            rep.max_count.to_string(),
            rep.violations.to_string(),
        ]);
    }
    bez.write(cli, "bezout.csv")?;

    let mut cro = Csv::new(&["case", "degree", "angle", "directional_area", "crofton", "crofton_stderr", "relative_gap"]);
    let fine = MeshOptions {
        cells: cfg.crofton_cells,
        ..mesh_opts
    };
    for i in 0..cfg.crofton_polynomials {
        let mut r = rng::substream(seed ^ 0xc0f, i as u64);
        let p = random_polynomial(2, 4, &mut r);
        let angle: f64 = r.random_range(0.0..PI);
        let v = [angle.cos(), angle.sin()];
        let mesh = polysurf::mesh_zero_set(&p, &square, fine)?;
        let area = polysurf::directional_area(&mesh, &v);
        let batches = cfg.crofton_batches.max(1);
        let vals = (0..batches)
            .map(|_| polysurf::crofton_root_oracle(&p, &square, &v, 1000, r.random()).map(|c| c.value))
            .collect::<kbl_core::Result<Vec<f64>>>()?;
        let k = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let var = if k > 1.0 {
            vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let gap = if area > 0.0 { rel(mean, area) } else { mean.abs() };
        if gap > 0.03 {
            failures.push(format!("Crofton case {i}: mesh {area} vs lines {mean}"));
        }
        cro.row(&[i.to_string(), "4".into(), f(angle), f(area), f(mean), f((var / k).sqrt()), f(gap)]);
    }
    cro.write(cli, "crofton.csv")?;

    let mut bis = Csv::new(&["case", "degree", "a", "b", "fraction_stderr", "lhs", "rhs", "holds"]);
    for i in 0..cfg.bisection_polynomials {
        let mut r = rng::substream(seed ^ 0xb15, i as u64);
        let deg = r.random_range(1..=cfg.max_degree.max(1));
        let p = random_polynomial(2, deg, &mut r);
        let c = polysurf::bisection_area_check(&p, mesh_opts, samples, r.random())?;
        if !c.holds {
            failures.push(format!("bisection case {i}: {} < {}", c.lhs, c.rhs));
        }
        bis.row(&[
            i.to_string(),
            deg.to_string(),
            f(c.a),
            f(c.b),
            f(c.stderr),
            f(c.lhs),
            f(c.rhs),
            c.holds.to_string(),
        ]);
    }
    bis.write(cli, "bisection.csv")?;

    let mut p0 = Csv::new(&["R", "degree", "expected_degree", "cubes", "min_seminorm"]);
    let mut cubes = Csv::new(&["R", "cube", "min_seminorm"]);
    let dirs = linalg::sphere_directions(2, cfg.p0_directions);
    for &big_r in &cfg.p0_radii {
        let p = polysurf::build_p0(big_r, 2)?;
        let want = 2 * half_integer_count(big_r);
        let sigma = PolynomialMixture::delta(p.clone())?;
        let grid = DyadicGrid::new(2, big_r)?;
        let mut worst = f64::INFINITY;
        for (ci, corner) in grid.corners().iter().enumerate() {
            let mu = polysurf::mixture_normal_measure(&sigma, &grid.cube(ci), mesh_opts)?;
            let s = SeminormBall::new(&mu)?;
            let mut low = f64::INFINITY;
            for v in &dirs {
                low = low.min(s.eval(v)?);
            }
            worst = worst.min(low);
            let c: Vec<String> = corner.iter().map(|z| z.to_string()).collect();
            cubes.row(&[f(big_r), c.join(" "), f(low)]);
        }
        if p.degree() != want {
            failures.push(format!("p0 at R {big_r}: degree {} vs {want}", p.degree()));
        }
        if !(worst >= cfg.p0_floor) {
            failures.push(format!("p0 at R {big_r}: min seminorm {worst}"));
        }
        p0.row(&[f(big_r), p.degree().to_string(), want.to_string(), grid.len().to_string(), f(worst)]);
    }
    p0.write(cli, "p0.csv")?;
    cubes.write(cli, "p0_cubes.csv")?;

    if let Some(path) = &cfg.mesh {
        let pj: PolynomialJson = kbl_core::io::read_json(&out::input_path(cli, path))?;
        let p = pj.build()?;
        let m = polysurf::mesh_zero_set(
            &p,
            &Cube::centered(p.dim(), cfg.mesh_side),
            MeshOptions {
                cells: cfg.mesh_cells,
                check_convergence: true,
            },
        )?;
        out::write(cli, "mesh.csv", &m.to_csv())?;
    }
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}
