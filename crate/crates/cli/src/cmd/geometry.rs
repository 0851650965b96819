use rand::Rng;
use serde::Deserialize;

use kbl_core::bl::LinearSubspace;
use kbl_core::exterior::GradedMeasure;
use kbl_core::geometry::{self, JohnOptions, SeminormBall, SymmetricPolytope};
use kbl_core::rng;

use crate::out::{self, f, Csv};
use crate::{Cli, CmdResult, ConfigError, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    john: usize,
    slice_pairs: usize,
    wedge_measures: usize,
    /// Smallest accepted `|μ^∧2| vol 𝔹_μ` over the random measures.
    wedge_floor: f64,
    sandwich_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            john: 50,
            slice_pairs: 200,
            wedge_measures: 50,
            wedge_floor: 0.1,
            sandwich_tol: 1e-3,
        }
    }
}

/// Random grade-one measure on the plane with a bounded ball.
fn bounded_measure(r: &mut rng::Stream) -> Result<GradedMeasure, ConfigError> {
    loop {
        let atoms: Vec<(Vec<f64>, f64)> = (0..r.random_range(2..=5))
            .map(|_| (rng::unit_vec(r, 2), r.random_range(0.1..2.0)))
            .collect();
        let mu = GradedMeasure::from_directions(2, &atoms)?;
        if SeminormBall::new(&mu)?.is_bounded() {
            return Ok(mu);
        }
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.expect("checked by caller");
    let samples = cli.samples.unwrap_or(geometry::DEFAULT_SAMPLES);
    let mut failures = Vec::new();

    let mut john = Csv::new(&["case", "n", "facets", "inner", "outer", "sqrt_n", "holds"]);
    for i in 0..cfg.john {
        let mut r = rng::substream(seed, i as u64);
        let n = 2 + i % 2;
        let m = r.random_range(n..=n + 4);
        let k = SymmetricPolytope::random(n, m, r.random())?;
        let e = geometry::john_ellipsoid(&k, JohnOptions::default())?;
        let s = geometry::john_sandwich(&k, &e, 4000);
        let holds = s.holds(n, cfg.sandwich_tol);
        if !holds {
            failures.push(format!("John case {i}: inner {} outer {}", s.inner, s.outer));
        }
        john.row(&[
            i.to_string(),
            n.to_string(),
            m.to_string(),
            f(s.inner),
            f(s.outer),
            f((n as f64).sqrt()),
            holds.to_string(),
        ]);
    }
    john.write(cli, "john.csv")?;

    let l1 = SeminormBall::from_directions(2, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)])?;
    let vis = geometry::visibility(&l1, samples, seed)?;
    if (vis - 0.5).abs() > 0.005 {
        failures.push(format!("visibility of the l1 measure is {vis}, expected 1/2"));
    }
    let mut v = Csv::new(&["measure", "visibility"]);
    v.row(&["l1".into(), f(vis)]);
    v.write(cli, "visibility.csv")?;

    let mut slice = Csv::new(&["case", "n", "k", "lhs", "rhs", "rhs_stderr_rel", "holds"]);
    for i in 0..cfg.slice_pairs {
        let mut r = rng::substream(seed ^ 0x51ce, i as u64);
        let n = 2 + i % 2;
        let k = if r.random::<bool>() { 1 } else { n - 1 };
        let body = SymmetricPolytope::random(n, r.random_range(n..=n + 4), r.random())?;
        let rows: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(&mut r, n)).collect();
        let t = LinearSubspace::from_rows(n, &rows)?;
        let c = geometry::slice_projection_check(&body, &t, samples, r.random())?;
        if !c.holds {
            failures.push(format!("slice/projection case {i}: {} > {}", c.lhs, c.rhs));
        }
        slice.row(&[
            i.to_string(),
            n.to_string(),
            k.to_string(),
            f(c.lhs),
            f(c.rhs),
            f(c.rel_err),
            c.holds.to_string(),
        ]);
    }
    slice.write(cli, "slice_projection.csv")?;

    let mut wedge = Csv::new(&["case", "atoms", "product", "product_stderr_rel"]);
    let mut floor = f64::INFINITY;
    for i in 0..cfg.wedge_measures {
        let mut r = rng::substream(seed ^ 0x3d9e, i as u64);
        let mu = bounded_measure(&mut r)?;
        let c = geometry::wedge_visibility_check(&mu, samples, r.random())?;
        floor = floor.min(c.rhs);
        wedge.row(&[i.to_string(), mu.len().to_string(), f(c.rhs), f(c.rel_err)]);
    }
    wedge.write(cli, "wedge_visibility.csv")?;
    if cfg.wedge_measures > 0 && !(floor >= cfg.wedge_floor) {
        failures.push(format!("wedge/visibility product floor {floor} below {}", cfg.wedge_floor));
    }
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}
