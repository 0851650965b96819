use rayon::prelude::*;
use serde::Deserialize;

use kbl_core::bl::{self, BLDatum, Budget, LinearSubspace, SubspaceLattice, TruncationWindow};
use kbl_core::io::DatumJson;

use super::fit;
use crate::out::{self, f, Csv};
use crate::{Cli, CmdResult, ConfigError, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    /// Inline datum, or `path` to a datum JSON file.
    #[serde(default)]
    datum: Option<DatumJson>,
    #[serde(default)]
    path: Option<String>,
    /// Outer scales for the R sweep at r = 1.
    #[serde(default)]
    big_r: Option<Vec<f64>>,
    /// Inner scales for the r sweep at R = 1.
    #[serde(default)]
    r: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    data: Vec<Entry>,
    /// Random lattice members added on top of the closure.
    lattice_extra: usize,
    lattice_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        let entry = |name: &str, d: DatumJson| Entry {
            name: name.into(),
            datum: Some(d),
            path: None,
            big_r: None,
            r: None,
        };
        Self {
            data: vec![
                entry("point-half", DatumJson { n: 1, subspaces: vec![vec![]], exponents: vec![0.5] }),
                entry("point-two", DatumJson { n: 1, subspaces: vec![vec![]], exponents: vec![2.0] }),
                entry(
                    "lw-axes",
                    DatumJson {
                        n: 2,
                        subspaces: vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]],
                        exponents: vec![1.0, 1.0],
                    },
                ),
            ],
            lattice_extra: 2,
            lattice_cap: bl::DEFAULT_LATTICE_CAP,
        }
    }
}

fn powers_of_two(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

fn default_big_r(n: usize) -> Vec<f64> {
    match n {
        1 => powers_of_two(2, 8),
        2 => powers_of_two(2, 5),
        _ => powers_of_two(1, 3),
    }
}

fn default_r(n: usize) -> Vec<f64> {
    match n {
        1 => powers_of_two(-6, -1),
        2 => powers_of_two(-5, -1),
        _ => powers_of_two(-3, -1),
    }
}

fn estimate(d: &BLDatum, r: f64, big_r: f64) -> kbl_core::Result<(f64, String)> {
    let w = TruncationWindow::new(r, big_r)?;
    let e = bl::bl_truncated_estimate(d, &w, Budget::default())?;
    Ok((e.value, e.family))
}

fn describe(s: &LinearSubspace) -> String {
    format!("dim {}", s.dim())
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.unwrap_or(0);
    let mut table = Csv::new(&[
        "name",
        "n",
        "m",
        "scaling_exponent",
        "kappa",
        "kappa_argmax",
        "kappa_tilde",
        "kappa_tilde_argmin",
        "lattice_size",
        "lattice_capped",
        "kappa_hat",
        "kappa_hat_residual",
        "kappa_tilde_hat",
        "kappa_tilde_hat_residual",
        "identity_holds",
    ]);
    let mut sweep = Csv::new(&["name", "axis", "r", "R", "estimate", "input_family"]);
    let mut failures = Vec::new();
    for (i, e) in cfg.data.iter().enumerate() {
        let dj = match (&e.datum, &e.path) {
            (Some(d), None) => d.clone(),
            (None, Some(p)) => kbl_core::io::read_json(&out::input_path(cli, p))?,
            _ => return Err(ConfigError(format!("entry `{}`: give exactly one of datum, path", e.name))),
        };
        let (d, _) = dj.build()?;
        let n = d.dim();
        let lat = SubspaceLattice::generate(&d, cfg.lattice_cap, cfg.lattice_extra, seed ^ i as u64);
        let k = bl::kappa(&d, &lat);
        let kt = bl::kappa_tilde(&d, &lat);
        let s = d.scaling_exponent();
        let ok = (k.value + kt.value - s).abs() <= 1e-9 && k.value >= -1e-12 && kt.value <= 1e-12;
        if !ok {
            failures.push(format!("{}: kappa {} + kappa~ {} vs {}", e.name, k.value, kt.value, s));
        }

        let big_rs = e.big_r.clone().unwrap_or_else(|| default_big_r(n));
        let rs = e.r.clone().unwrap_or_else(|| default_r(n));
        let along_r: Vec<(f64, String)> = big_rs
            .par_iter()
            .map(|&br| estimate(&d, 1.0, br))
            .collect::<kbl_core::Result<_>>()?;
        let along_small: Vec<(f64, String)> = rs
            .par_iter()
            .map(|&r| estimate(&d, r, 1.0))
            .collect::<kbl_core::Result<_>>()?;
        for (br, (v, fam)) in big_rs.iter().zip(&along_r) {
            sweep.row(&[e.name.clone(), "R".into(), f(1.0), f(*br), f(*v), fam.clone()]);
        }
        for (r, (v, fam)) in rs.iter().zip(&along_small) {
            sweep.row(&[e.name.clone(), "r".into(), f(*r), f(1.0), f(*v), fam.clone()]);
        }
        let logs = |xs: &[(f64, String)]| xs.iter().map(|x| x.0.ln()).collect::<Vec<_>>();
        let lr: Vec<f64> = big_rs.iter().map(|x| x.ln()).collect();
        let linv: Vec<f64> = rs.iter().map(|x| -x.ln()).collect();
        let (kh, kres) = fit(&lr, &logs(&along_r));
        let (sl, sres) = fit(&linv, &logs(&along_small));
        table.row(&[
            e.name.clone(),
            n.to_string(),
            d.len().to_string(),
            f(s),
            f(k.value),
            describe(&k.subspace),
            f(kt.value),
            describe(&kt.subspace),
            lat.len().to_string(),
            lat.capped().to_string(),
            f(kh),
            f(kres),
            f(0.0 - sl),
            f(sres),
            ok.to_string(),
        ]);
    }
    table.write(cli, "exponents.csv")?;
    sweep.write(cli, "scale_sweep.csv")?;
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}
