use rand::Rng;
use serde::Deserialize;

use kbl_core::fremlin::FremlinOptions;
use kbl_core::harness::{self, AffineFamily, KblReport};
use kbl_core::io::FamilyJson;

use crate::out::{self, f, Csv};
use crate::{Cli, CmdResult, ConfigError, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    /// Family JSON files; when empty the grid-lines instance is used.
    families: Vec<String>,
    /// Ambient dimension, needed only when every family is empty.
    n: Option<usize>,
    /// Lines per direction of the grid-lines instance.
    grid_lines: usize,
    /// Radius of the cube collection; defaults to `grid_lines`.
    radius: Option<f64>,
    /// Exponents for the Fremlin report; defaults to `1/(m-1)` each.
    exponents: Option<Vec<f64>>,
    lw: bool,
    fremlin: bool,
    fremlin_restarts: usize,
    sweep_sizes: Vec<usize>,
    sweep_seeds: usize,
    sweep_offset: f64,
    sweep_radius: f64,
    /// Largest allowed `max/min - 1` of the mean sweep ratios.
    max_drift: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            families: Vec::new(),
            n: None,
            grid_lines: 8,
            radius: None,
            exponents: None,
            lw: true,
            fremlin: true,
            fremlin_restarts: 4,
            sweep_sizes: vec![10, 40, 160],
            sweep_seeds: 3,
            sweep_offset: 8.0,
            sweep_radius: 24.0,
            max_drift: 0.2,
        }
    }
}

fn emit(cli: &Cli, stem: &str, rep: &KblReport) -> Result<(), ConfigError> {
    out::write(cli, &format!("{stem}.csv"), &rep.to_csv())?;
    out::write_json(cli, &format!("{stem}.json"), rep)
}

fn load(cli: &Cli, cfg: &Config) -> Result<Vec<AffineFamily>, ConfigError> {
    let raw: Vec<FamilyJson> = cfg
        .families
        .iter()
        .map(|p| kbl_core::io::read_json(&out::input_path(cli, p)))
        .collect::<kbl_core::Result<_>>()?;
    let n = raw
        .iter()
        .flat_map(|fj| fj.members.first())
        .map(|m| m.point.len())
        .next()
        .or(cfg.n)
        .ok_or_else(|| ConfigError("all families are empty: set `n`".into()))?;
    Ok(raw.iter().map(|fj| fj.build(n)).collect::<kbl_core::Result<_>>()?)
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.expect("checked by caller");
    let mut failures = Vec::new();
    let grid = cfg.families.is_empty();
    let families = if grid {
        harness::grid_lines_instance(cfg.grid_lines)?
    } else {
        load(cli, &cfg)?
    };
    let radius = cfg.radius.unwrap_or(cfg.grid_lines as f64);
    let m = families.len();
    if cfg.lw {
        let rep = harness::lw_kakeya(&families, radius)?;
        emit(cli, "report_lw", &rep)?;
        if grid {
            match rep.ratio {
                Some(r) if (r - 1.0).abs() <= 0.1 => {}
                other => failures.push(format!("grid-lines ratio {other:?}, expected 1 within 10%")),
            }
        }
    }
    if cfg.fremlin && m >= 2 {
        let p = cfg.exponents.clone().unwrap_or_else(|| vec![1.0 / (m as f64 - 1.0); m]);
        let opts = FremlinOptions {
            restarts: cfg.fremlin_restarts,
            seed,
            ..Default::default()
        };
        let rep = harness::lhs_fremlin(&families, &p, radius, opts)?;
        emit(cli, "report_fremlin", &rep)?;
    }

    if !cfg.sweep_sizes.is_empty() {
        if cfg.sweep_seeds == 0 {
            return Err(ConfigError("sweep_seeds must be positive".into()));
        }
        let mut runs = Csv::new(&["size", "seed", "lhs", "rhs", "ratio"]);
        let mut sweep = Csv::new(&["size", "seeds", "ratio_mean", "ratio_stderr"]);
        let mut means = Vec::new();
        for &size in &cfg.sweep_sizes {
            let mut ratios = Vec::new();
            for s in 0..cfg.sweep_seeds {
                let sub: u64 = kbl_core::rng::substream(seed, (size * 1000 + s) as u64).random();
                let fam = harness::random_line_families(size, cfg.sweep_offset, sub)?;
                let rep = harness::lw_kakeya(&fam, cfg.sweep_radius)?;
                let ratio = rep.ratio.unwrap_or(f64::NAN);
                runs.row(&[size.to_string(), sub.to_string(), f(rep.lhs), f(rep.rhs), f(ratio)]);
                ratios.push(ratio);
            }
            let k = ratios.len() as f64;
            let mean = ratios.iter().sum::<f64>() / k;
            let var = if k > 1.0 {
                ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            sweep.row(&[size.to_string(), ratios.len().to_string(), f(mean), f((var / k).sqrt())]);
            means.push(mean);
        }
        runs.write(cli, "sweep_runs.csv")?;
        sweep.write(cli, "ratio_sweep.csv")?;
        let hi = means.iter().cloned().fold(f64::MIN, f64::max);
        let lo = means.iter().cloned().fold(f64::MAX, f64::min);
        let drift = hi / lo - 1.0;
        if !(drift <= cfg.max_drift) {
            failures.push(format!("sweep ratio drift {drift:.4} exceeds {}", cfg.max_drift));
        }
    }
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}
