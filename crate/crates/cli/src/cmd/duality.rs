use rand::Rng;
use serde::Deserialize;

use kbl_core::harness::{self, DualityReport};
use kbl_core::rng;

use crate::out::{self, f, list, Csv};
use crate::{Cli, CmdResult, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    random: usize,
    max_cubes: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            random: 50,
            max_cubes: 12,
        }
    }
}

struct Instance {
    name: String,
    g: Vec<f64>,
    m: Vec<f64>,
    p: Vec<f64>,
    degs: Vec<f64>,
    /// Hölder is an equality here.
    equality: bool,
}

fn instances(cfg: &Config, seed: u64) -> Vec<Instance> {
    let mut out = vec![
        Instance {
            name: "single-cube".into(),
            g: vec![2.5],
            m: vec![1.0],
            p: vec![1.0, 0.5],
            degs: vec![3.0, 2.0],
            equality: true,
        },
        Instance {
            name: "equal-weight".into(),
            g: vec![0.7; 6],
            m: vec![1.0 / 6.0; 6],
            p: vec![0.5, 0.5, 0.5],
            degs: vec![1.0, 4.0, 2.0],
            equality: true,
        },
    ];
    for i in 0..cfg.random {
        let mut r = rng::substream(seed, i as u64);
        let cubes = r.random_range(1..=cfg.max_cubes.max(1));
        let g: Vec<f64> = (0..cubes).map(|_| r.random_range(0.0..3.0)).collect();
        let mut m: Vec<f64> = (0..cubes).map(|_| r.random_range(0.01..1.0)).collect();
        let s: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= s);
        let fams = r.random_range(2..=3);
        let p: Vec<f64> = (0..fams).map(|_| r.random_range(0.5..1.5)).collect();
        let degs = (0..fams).map(|_| r.random_range(1..=8) as f64).collect();
        out.push(Instance {
            name: format!("random-{i}"),
            g,
            m,
            p,
            degs,
            equality: false,
        });
    }
    out
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.expect("checked by caller");
    let mut failures = Vec::new();
    let mut csv = Csv::new(&[
        "case",
        "cubes",
        "exponents",
        "degrees",
        "total_g",
        "c1",
        "product_ratio",
        "sum_ratio",
        "holder_ratio",
        "converse_holds",
        "forward_chain",
        "forward_holds",
    ]);
    for inst in instances(&cfg, seed) {
        let rep: DualityReport = harness::duality_check(&inst.g, &inst.m, &inst.p, &inst.degs)?;
        let (c, fw) = (&rep.converse, &rep.forward);
        if !(c.holds && fw.holds) {
            failures.push(format!("{}: converse {} forward {}", inst.name, c.holds, fw.holds));
        }
        if inst.equality && (c.holder_ratio - 1.0).abs() > 1e-9 {
            failures.push(format!("{}: Hölder ratio {} should be 1", inst.name, c.holder_ratio));
        }
        csv.row(&[
            inst.name.clone(),
            inst.g.len().to_string(),
            list(&inst.p),
            list(&inst.degs),
            f(rep.total_g),
            f(c.c1),
            f(c.product_ratio),
            f(c.sum_ratio),
            f(c.holder_ratio),
            c.holds.to_string(),
            list(&fw.chain),
            fw.holds.to_string(),
        ]);
    }
    csv.write(cli, "duality.csv")?;
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}
