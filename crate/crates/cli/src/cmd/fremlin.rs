use rand::Rng;
use serde::Deserialize;

use kbl_core::fremlin::{self, FremlinOptions, NonnegTensor};
use kbl_core::io::TensorJson;
use kbl_core::{rng, Error};

use crate::out::{self, f, list, Csv};
use crate::{Cli, CmdResult, ConfigError, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Case {
    name: String,
    #[serde(default)]
    tensor: Option<TensorJson>,
    #[serde(default)]
    path: Option<String>,
    q: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    cases: Vec<Case>,
    /// Random tensors checked against the `L^m` lower bound.
    random: usize,
    /// Random rank-one tensors checked against the cross-norm.
    rank_one: usize,
    iters: usize,
    restarts: usize,
    bruteforce_grid: usize,
}

impl Default for Config {
    fn default() -> Self {
        let t = |entries: Vec<f64>| TensorJson {
            shape: vec![2, 2],
            entries,
            weights: None,
        };
        Self {
            cases: vec![
                Case {
                    name: "identity".into(),
                    tensor: Some(t(vec![1.0, 0.0, 0.0, 1.0])),
                    path: None,
                    q: vec![2.0, 2.0],
                },
                Case {
                    name: "diag-1-4".into(),
                    tensor: Some(t(vec![1.0, 0.0, 0.0, 4.0])),
                    path: None,
                    q: vec![2.0, 2.0],
                },
            ],
            random: 100,
            rank_one: 20,
            iters: 500,
            restarts: 16,
            bruteforce_grid: 13,
        }
    }
}

fn shape_str(t: &NonnegTensor) -> String {
    t.shape().iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x")
}

fn random_tensor(r: &mut rng::Stream, order: usize) -> Result<NonnegTensor, ConfigError> {
    let shape: Vec<usize> = (0..order).map(|_| r.random_range(1..=3)).collect();
    let size: usize = shape.iter().product();
    let entries = (0..size)
        .map(|_| if r.random::<f64>() < 0.25 { 0.0 } else { r.random() })
        .collect();
    Ok(NonnegTensor::from_shape(&shape, entries)?)
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.expect("checked by caller");
    let opts = FremlinOptions {
        iters: cfg.iters,
        restarts: cfg.restarts,
        seed,
    };
    let mut failures = Vec::new();

    let mut cases = Csv::new(&["case", "shape", "q", "value", "bruteforce", "relative_gap"]);
    for c in &cfg.cases {
        let tj = match (&c.tensor, &c.path) {
            (Some(t), None) => t.clone(),
            (None, Some(p)) => kbl_core::io::read_json(&out::input_path(cli, p))?,
            _ => return Err(ConfigError(format!("case `{}`: give exactly one of tensor, path", c.name))),
        };
        let t = tj.build()?;
        let v = fremlin::fremlin_norm(&t, &c.q, opts)?.value;
        let brute = match fremlin::fremlin_bruteforce(&t, &c.q, cfg.bruteforce_grid) {
            Ok(b) => b,
            Err(Error::SizeCap(_)) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        let gap = (v - brute) / brute;
        cases.row(&[c.name.clone(), shape_str(&t), list(&c.q), f(v), f(brute), f(gap)]);
    }
    cases.write(cli, "fremlin.csv")?;

    let mut bounds = Csv::new(&["case", "shape", "value", "lm_lower_bound", "holds"]);
    for i in 0..cfg.random {
        let mut r = rng::substream(seed, i as u64);
        let order = r.random_range(2..=3usize);
        let t = random_tensor(&mut r, order)?;
        let q = vec![order as f64; order];
        let v = fremlin::fremlin_norm(&t, &q, opts)?.value;
        let lb = fremlin::lm_lower_bound(&t, &q)?;
        let holds = v >= lb * (1.0 - 1e-9);
        if !holds {
            failures.push(format!("random case {i}: value {v} below L^m bound {lb}"));
        }
        bounds.row(&[i.to_string(), shape_str(&t), f(v), f(lb), holds.to_string()]);
    }
    bounds.write(cli, "lm_bound.csv")?;

    let mut ones = Csv::new(&["case", "shape", "value", "cross_norm", "relative_error"]);
    for i in 0..cfg.rank_one {
        let mut r = rng::substream(seed ^ 0x5eed, i as u64);
        let order = r.random_range(2..=3usize);
        let xs: Vec<Vec<f64>> = (0..order)
            .map(|_| (0..r.random_range(1..=3)).map(|_| r.random_range(0.1..2.0)).collect())
            .collect();
        let m = order as f64;
        let t = NonnegTensor::outer(&xs)?;
        let q = vec![m; order];
        let v = fremlin::fremlin_norm(&t, &q, opts)?.value;
        let want: f64 = xs
            .iter()
            .map(|x| x.iter().map(|a| a.powf(m)).sum::<f64>().powf(1.0 / m))
            .product();
        let err = (v - want).abs() / want;
        if err > 1e-6 {
            failures.push(format!("rank-one case {i}: {v} vs {want}"));
        }
        ones.row(&[i.to_string(), shape_str(&t), f(v), f(want), f(err)]);
    }
    ones.write(cli, "rank_one.csv")?;
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}
