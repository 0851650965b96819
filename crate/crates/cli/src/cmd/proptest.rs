use serde::{Deserialize, Serialize};

use kbl_core::suites::{self, SuiteOptions, SuiteResult};

use crate::out::{self, Csv};
use crate::{Cli, CmdResult, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Config {
    budget: usize,
    /// Self-test: replace every tolerance so that each suite must fail.
    inject_bad_tolerance: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            budget: 20,
            inject_bad_tolerance: false,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    budget: usize,
    passed: bool,
    suites: &'a [SuiteResult],
}

pub fn run(cli: &Cli) -> CmdResult {
    let cfg: Config = out::config(cli)?;
    let seed = cli.seed.expect("checked by caller");
    let budget = cfg.budget;
    let res = suites::run_suites(SuiteOptions {
        budget,
        seed,
        inject_bad_tolerance: cfg.inject_bad_tolerance,
    });
    let passed = res.iter().all(|s| s.passed());
    let mut csv = Csv::new(&["suite", "cases", "failures", "first_failure"]);
    for s in &res {
        let detail = s.detail.clone().unwrap_or_default().replace([',', '\n'], ";");
        csv.row(&[s.name.clone(), s.cases.to_string(), s.failures.to_string(), detail]);
    }
    csv.write(cli, "suites.csv")?;
    out::write_json(
        cli,
        "summary.json",
        &Summary {
            seed,
            budget,
            passed,
            suites: &res,
        },
    )?;
    Ok(if passed {
        Outcome::Pass
    } else {
        Outcome::Fail(res.iter().filter(|s| !s.passed()).map(|s| format!("suite {}: {:?}", s.name, s.detail)).collect())
    })
}
