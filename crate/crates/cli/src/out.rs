//! Config loading and deterministic file output.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Cli, ConfigError};

/// The subcommand's config, or its defaults when `--config` is absent.
pub fn config<T: DeserializeOwned + Default>(cli: &Cli) -> Result<T, ConfigError> {
    match &cli.config {
        None => Ok(T::default()),
        Some(p) => Ok(kbl_core::io::read_json(p)?),
    }
}

/// Resolve an input path relative to the config file's directory.
pub fn input_path(cli: &Cli, p: &str) -> std::path::PathBuf {
    let path = Path::new(p);
    match (&cli.config, path.is_absolute()) {
        (Some(c), false) => c.parent().unwrap_or(Path::new(".")).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn f(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" ")
}

/// Small CSV builder; cells are joined with commas as given.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn write(&self, cli: &Cli, name: &str) -> Result<(), ConfigError> {
        write(cli, name, &self.buf)
    }
}

pub fn write(cli: &Cli, name: &str, text: &str) -> Result<(), ConfigError> {
    let path = cli.out.join(name);
    std::fs::write(&path, text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(cli: &Cli, name: &str, v: &T) -> Result<(), ConfigError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| ConfigError(e.to_string()))?;
    write(cli, name, &(text + "\n"))
}
