//! Flat key-value experiment configuration.
//!
//! Hand-editable, diff-friendly format: one `key = value` per line, `#`
//! comments, list values comma-separated. Example:
//!
//! ```text
//! kind = uniform-grid
//! n = 1000
//! eta = 0.2, 0.4, 0.6, 0.8, 1.0
//! p = 0.05, 0.25, 0.5, 0.75, 1.0
//! trials = 25
//! methods = unnormalized, normalized
//! seed = 42
//! out = results
//! ```

use std::path::PathBuf;

use thiserror::Error;

use crate::ero::GroundTruthKind;
use crate::ranking::Method;

#[derive(Debug, Error)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: GroundTruthKind,
    pub n_list: Vec<usize>,
    pub eta_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
    /// 0 means "use available parallelism".
    pub workers: usize,
    /// Relative eigensolver tolerance.
    pub tol: f64,
    /// 0 means the solver default (10n + 1000).
    pub max_iter: usize,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: GroundTruthKind::UniformGrid,
            n_list: vec![],
            eta_list: vec![],
            p_list: vec![],
            trials: 25,
            methods: vec![Method::Unnormalized, Method::Normalized],
            master_seed: 42,
            output_dir: PathBuf::from("results"),
            emit_plots: true,
            workers: 0,
            tol: 1e-8,
            max_iter: 0,
            gamma_shape: 1.0,
            gamma_scale: 1.0,
        }
    }
}

impl ExperimentConfig {
    /// Parse the flat key-value format. Unknown keys and malformed values are
    /// reported with their line number.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (ix, raw) in text.lines().enumerate() {
            let line_no = ix + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "kind" => {
                    cfg.kind = match value {
                        "uniform-grid" => GroundTruthKind::UniformGrid,
                        "sorted-gamma" => GroundTruthKind::SortedGamma,
                        other => return Err(err(line_no, format!("unknown kind `{other}`"))),
                    }
                }
                "n" => cfg.n_list = parse_list(value, line_no, "n")?,
                "eta" => cfg.eta_list = parse_list(value, line_no, "eta")?,
                "p" => cfg.p_list = parse_list(value, line_no, "p")?,
                "trials" => cfg.trials = parse_one(value, line_no, "trials")?,
                "methods" => {
                    let mut methods = Vec::new();
                    for item in value.split(',') {
                        match item.trim() {
                            "unnormalized" => methods.push(Method::Unnormalized),
                            "normalized" => methods.push(Method::Normalized),
                            other => {
                                return Err(err(line_no, format!("unknown method `{other}`")))
                            }
                        }
                    }
                    cfg.methods = methods;
                }
                "seed" => cfg.master_seed = parse_one(value, line_no, "seed")?,
                "out" => cfg.output_dir = PathBuf::from(value),
                "plots" => {
                    cfg.emit_plots = match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        other => return Err(err(line_no, format!("bad boolean `{other}`"))),
                    }
                }
                "workers" => cfg.workers = parse_one(value, line_no, "workers")?,
                "tol" => cfg.tol = parse_one(value, line_no, "tol")?,
                "max_iter" => cfg.max_iter = parse_one(value, line_no, "max_iter")?,
                "gamma_shape" => cfg.gamma_shape = parse_one(value, line_no, "gamma_shape")?,
                "gamma_scale" => cfg.gamma_scale = parse_one(value, line_no, "gamma_scale")?,
                other => return Err(err(line_no, format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_list.is_empty() {
            return Err(err(0, "missing `n` list"));
        }
        if self.eta_list.is_empty() {
            return Err(err(0, "missing `eta` list"));
        }
        if self.p_list.is_empty() {
            return Err(err(0, "missing `p` list"));
        }
        if self.trials < 1 {
            return Err(err(0, "trials must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(err(0, "methods list is empty"));
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(err(0, "every n must be at least 2"));
        }
        for &eta in &self.eta_list {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(err(0, format!("eta {eta} outside (0, 1]")));
            }
        }
        for &p in &self.p_list {
            if !(p > 0.0 && p <= 1.0) {
                return Err(err(0, format!("p {p} outside (0, 1]")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(err(0, "tol must be positive"));
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(
    value: &str,
    line: usize,
    key: &str,
) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| err(line, format!("bad value `{}` for `{key}`", item.trim())))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| err(line, format!("bad value `{value}` for `{key}`")))
}
