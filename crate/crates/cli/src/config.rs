//! Job configuration: defaults, a TOML file, and command-line overrides,
//! merged in that order of increasing precedence.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Failure;

pub const DEFAULT_MAX_WORD_LEN: usize = 5;
pub const DEFAULT_LEN_CAP: usize = 8;
pub const DEFAULT_SEED: u64 = 7;

/// The optional fields a configuration file may set.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub c: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub max_word_len: Option<usize>,
    pub max_len_cap: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Failure::config(format!("cannot parse {}: {e}", path.display())))
}

/// A fully resolved job: every field has a value and the shape constraints
/// (matching rank and coefficient count, word-length cap) hold.
#[derive(Debug, Clone, Serialize)]
pub struct JobConfig {
    pub n: usize,
    pub c: Vec<f64>,
    pub lambda: f64,
    pub max_word_len: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl JobConfig {
    /// The tolerance for a named check, or the built-in default.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

/// Command-line values that may override the file configuration.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n: Option<usize>,
    pub c: Vec<f64>,
    pub lambda: Option<f64>,
    pub max_len: Option<usize>,
    pub seed: Option<u64>,
    pub tols: Vec<(String, f64)>,
}

pub fn resolve(file: FileConfig, over: &Overrides) -> Result<JobConfig, Failure> {
    let c_given = !over.c.is_empty() || file.c.is_some();
    let c_flag = if over.c.is_empty() { None } else { Some(over.c.clone()) };
    let n_opt = over.n.or(file.n);
    let c_opt = c_flag.or(file.c);

    let (n, c) = match (n_opt, c_opt) {
        (Some(n), Some(c)) => {
            if c.len() != n {
                return Err(Failure::config(format!(
                    "n = {n} but {} coefficients were given",
                    c.len()
                )));
            }
            (n, c)
        }
        (Some(n), None) => (n, vec![1.0; n]),
        (None, Some(c)) => (c.len(), c),
        (None, None) => (2, vec![1.0, 1.0]),
    };
    if n == 0 {
        return Err(Failure::config("rank n must be at least 1".into()));
    }

    let lambda = match over.lambda.or(file.lambda) {
        Some(l) => l,
        None if c_given || n_opt.is_some() => {
            return Err(Failure::config(
                "lambda is required when n or c is specified".into(),
            ))
        }
        None => 1.0,
    };

    let cap = file.max_len_cap.unwrap_or(DEFAULT_LEN_CAP);
    let max_word_len = over.max_len.or(file.max_word_len).unwrap_or(DEFAULT_MAX_WORD_LEN);
    if max_word_len > cap {
        return Err(Failure::config(format!(
            "max word length {max_word_len} exceeds the safety cap {cap} \
             (word counts grow as (2n-1)^L; raise max_len_cap in the config file to override)"
        )));
    }

    let mut tolerances = file.tolerances;
    for (name, value) in &over.tols {
        tolerances.insert(name.clone(), *value);
    }
    for (name, value) in &tolerances {
        if !value.is_finite() || *value < 0.0 {
            return Err(Failure::config(format!(
                "tolerance {name} must be a finite nonnegative number, got {value}"
            )));
        }
    }

    Ok(JobConfig {
        n,
        c,
        lambda,
        max_word_len,
        seed: over.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        tolerances,
    })
}
