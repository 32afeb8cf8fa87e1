//! Flat key=value run configuration. Command-line flags take precedence over
//! file values, which take precedence over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use sdcor::kv::read_kv;

/// Keys understood in a config file.
pub const KEYS: &[&str] = &[
    "eta",
    "lambda",
    "alpha",
    "beta",
    "seed",
    "chunks",
    "chunk_rows",
    "eps",
    "min_pts",
    "mode",
    "k",
    "minpts_upper",
    "labeled",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let values = read_kv(path)?;
        for key in values.keys() {
            if !KEYS.contains(&key.as_str()) {
                bail!(sdcor::SdcorError::invalid(format!(
                    "{}: unknown key '{key}' (known: {})",
                    path.display(),
                    KEYS.join(", ")
                )));
            }
        }
        Ok(FileConfig { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| sdcor::SdcorError::invalid(format!("config key '{key}' = '{raw}': {e}")))
                .context("reading config"),
        }
    }

    /// Flag value if given, else file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Seed used when neither a flag nor a config file gives one.
pub const SEED_ENV: &str = "SDCOR_SEED";

pub fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| sdcor::SdcorError::invalid(format!("{SEED_ENV}='{v}' is not an unsigned integer")).into()),
        Err(_) => Ok(0),
    }
}
