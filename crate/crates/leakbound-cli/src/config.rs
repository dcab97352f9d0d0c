//! JSON config files mirroring the flag surface of each subcommand.
//! Field names are the flag names with underscores ("M" keeps its case);
//! unknown fields are rejected so typos fail loudly. Flags always win over
//! file values, field by field.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use leakbound::{Error, Result};

use crate::commands::{Format, WhichFigure};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::validation(format!("config {}: {e}", path.display())))
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub pmf: Option<String>,
    pub channel: Option<String>,
    pub model: Option<String>,
    #[serde(rename = "M")]
    pub alphabet: Option<usize>,
    pub alpha: Option<String>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    #[serde(rename = "M")]
    pub alphabet: Option<usize>,
    pub p: Option<String>,
    pub m: Option<u64>,
    pub mi: Option<String>,
    pub assume_hypothesis: Option<bool>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiguresConfig {
    pub which: Option<WhichFigure>,
    pub d_max: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub group: Option<String>,
    pub d: Option<usize>,
    pub model: Option<String>,
    pub channel: Option<String>,
    pub m: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}
