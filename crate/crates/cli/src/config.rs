use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid configuration or inputs.
    Usage(String),
    /// A run or check that did not succeed.
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn failed(e: impl fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

/// Reads the JSON config at `path`, or `T::default()` when there is none.
pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        Some(p) => load(p),
        None => Ok(T::default()),
    }
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

pub fn require<T: DeserializeOwned>(path: Option<&Path>, what: &str) -> CliResult<T> {
    let path = path.ok_or_else(|| usage(format!("{what} needs --config <path>")))?;
    load(path)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(failed)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| failed(format!("cannot write {}: {e}", path.display())))
}

/// Creates the output directory and writes the configuration actually used, so a
/// rerun with `--config <echo>` reproduces the outputs.
pub fn echo_config(out_dir: &Path, command: &str, value: &impl Serialize) -> CliResult {
    fs::create_dir_all(out_dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", out_dir.display())))?;
    write_json(&out_dir.join(format!("{command}.config.json")), value)
}
