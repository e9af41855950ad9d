//! Environment configuration.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use at_core::assets::Assets;
use at_core::rules::parse_rules;
use at_core::store::{DATA_DIR_ENV, DEFAULT_DATA_DIR, DEFAULT_SESSION_TTL};

pub const PORT_ENV: &str = "AT_PORT";
pub const RULES_ENV: &str = "AT_RULES";
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_RULES: &str = "config/adaptation.rules";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{PORT_ENV}={0:?} is not a port number")]
    Port(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Rules { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub data_dir: PathBuf,
    pub port: u16,
    /// Rule file given explicitly; `None` means the default location.
    pub rules: Option<PathBuf>,
    pub session_ttl: Duration,
}

impl Config {
    pub fn from_env() -> Result<Self, ConfigError> {
        let port = match env::var(PORT_ENV) {
            Ok(p) => p.parse().map_err(|_| ConfigError::Port(p))?,
            Err(_) => DEFAULT_PORT,
        };
        Ok(Config {
            data_dir: env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_DATA_DIR), PathBuf::from),
            port,
            rules: env::var_os(RULES_ENV).map(PathBuf::from),
            session_ttl: DEFAULT_SESSION_TTL,
        })
    }

    pub fn jobs_dir(&self) -> PathBuf {
        self.data_dir.join("jobs")
    }
}

/// Shipped reference data with the rule base taken from `rules`. Without an
/// explicit path the default location is used when it exists and the
/// built-in rules otherwise.
pub fn load_assets(rules: Option<&Path>) -> Result<Assets, ConfigError> {
    let path = match rules {
        Some(p) => p.to_path_buf(),
        None if Path::new(DEFAULT_RULES).is_file() => PathBuf::from(DEFAULT_RULES),
        None => return Ok(Assets::shipped()),
    };
    let text = fs::read_to_string(&path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
    let rules = parse_rules(&text).map_err(|e| ConfigError::Rules { path: path.clone(), message: e.to_string() })?;
    Ok(Assets::shipped().with_rules(rules))
}
