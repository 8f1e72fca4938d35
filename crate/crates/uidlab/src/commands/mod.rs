//! Subcommand implementations. Each takes the merged configuration and
//! writes its outputs under the output directory.

pub mod compare;
pub mod correlate;
pub mod ga;
pub mod infonce;
pub mod mbr;
pub mod measure;

use std::path::{Path, PathBuf};
use std::time::Duration;

use uidlab_core::scoring::ScorerRegistry;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{write_jsonl, ErrorRecord};
use crate::scorer::{connect, HttpOptions, ProcessOptions, ScorerSpec};

/// Everything a command needs besides its input paths.
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub registry: ScorerRegistry,
}

impl Context {
    /// Built-in metrics only, no external scorers.
    pub fn local(config: RunConfig, out: impl Into<PathBuf>) -> Self {
        Self {
            config,
            out: out.into(),
            registry: ScorerRegistry::with_builtins(),
        }
    }

    /// Connects every configured scorer; any handshake failure is fatal.
    pub fn connect(config: RunConfig, out: impl Into<PathBuf>) -> Result<Self, CliError> {
        let mut registry = ScorerRegistry::with_builtins();
        let process = process_options(&config);
        let http = http_options(&config);
        for raw in &config.scorers {
            let spec: ScorerSpec = raw.parse().map_err(|source| CliError::Scorer {
                id: raw.clone(),
                source,
            })?;
            let (id, handle) = connect(&spec, &process, &http).map_err(|source| CliError::Scorer {
                id: spec.id.clone().unwrap_or_else(|| raw.clone()),
                source,
            })?;
            registry.register(id, handle);
        }
        Ok(Self {
            config,
            out: out.into(),
            registry,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub fn process_options(config: &RunConfig) -> ProcessOptions {
    ProcessOptions {
        timeout: Duration::from_secs_f64(config.scorer_options.timeout_secs),
        respawn: config.scorer_options.respawn,
    }
}

pub fn http_options(config: &RunConfig) -> HttpOptions {
    HttpOptions {
        timeout: Duration::from_secs_f64(config.scorer_options.timeout_secs),
        bearer_token: config.scorer_options.http_token.clone(),
        ..HttpOptions::default()
    }
}

/// What a command did: record and error counts plus the files it wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub command: &'static str,
    pub records: usize,
    pub errors: usize,
    pub outputs: Vec<PathBuf>,
}

impl Summary {
    /// The one-line report printed by the CLI.
    pub fn line(&self) -> String {
        format!("{}: {} records, {} errors", self.command, self.records, self.errors)
    }
}

pub(crate) fn write_errors(path: &Path, errors: &[ErrorRecord]) -> Result<(), CliError> {
    write_jsonl(path, errors)
}
