use std::str::FromStr;
use std::sync::Arc;

use uidlab_core::scoring::SegmentScorer;

use super::{AdapterError, HttpOptions, HttpScorer, ProcessOptions, ProcessScorer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    /// Whitespace-separated program and arguments.
    Command(String),
    Http(String),
}

/// A parsed `--scorer` value: `[id=]cmd:<command>` or `[id=]http:<url>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScorerSpec {
    pub id: Option<String>,
    pub transport: Transport,
}

fn valid_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl FromStr for ScorerSpec {
    type Err = AdapterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || AdapterError::InvalidSpec(s.to_owned());
        let (id, rest) = match s.split_once('=') {
            Some((id, rest)) if valid_id(id) => (Some(id.to_owned()), rest),
            _ => (None, s),
        };
        let transport = if let Some(cmd) = rest.strip_prefix("cmd:") {
            if cmd.trim().is_empty() {
                return Err(invalid());
            }
            Transport::Command(cmd.trim().to_owned())
        } else if let Some(url) = rest.strip_prefix("http:") {
            // Accept both `http:host:port` and `http:http://host:port`.
            let url = if url.starts_with("http://") || url.starts_with("https://") {
                url.to_owned()
            } else {
                format!("http://{}", url.trim_start_matches('/'))
            };
            if url.len() <= "http://".len() {
                return Err(invalid());
            }
            Transport::Http(url.trim_end_matches('/').to_owned())
        } else {
            return Err(invalid());
        };
        Ok(ScorerSpec { id, transport })
    }
}

impl ScorerSpec {
    /// Id under which the scorer is registered. Process scorers default to
    /// the name from their handshake, HTTP scorers to `http`.
    pub fn default_id(&self) -> &str {
        self.id.as_deref().unwrap_or("http")
    }
}

/// Connects to the scorer and returns its registry id with the handle.
pub fn connect(
    spec: &ScorerSpec,
    process: &ProcessOptions,
    http: &HttpOptions,
) -> Result<(String, Arc<dyn SegmentScorer>), AdapterError> {
    match &spec.transport {
        Transport::Command(cmd) => {
            let handle = ProcessScorer::connect(cmd, process.clone())?;
            let id = spec.id.clone().unwrap_or_else(|| handle.handshake().name.clone());
            Ok((id, Arc::new(handle)))
        }
        Transport::Http(url) => {
            let handle = HttpScorer::new(url, http.clone());
            Ok((spec.default_id().to_owned(), Arc::new(handle)))
        }
    }
}
