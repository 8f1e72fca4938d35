use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;
use uidlab_core::measures::{bits_to_nats, SurprisalSequence};
use uidlab_core::scoring::{ScoreItem, ScorerError, SegmentScorer};

use super::protocol::{HttpItem, HttpScoreRequest, HttpScoreResponse, SurprisalRequest, SurprisalResponse, SurprisalUnit};
use super::{AdapterError, DEFAULT_TIMEOUT};

type Result<T> = std::result::Result<T, AdapterError>;

#[derive(Debug, Clone)]
pub struct HttpOptions {
    pub timeout: Duration,
    /// Sent as `Authorization: Bearer <token>` when set.
    pub bearer_token: Option<String>,
    pub needs_source: bool,
    pub needs_reference: bool,
}

impl Default for HttpOptions {
    fn default() -> Self {
        Self {
            timeout: DEFAULT_TIMEOUT,
            bearer_token: None,
            needs_source: false,
            needs_reference: false,
        }
    }
}

/// Client for an endpoint serving `POST /score` and `POST /surprisal`.
/// Only plain `http://` URLs are supported.
pub struct HttpScorer {
    base: String,
    agent: ureq::Agent,
    options: HttpOptions,
}

impl HttpScorer {
    pub fn new(base_url: &str, options: HttpOptions) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(options.timeout))
            .build();
        Self {
            base: base_url.trim_end_matches('/').to_owned(),
            agent: config.into(),
            options,
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R> {
        let url = format!("{}{}", self.base, path);
        let mut request = self.agent.post(&url);
        if let Some(token) = &self.options.bearer_token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        let map = |e: ureq::Error| match e {
            ureq::Error::Timeout(_) => AdapterError::Timeout(self.options.timeout),
            ureq::Error::Json(e) => AdapterError::SchemaError(e.to_string()),
            other => AdapterError::Http(format!("{url}: {other}")),
        };
        let mut response = request.send_json(body).map_err(map)?;
        response.body_mut().read_json::<R>().map_err(map)
    }

    pub fn score(&self, items: &[ScoreItem<'_>]) -> Result<Vec<f64>> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let body = HttpScoreRequest {
            items: items
                .iter()
                .map(|i| HttpItem {
                    hyp: i.hyp.to_owned(),
                    src: i.src.map(str::to_owned),
                    reference: i.reference.map(str::to_owned),
                })
                .collect(),
        };
        let response: HttpScoreResponse = self.post("/score", &body)?;
        if response.scores.len() != items.len() {
            return Err(AdapterError::SchemaError(format!(
                "{} scores for {} items",
                response.scores.len(),
                items.len()
            )));
        }
        Ok(response.scores)
    }

    /// One surprisal sequence (in nats) per text, with ids `0`, `1`, ...
    pub fn fetch_surprisals<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<SurprisalSequence<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = SurprisalRequest {
            texts: texts.iter().map(|t| t.as_ref().to_owned()).collect(),
        };
        let response: SurprisalResponse = self.post("/surprisal", &body)?;
        parse_surprisals(response, texts.len())
    }
}

fn parse_surprisals(response: SurprisalResponse, expected: usize) -> Result<Vec<SurprisalSequence<f64>>> {
    if response.tokens.len() != expected || response.surprisals.len() != expected {
        return Err(AdapterError::SchemaError(format!(
            "expected {expected} sequences, got {} token lists and {} surprisal lists",
            response.tokens.len(),
            response.surprisals.len()
        )));
    }
    response
        .tokens
        .into_iter()
        .zip(response.surprisals)
        .enumerate()
        .map(|(i, (tokens, values))| {
            if tokens.len() != values.len() {
                return Err(AdapterError::SchemaError(format!(
                    "text {i}: {} tokens but {} surprisals",
                    tokens.len(),
                    values.len()
                )));
            }
            let values = match response.unit {
                SurprisalUnit::Nats => values,
                SurprisalUnit::Bits => values.into_iter().map(bits_to_nats).collect(),
            };
            SurprisalSequence::new(i.to_string(), tokens, values, None)
                .map_err(|e| AdapterError::SchemaError(format!("text {i}: {e}")))
        })
        .collect()
}

/// Fetches surprisals from `endpoint` with default options.
pub fn fetch_surprisals<S: AsRef<str>>(endpoint: &str, texts: &[S], options: &HttpOptions) -> Result<Vec<SurprisalSequence<f64>>> {
    HttpScorer::new(endpoint, options.clone()).fetch_surprisals(texts)
}

impl SegmentScorer for HttpScorer {
    fn needs_source(&self) -> bool {
        self.options.needs_source
    }

    fn needs_reference(&self) -> bool {
        self.options.needs_reference
    }

    fn score_batch(&self, items: &[ScoreItem<'_>]) -> std::result::Result<Vec<f64>, ScorerError> {
        self.score(items).map_err(ScorerError::external)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn response(tokens: Vec<Vec<&str>>, surprisals: Vec<Vec<f64>>, unit: SurprisalUnit) -> SurprisalResponse {
        SurprisalResponse {
            tokens: tokens
                .into_iter()
                .map(|t| t.into_iter().map(str::to_owned).collect())
                .collect(),
            surprisals,
            unit,
        }
    }

    #[test]
    fn bits_are_converted() {
        let r = response(vec![vec!["a", "b"]], vec![vec![1.0, 2.0]], SurprisalUnit::Bits);
        let seqs = parse_surprisals(r, 1).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(seqs[0].surprisals(), &[ln2, 2.0 * ln2]);
        assert_eq!(seqs[0].tokens(), &["a", "b"]);
    }

    #[test]
    fn length_mismatch_is_schema_error() {
        let r = response(vec![vec!["a", "b"]], vec![vec![1.0]], SurprisalUnit::Nats);
        assert!(matches!(parse_surprisals(r, 1), Err(AdapterError::SchemaError(_))));
        let r = response(vec![vec!["a"]], vec![vec![1.0]], SurprisalUnit::Nats);
        assert!(matches!(parse_surprisals(r, 2), Err(AdapterError::SchemaError(_))));
    }

    #[test]
    fn empty_input_makes_no_request() {
        let s = HttpScorer::new("http://127.0.0.1:1", HttpOptions::default());
        assert!(s.fetch_surprisals::<&str>(&[]).unwrap().is_empty());
        assert!(s.score(&[]).unwrap().is_empty());
    }
}
