//! Wire types of the `scorer/1` line protocol.

use serde::{Deserialize, Serialize};

pub const PROTOCOL: &str = "scorer/1";

/// First line a scorer process writes to stdout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: String,
    pub name: String,
    pub needs_source: bool,
    pub needs_reference: bool,
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: u64,
    pub hyp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

/// A response line: either a score or a per-request error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreResponse {
    Score { id: u64, score: f64 },
    Error { id: u64, error: String },
}

impl ScoreResponse {
    pub fn id(&self) -> u64 {
        match self {
            ScoreResponse::Score { id, .. } | ScoreResponse::Error { id, .. } => *id,
        }
    }
}

/// One item of an HTTP `/score` request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpItem {
    pub hyp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpScoreRequest {
    pub items: Vec<HttpItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpScoreResponse {
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurprisalRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurprisalUnit {
    Nats,
    Bits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurprisalResponse {
    pub tokens: Vec<Vec<String>>,
    pub surprisals: Vec<Vec<f64>>,
    pub unit: SurprisalUnit,
}
