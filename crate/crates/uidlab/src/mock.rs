//! A deterministic `scorer/1` process for tests. The stub score is the token
//! overlap of the hypothesis with the reference: clipped unigram matches over
//! the number of reference tokens. Failure modes are switched on by options.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use clap::Args;
use uidlab_core::metrics::token_overlap;

use crate::scorer::protocol::{Handshake, ScoreRequest, ScoreResponse, PROTOCOL};

#[derive(Debug, Clone, Args)]
pub struct MockOptions {
    #[arg(long, default_value = "mock-stub")]
    pub name: String,
    /// Protocol string sent in the handshake.
    #[arg(long, default_value = PROTOCOL)]
    pub protocol: String,
    #[arg(long)]
    pub needs_source: bool,
    /// Advertise `needs_reference: false`; the source stands in for a
    /// missing reference.
    #[arg(long)]
    pub no_reference: bool,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    /// Score every request with this value.
    #[arg(long)]
    pub constant: Option<f64>,
    /// Answer each burst of buffered requests in reverse order.
    #[arg(long)]
    pub reverse: bool,
    /// Write a non-JSON line instead of the n-th response (1-based).
    #[arg(long)]
    pub malformed_at: Option<u64>,
    /// Exit with status 3 on receiving the n-th request (1-based).
    #[arg(long)]
    pub crash_at: Option<u64>,
    /// With `--crash-at`, crash only when this file does not exist yet, and
    /// create it. Lets a respawned process succeed.
    #[arg(long)]
    pub crash_once: Option<PathBuf>,
    /// Sleep before each response.
    #[arg(long)]
    pub delay_ms: Option<u64>,
}

impl Default for MockOptions {
    fn default() -> Self {
        Self {
            name: "mock-stub".into(),
            protocol: PROTOCOL.into(),
            needs_source: false,
            no_reference: false,
            batch: 16,
            constant: None,
            reverse: false,
            malformed_at: None,
            crash_at: None,
            crash_once: None,
            delay_ms: None,
        }
    }
}

/// The stub score for one request.
pub fn stub_score(options: &MockOptions, request: &ScoreRequest) -> Result<f64, String> {
    if options.needs_source && request.src.is_none() {
        return Err("missing src".into());
    }
    let reference = match (&request.reference, options.no_reference) {
        (Some(r), _) => r,
        (None, true) => request.src.as_ref().ok_or("missing ref and src")?,
        (None, false) => return Err("missing ref".into()),
    };
    if let Some(c) = options.constant {
        return Ok(c);
    }
    token_overlap(&request.hyp, reference).map_err(|e| e.to_string())
}

/// Exit status requested by a crash option.
pub const CRASH_STATUS: i32 = 3;

/// Runs the protocol until `input` closes. Returns `Some(status)` when a
/// crash option fired.
pub fn serve<R: Read, W: Write>(options: &MockOptions, input: R, mut output: W) -> io::Result<Option<i32>> {
    let handshake = Handshake {
        protocol: options.protocol.clone(),
        name: options.name.clone(),
        needs_source: options.needs_source,
        needs_reference: !options.no_reference,
        batch: options.batch.max(1),
    };
    writeln!(output, "{}", serde_json::to_string(&handshake)?)?;
    output.flush()?;

    let mut input = BufReader::new(input);
    let mut received = 0u64;
    let mut sent = 0u64;
    let mut pending: Vec<String> = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let text = line.trim_end_matches(['\n', '\r']);
        if text.is_empty() {
            continue;
        }
        received += 1;
        if options.crash_at == Some(received) {
            let fire = match &options.crash_once {
                Some(marker) if marker.exists() => false,
                Some(marker) => {
                    std::fs::write(marker, b"crashed\n")?;
                    true
                }
                None => true,
            };
            if fire {
                return Ok(Some(CRASH_STATUS));
            }
        }
        let response = match serde_json::from_str::<ScoreRequest>(text) {
            Ok(req) => match stub_score(options, &req) {
                Ok(score) => ScoreResponse::Score { id: req.id, score },
                Err(error) => ScoreResponse::Error { id: req.id, error },
            },
            Err(e) => {
                eprintln!("mock-scorer: ignoring unparsable request: {e}");
                continue;
            }
        };
        pending.push(serde_json::to_string(&response)?);

        if !options.reverse || input.buffer().is_empty() {
            if options.reverse {
                pending.reverse();
            }
            for out in pending.drain(..) {
                if let Some(ms) = options.delay_ms {
                    thread::sleep(Duration::from_millis(ms));
                }
                sent += 1;
                if options.malformed_at == Some(sent) {
                    writeln!(output, "this is not json")?;
                } else {
                    writeln!(output, "{out}")?;
                }
            }
            output.flush()?;
        }
    }
    Ok(None)
}
