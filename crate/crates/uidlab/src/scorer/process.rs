use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use uidlab_core::scoring::{ScoreItem, ScorerError, SegmentScorer};

use super::protocol::{Handshake, ScoreRequest, ScoreResponse, PROTOCOL};
use super::{AdapterError, DEFAULT_TIMEOUT};

type Result<T> = std::result::Result<T, AdapterError>;

#[derive(Debug, Clone)]
pub struct ProcessOptions {
    /// Deadline for the handshake and for each batch.
    pub timeout: Duration,
    /// Respawn the process once and replay the batch after a crash or
    /// timeout. A second failure is returned to the caller.
    pub respawn: bool,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        Self {
            timeout: DEFAULT_TIMEOUT,
            respawn: true,
        }
    }
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<io::Result<String>>,
}

impl Session {
    fn spawn(argv: &[String], command: &str) -> Result<Self> {
        let spawn_failure = |reason: String| AdapterError::SpawnFailure {
            command: command.to_owned(),
            reason,
        };
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| spawn_failure(e.to_string()))?;
        let stdout = child.stdout.take().ok_or_else(|| spawn_failure("no stdout pipe".into()))?;
        let stdin = child.stdin.take().ok_or_else(|| spawn_failure("no stdin pipe".into()))?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(Session {
            child,
            stdin,
            lines: rx,
        })
    }

    fn recv(&mut self, deadline: Instant, timeout: Duration) -> Result<String> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(Ok(mut line)) => {
                while line.ends_with('\n') || line.ends_with('\r') {
                    line.pop();
                }
                Ok(line)
            }
            Ok(Err(e)) => Err(AdapterError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(AdapterError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(AdapterError::ScorerCrashed {
                status: self.exit_status(),
            }),
        }
    }

    fn exit_status(&mut self) -> Option<String> {
        let deadline = Instant::now() + Duration::from_millis(500);
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => return Some(status.to_string()),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => return None,
            }
        }
    }

    fn handshake(&mut self, command: &str, timeout: Duration) -> Result<Handshake> {
        let line = match self.recv(Instant::now() + timeout, timeout) {
            Err(AdapterError::ScorerCrashed { status }) => {
                return Err(AdapterError::SpawnFailure {
                    command: command.to_owned(),
                    reason: format!(
                        "exited before the handshake{}",
                        status.map(|s| format!(" ({s})")).unwrap_or_default()
                    ),
                })
            }
            other => other?,
        };
        parse_handshake(&line)
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn parse_handshake(line: &str) -> Result<Handshake> {
    let protocol_error = |reason: String| AdapterError::ProtocolError {
        line: line.to_owned(),
        reason,
    };
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| protocol_error(e.to_string()))?;
    let protocol = value
        .get("protocol")
        .and_then(|p| p.as_str())
        .ok_or_else(|| protocol_error("handshake has no protocol field".into()))?;
    if protocol != PROTOCOL {
        return Err(AdapterError::HandshakeMismatch {
            expected: PROTOCOL.to_owned(),
            got: protocol.to_owned(),
        });
    }
    let handshake: Handshake = serde_json::from_value(value).map_err(|e| protocol_error(e.to_string()))?;
    if handshake.batch == 0 {
        return Err(protocol_error("batch limit must be at least 1".into()));
    }
    Ok(handshake)
}

struct Inner {
    session: Option<Session>,
    next_id: u64,
    respawns: usize,
}

/// A scorer child process. Requests are chunked by the batch limit from the
/// handshake and answers are put back in request order by id.
pub struct ProcessScorer {
    command: String,
    argv: Vec<String>,
    options: ProcessOptions,
    handshake: Handshake,
    inner: Mutex<Inner>,
}

impl ProcessScorer {
    /// Spawns `command` (program and arguments split on whitespace) and
    /// reads its handshake.
    pub fn connect(command: &str, options: ProcessOptions) -> Result<Self> {
        let argv: Vec<String> = command.split_whitespace().map(str::to_owned).collect();
        if argv.is_empty() {
            return Err(AdapterError::InvalidSpec(command.to_owned()));
        }
        let mut session = Session::spawn(&argv, command)?;
        let handshake = session.handshake(command, options.timeout)?;
        Ok(Self {
            command: command.to_owned(),
            argv,
            options,
            handshake,
            inner: Mutex::new(Inner {
                session: Some(session),
                next_id: 0,
                respawns: 0,
            }),
        })
    }

    pub fn handshake(&self) -> &Handshake {
        &self.handshake
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// How many times the process has been restarted.
    pub fn respawn_count(&self) -> usize {
        self.lock().respawns
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Scores `items`, returning one score per item in input order.
    pub fn score(&self, items: &[ScoreItem<'_>]) -> Result<Vec<f64>> {
        let mut inner = self.lock();
        let mut out = Vec::with_capacity(items.len());
        for chunk in items.chunks(self.handshake.batch) {
            let scores = match self.exchange(&mut inner, chunk) {
                Err(e) if e.is_transient() && self.options.respawn => {
                    inner.session = None;
                    inner.respawns += 1;
                    self.exchange(&mut inner, chunk)?
                }
                other => other?,
            };
            out.extend(scores);
        }
        Ok(out)
    }

    fn exchange(&self, inner: &mut Inner, chunk: &[ScoreItem<'_>]) -> Result<Vec<f64>> {
        if inner.session.is_none() {
            let mut session = Session::spawn(&self.argv, &self.command)?;
            session.handshake(&self.command, self.options.timeout)?;
            inner.session = Some(session);
        }
        let first_id = inner.next_id;
        inner.next_id += chunk.len() as u64;
        let result = self.exchange_on(inner.session.as_mut().expect("session present"), first_id, chunk);
        match &result {
            Ok(_) | Err(AdapterError::Rejected { .. }) => {}
            Err(_) => inner.session = None,
        }
        result
    }

    fn exchange_on(&self, session: &mut Session, first_id: u64, chunk: &[ScoreItem<'_>]) -> Result<Vec<f64>> {
        let mut payload = String::new();
        for (offset, item) in chunk.iter().enumerate() {
            let request = ScoreRequest {
                id: first_id + offset as u64,
                hyp: item.hyp.to_owned(),
                src: item.src.map(str::to_owned),
                reference: item.reference.map(str::to_owned),
            };
            payload.push_str(&serde_json::to_string(&request).expect("requests serialize"));
            payload.push('\n');
        }
        if session
            .stdin
            .write_all(payload.as_bytes())
            .and_then(|_| session.stdin.flush())
            .is_err()
        {
            return Err(AdapterError::ScorerCrashed {
                status: session.exit_status(),
            });
        }

        let deadline = Instant::now() + self.options.timeout;
        let mut pending: HashMap<u64, usize> = (0..chunk.len()).map(|i| (first_id + i as u64, i)).collect();
        let mut scores: Vec<f64> = vec![f64::NAN; chunk.len()];
        let mut rejected: Option<AdapterError> = None;
        while !pending.is_empty() {
            let line = session.recv(deadline, self.options.timeout)?;
            let response: ScoreResponse = serde_json::from_str(&line).map_err(|e| AdapterError::ProtocolError {
                line: line.clone(),
                reason: e.to_string(),
            })?;
            let slot = pending.remove(&response.id()).ok_or_else(|| AdapterError::ProtocolError {
                line: line.clone(),
                reason: "unknown or repeated id".into(),
            })?;
            match response {
                ScoreResponse::Score { score, .. } => scores[slot] = score,
                ScoreResponse::Error { id, error } => {
                    rejected.get_or_insert(AdapterError::Rejected { id, message: error });
                }
            }
        }
        match rejected {
            Some(e) => Err(e),
            None => Ok(scores),
        }
    }
}

impl SegmentScorer for ProcessScorer {
    fn needs_source(&self) -> bool {
        self.handshake.needs_source
    }

    fn needs_reference(&self) -> bool {
        self.handshake.needs_reference
    }

    fn score_batch(&self, items: &[ScoreItem<'_>]) -> std::result::Result<Vec<f64>, ScorerError> {
        for (index, item) in items.iter().enumerate() {
            if self.handshake.needs_reference && item.reference.is_none() {
                return Err(ScorerError::MissingReference { index });
            }
            if self.handshake.needs_source && item.src.is_none() {
                return Err(ScorerError::MissingSource { index });
            }
        }
        self.score(items).map_err(ScorerError::external)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handshake_parsing() {
        let ok = r#"{"protocol":"scorer/1","name":"stub","needs_source":false,"needs_reference":true,"batch":8}"#;
        let h = parse_handshake(ok).unwrap();
        assert!(h.needs_reference && !h.needs_source);
        assert_eq!(h.batch, 8);

        let v2 = r#"{"protocol":"scorer/2"}"#;
        assert!(matches!(parse_handshake(v2), Err(AdapterError::HandshakeMismatch { got, .. }) if got == "scorer/2"));
        assert!(matches!(parse_handshake("hello"), Err(AdapterError::ProtocolError { line, .. }) if line == "hello"));
        let zero = ok.replace("\"batch\":8", "\"batch\":0");
        assert!(matches!(parse_handshake(&zero), Err(AdapterError::ProtocolError { .. })));
    }

    #[test]
    fn missing_program_is_spawn_failure() {
        let err = ProcessScorer::connect("/nonexistent/scorer-binary --x", ProcessOptions::default()).err().unwrap();
        assert!(matches!(err, AdapterError::SpawnFailure { .. }), "{err}");
    }
}
