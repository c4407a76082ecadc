//! Out-of-process backends speaking JSON lines over stdin/stdout.
//!
//! Each call writes one request object and reads one response object:
//!
//! | operation      | request                                   | response                         |
//! |----------------|-------------------------------------------|----------------------------------|
//! | embed          | `{"op":"embed","texts":[..]}`             | `{"vectors":[[..],..]}`          |
//! | judge          | `{"op":"judge","texts":[..]}`             | `{"probabilities":[..]}`         |
//! | logprob        | `{"op":"logprob","context":..,"tokens":[..]}` | `{"logprobs":[..]}`          |
//! | rewrite        | `{"text":..}`                             | `{"text":..}`                    |
//!
//! A response may carry `{"error": "..."}` instead. Calls are serialized
//! through a mutex, so these backends report `concurrent_safe() == false`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AcceptabilityJudge, AcceptabilityJudgment, Embedder, Embedding, LikelihoodModel};
use crate::error::{Error, Result};

struct Running {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct ExternalProcess {
    backend_id: String,
    command: Vec<String>,
    dim: usize,
    process: Mutex<Option<Running>>,
}

impl std::fmt::Debug for ExternalProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalProcess")
            .field("backend_id", &self.backend_id)
            .field("command", &self.command)
            .finish()
    }
}

#[derive(Deserialize)]
struct ErrorReply {
    error: Option<String>,
}

impl ExternalProcess {
    /// `command[0]` is the program, the rest its arguments. `dim` is only
    /// meaningful for embedding backends.
    pub fn new(backend_id: impl Into<String>, command: Vec<String>, dim: usize) -> Result<Self> {
        let backend_id = backend_id.into();
        if command.is_empty() {
            return Err(Error::BackendUnavailable {
                backend_id,
                reason: "empty command".into(),
            });
        }
        Ok(ExternalProcess {
            backend_id,
            command,
            dim,
            process: Mutex::new(None),
        })
    }

    fn unavailable(&self, reason: impl std::fmt::Display) -> Error {
        Error::BackendUnavailable {
            backend_id: self.backend_id.clone(),
            reason: reason.to_string(),
        }
    }

    fn spawn(&self) -> Result<Running> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| self.unavailable(e))?;
        let stdin = child.stdin.take().ok_or_else(|| self.unavailable("no stdin"))?;
        let stdout = BufReader::new(child.stdout.take().ok_or_else(|| self.unavailable("no stdout"))?);
        Ok(Running { child, stdin, stdout })
    }

    /// One request/response round trip.
    pub fn call<Req: Serialize, Resp: DeserializeOwned>(&self, request: &Req) -> Result<Resp> {
        let mut guard = self.process.lock().map_err(|_| self.unavailable("lock poisoned"))?;
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let running = guard.as_mut().expect("spawned above");
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        let exchange = (|| -> Result<String> {
            running.stdin.write_all(line.as_bytes()).map_err(|e| self.unavailable(e))?;
            running.stdin.flush().map_err(|e| self.unavailable(e))?;
            let mut reply = String::new();
            let n = running.stdout.read_line(&mut reply).map_err(|e| self.unavailable(e))?;
            if n == 0 {
                return Err(self.unavailable("process closed its output"));
            }
            Ok(reply)
        })();
        let reply = match exchange {
            Ok(r) => r,
            Err(e) => {
                if let Some(mut r) = guard.take() {
                    let _ = r.child.kill();
                    let _ = r.child.wait();
                }
                return Err(e);
            }
        };
        if let Ok(ErrorReply { error: Some(msg) }) = serde_json::from_str::<ErrorReply>(&reply) {
            return Err(self.unavailable(msg));
        }
        serde_json::from_str(&reply).map_err(|e| self.unavailable(format!("bad reply: {e}")))
    }

    pub fn id(&self) -> &str {
        &self.backend_id
    }
}

impl Drop for ExternalProcess {
    fn drop(&mut self) {
        if let Ok(mut g) = self.process.lock() {
            if let Some(mut r) = g.take() {
                drop(r.stdin);
                let _ = r.child.wait();
            }
        }
    }
}

#[derive(Deserialize)]
struct Vectors {
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct Probabilities {
    probabilities: Vec<f64>,
}

#[derive(Deserialize)]
struct LogProbs {
    logprobs: Vec<f64>,
}

fn check_len(backend: &ExternalProcess, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(backend.unavailable(format!("expected {want} results, got {got}")));
    }
    Ok(())
}

impl Embedder for ExternalProcess {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn concurrent_safe(&self) -> bool {
        false
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        let Vectors { vectors } = self.call(&json!({"op": "embed", "texts": texts}))?;
        check_len(self, vectors.len(), texts.len())?;
        vectors
            .into_iter()
            .map(|vector| {
                if vector.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        left: vector.len(),
                        right: self.dim,
                    });
                }
                if vector.iter().any(|x| !x.is_finite()) {
                    return Err(self.unavailable("non-finite embedding"));
                }
                let degenerate = vector.iter().all(|x| *x == 0.0);
                Ok(Embedding {
                    vector,
                    degenerate,
                    truncated: false,
                })
            })
            .collect()
    }
}

impl AcceptabilityJudge for ExternalProcess {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn concurrent_safe(&self) -> bool {
        false
    }

    fn judge(&self, texts: &[&str]) -> Result<Vec<AcceptabilityJudgment>> {
        let Probabilities { probabilities } = self.call(&json!({"op": "judge", "texts": texts}))?;
        check_len(self, probabilities.len(), texts.len())?;
        Ok(probabilities
            .into_iter()
            .map(AcceptabilityJudgment::from_probability)
            .collect())
    }
}

impl LikelihoodModel for ExternalProcess {
    fn backend_id(&self) -> &str {
        &self.backend_id
    }

    fn concurrent_safe(&self) -> bool {
        false
    }

    fn sequence_logprob(&self, context: &str, tokens: &[&str]) -> Result<Vec<f64>> {
        let LogProbs { logprobs } =
            self.call(&json!({"op": "logprob", "context": context, "tokens": tokens}))?;
        check_len(self, logprobs.len(), tokens.len())?;
        if logprobs.iter().any(|x| !x.is_finite()) {
            return Err(self.unavailable("non-finite log-probability"));
        }
        Ok(logprobs)
    }
}

/// Text-in/text-out call used by external rewriters.
pub fn rewrite_via(process: &ExternalProcess, text: &str) -> Result<String> {
    let reply: Value = process.call(&json!({ "text": text }))?;
    reply
        .get("text")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| process.unavailable("reply has no \"text\" field"))
}
