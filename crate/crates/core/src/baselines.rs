//! Comparison rewriters behind one interface: copy, normalizer, round-trip
//! translation, privacy-rescored sampling, prompted paraphrasing, external
//! processes and trained policies.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::normalize;
use crate::error::{Error, Result};
use crate::generator::{Decoding, Policy, TinyPolicy};
use crate::scorers::external::{rewrite_via, ExternalProcess};
use crate::scorers::{cosine, Embedder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewriterKind {
    Copy,
    Normalizer,
    Roundtrip,
    Rescored,
    Prompt,
    External,
    Policy,
}

/// Text in, exactly one text out. Sampling rewriters draw from `rng`, so a
/// seeded `rng` makes every rewriter deterministic.
pub trait Rewriter: Send + Sync {
    fn id(&self) -> &str;
    fn kind(&self) -> RewriterKind;
    fn rewrite(&self, x: &str, rng: &mut dyn RngCore) -> Result<String>;
    fn concurrent_safe(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct CopyRewriter {
    pub id: String,
}

impl Default for CopyRewriter {
    fn default() -> Self {
        CopyRewriter { id: "copy".into() }
    }
}

impl Rewriter for CopyRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::Copy
    }
    fn rewrite(&self, x: &str, _: &mut dyn RngCore) -> Result<String> {
        Ok(x.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct NormalizerRewriter {
    pub id: String,
    pub lowercase: bool,
}

impl Default for NormalizerRewriter {
    fn default() -> Self {
        NormalizerRewriter {
            id: "normalizer".into(),
            lowercase: true,
        }
    }
}

impl Rewriter for NormalizerRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::Normalizer
    }
    fn rewrite(&self, x: &str, _: &mut dyn RngCore) -> Result<String> {
        Ok(normalize(x, self.lowercase))
    }
}

/// Machine translation between language codes.
pub trait Translator: Send + Sync {
    fn id(&self) -> &str;
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String>;
}

/// Letter-shift cipher keyed per language; a stand-in for translation that
/// round-trips exactly. `en` has shift 0.
#[derive(Debug, Clone, Default)]
pub struct CipherTranslator;

impl CipherTranslator {
    fn shift(lang: &str) -> u8 {
        match lang {
            "en" => 0,
            "de" => 7,
            other => (crate::text::fnv1a(other.as_bytes()) % 25 + 1) as u8,
        }
    }
}

fn rotate(c: char, by: u8) -> char {
    let rot = |base: u8| (((c as u8 - base + by) % 26) + base) as char;
    match c {
        'a'..='z' => rot(b'a'),
        'A'..='Z' => rot(b'A'),
        _ => c,
    }
}

impl Translator for CipherTranslator {
    fn id(&self) -> &str {
        "stub-cipher"
    }
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String> {
        let by = (26 + Self::shift(target) - Self::shift(source)) % 26;
        Ok(text.chars().map(|c| rotate(c, by)).collect())
    }
}

pub const STOPWORDS: [&str; 10] = ["the", "a", "an", "of", "to", "and", "in", "is", "it", "that"];

/// Drops the first stopword when translating out of English; otherwise the
/// identity. Output tokens are joined with single spaces.
#[derive(Debug, Clone, Default)]
pub struct LossyTranslator;

impl Translator for LossyTranslator {
    fn id(&self) -> &str {
        "stub-lossy"
    }
    fn translate(&self, text: &str, source: &str, _target: &str) -> Result<String> {
        if source != "en" {
            return Ok(text.to_string());
        }
        let mut dropped = false;
        let kept: Vec<&str> = text
            .split_whitespace()
            .filter(|w| {
                if !dropped && STOPWORDS.contains(&w.to_lowercase().as_str()) {
                    dropped = true;
                    false
                } else {
                    true
                }
            })
            .collect();
        Ok(kept.join(" "))
    }
}

/// Translation over a `{"op":"translate","text","source","target"}` →
/// `{"text"}` JSON-lines subprocess.
pub struct ExternalTranslator {
    pub process: ExternalProcess,
}

impl Translator for ExternalTranslator {
    fn id(&self) -> &str {
        self.process.id()
    }
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String> {
        let reply: serde_json::Value = self
            .process
            .call(&json!({"op": "translate", "text": text, "source": source, "target": target}))?;
        reply
            .get("text")
            .and_then(|t| t.as_str())
            .map(str::to_owned)
            .ok_or_else(|| Error::BackendUnavailable {
                backend_id: self.process.id().to_string(),
                reason: "reply has no \"text\" field".into(),
            })
    }
}

pub fn default_pivot_chain() -> Vec<String> {
    vec!["en".into(), "de".into(), "en".into()]
}

pub struct RoundTripRewriter {
    pub id: String,
    pub translator: Arc<dyn Translator>,
    /// Languages visited in order, e.g. `en → de → en`.
    pub pivots: Vec<String>,
}

impl Rewriter for RoundTripRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::Roundtrip
    }
    fn rewrite(&self, x: &str, _: &mut dyn RngCore) -> Result<String> {
        if self.pivots.len() < 2 {
            return Err(Error::Config(format!("rewriter {}: pivot chain needs two languages", self.id)));
        }
        let mut text = x.to_string();
        for w in self.pivots.windows(2) {
            text = self.translator.translate(&text, &w[0], &w[1])?;
        }
        Ok(text)
    }
}

/// Index of the largest distance; the first one wins ties.
pub fn most_private(distances: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &d) in distances.iter().enumerate() {
        if best.is_none_or(|b| d > distances[b]) {
            best = Some(i);
        }
    }
    best
}

/// Draws `m` rewrites from a base rewriter and keeps the one farthest from
/// the input in authorship-embedding space.
pub struct RescoredRewriter {
    pub id: String,
    pub base: Arc<dyn Rewriter>,
    pub m: usize,
    pub embedder: Arc<dyn Embedder>,
}

impl Rewriter for RescoredRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::Rescored
    }
    fn rewrite(&self, x: &str, rng: &mut dyn RngCore) -> Result<String> {
        let samples = (0..self.m.max(1))
            .map(|_| self.base.rewrite(x, rng))
            .collect::<Result<Vec<_>>>()?;
        let mut texts: Vec<&str> = vec![x];
        texts.extend(samples.iter().map(String::as_str));
        let e = self.embedder.embed(&texts)?;
        let distances = e[1..]
            .iter()
            .map(|s| cosine(&e[0].vector, &s.vector).map(|c| 1.0 - c.value))
            .collect::<Result<Vec<_>>>()?;
        let i = most_private(&distances).expect("m >= 1");
        Ok(samples.into_iter().nth(i).expect("index in range"))
    }
    fn concurrent_safe(&self) -> bool {
        self.base.concurrent_safe() && self.embedder.concurrent_safe()
    }
}

pub const PROMPT_TEMPLATE: &str = "Passage: {x}\nParaphrase the passage in a simple neutral style.\nRewrite: ";

pub fn fill_template(template: &str, x: &str) -> String {
    template.replace("{x}", x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PromptDecoding {
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for PromptDecoding {
    fn default() -> Self {
        PromptDecoding {
            temperature: 0.7,
            top_p: 1.0,
        }
    }
}

/// A completion model: prompt in, text up to end-of-sequence out.
pub trait PromptBackend: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &str, decoding: PromptDecoding, rng: &mut dyn RngCore) -> Result<String>;
}

fn passage_of(prompt: &str) -> &str {
    let start = prompt.find("Passage: ").map_or(0, |i| i + "Passage: ".len());
    let rest = &prompt[start..];
    rest.find("\nParaphrase").map_or(rest, |end| &rest[..end])
}

/// Returns the passage unchanged.
#[derive(Debug, Clone, Default)]
pub struct EchoBackend;

impl PromptBackend for EchoBackend {
    fn id(&self) -> &str {
        "stub-echo"
    }
    fn complete(&self, prompt: &str, _: PromptDecoding, _: &mut dyn RngCore) -> Result<String> {
        Ok(passage_of(prompt).to_string())
    }
}

/// Degenerate backend: repeats the passage's first word once per passage
/// word.
#[derive(Debug, Clone, Default)]
pub struct RepeatingBackend;

impl PromptBackend for RepeatingBackend {
    fn id(&self) -> &str {
        "stub-repeat"
    }
    fn complete(&self, prompt: &str, _: PromptDecoding, _: &mut dyn RngCore) -> Result<String> {
        let words: Vec<&str> = passage_of(prompt).split_whitespace().collect();
        Ok(words.first().map_or(String::new(), |w| vec![*w; words.len()].join(" ")))
    }
}

/// `{"op":"complete","prompt","temperature","top_p"}` → `{"text"}`.
pub struct ExternalPromptBackend {
    pub process: ExternalProcess,
}

impl PromptBackend for ExternalPromptBackend {
    fn id(&self) -> &str {
        self.process.id()
    }
    fn complete(&self, prompt: &str, d: PromptDecoding, _: &mut dyn RngCore) -> Result<String> {
        let reply: serde_json::Value = self.process.call(&json!({
            "op": "complete", "prompt": prompt, "temperature": d.temperature, "top_p": d.top_p
        }))?;
        reply
            .get("text")
            .and_then(|t| t.as_str())
            .map(str::to_owned)
            .ok_or_else(|| Error::BackendUnavailable {
                backend_id: self.process.id().to_string(),
                reason: "reply has no \"text\" field".into(),
            })
    }
}

pub struct PromptRewriter {
    pub id: String,
    pub backend: Arc<dyn PromptBackend>,
    pub template: String,
    pub decoding: PromptDecoding,
}

impl Rewriter for PromptRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::Prompt
    }
    // Degenerate completions (repetitions, empty text) are returned as-is;
    // measuring them is the bench's job.
    fn rewrite(&self, x: &str, rng: &mut dyn RngCore) -> Result<String> {
        self.backend.complete(&fill_template(&self.template, x), self.decoding, rng)
    }
}

/// A rewriter living in another process, speaking `{text}` JSON lines.
pub struct ExternalRewriter {
    pub id: String,
    pub process: ExternalProcess,
}

impl Rewriter for ExternalRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::External
    }
    fn rewrite(&self, x: &str, _: &mut dyn RngCore) -> Result<String> {
        rewrite_via(&self.process, x)
    }
    fn concurrent_safe(&self) -> bool {
        false
    }
}

/// Samples one rewrite from a policy.
pub struct PolicyRewriter {
    pub id: String,
    pub policy: Arc<dyn Policy>,
}

impl Rewriter for PolicyRewriter {
    fn id(&self) -> &str {
        &self.id
    }
    fn kind(&self) -> RewriterKind {
        RewriterKind::Policy
    }
    fn rewrite(&self, x: &str, rng: &mut dyn RngCore) -> Result<String> {
        let mut c = self.policy.sample(x, 1, rng)?;
        Ok(c.pop().map(|c| c.text).unwrap_or_default())
    }
}

/// One `rewriters.<id>` table of a bench configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RewriterSpec {
    Copy,
    Normalizer {
        #[serde(default = "yes")]
        lowercase: bool,
    },
    Roundtrip {
        /// `stub-cipher`, `stub-lossy`, or `external` (with `command`).
        translator: String,
        #[serde(default = "default_pivot_chain")]
        pivots: Vec<String>,
        #[serde(default)]
        command: Vec<String>,
    },
    Rescored {
        base: String,
        #[serde(default = "four")]
        m: usize,
    },
    Prompt {
        /// `stub-echo`, `stub-repeat`, or `external` (with `command`).
        backend: String,
        #[serde(default = "default_template")]
        template: String,
        #[serde(default)]
        decoding: PromptDecoding,
        #[serde(default)]
        command: Vec<String>,
    },
    External {
        command: Vec<String>,
    },
    Policy {
        /// A serialized tiny policy (as written by `train`).
        path: PathBuf,
        #[serde(default)]
        decoding: Option<Decoding>,
    },
}

fn yes() -> bool {
    true
}
fn four() -> usize {
    4
}
fn default_template() -> String {
    PROMPT_TEMPLATE.to_string()
}

fn external(id: &str, command: &[String]) -> Result<ExternalProcess> {
    ExternalProcess::new(id, command.to_vec(), 0)
}

/// Instantiates every configured rewriter, ordered by id. `embedder` scores
/// privacy for rescored rewriters.
pub fn build_rewriters(
    specs: &BTreeMap<String, RewriterSpec>,
    embedder: Arc<dyn Embedder>,
) -> Result<Vec<Arc<dyn Rewriter>>> {
    let mut built: BTreeMap<String, Arc<dyn Rewriter>> = BTreeMap::new();
    for id in specs.keys() {
        build_one(id, specs, &embedder, &mut built, &mut BTreeSet::new())?;
    }
    Ok(built.into_values().collect())
}

fn build_one(
    id: &str,
    specs: &BTreeMap<String, RewriterSpec>,
    embedder: &Arc<dyn Embedder>,
    built: &mut BTreeMap<String, Arc<dyn Rewriter>>,
    visiting: &mut BTreeSet<String>,
) -> Result<Arc<dyn Rewriter>> {
    if let Some(r) = built.get(id) {
        return Ok(r.clone());
    }
    let spec = specs
        .get(id)
        .ok_or_else(|| Error::Config(format!("unknown rewriter {id:?}")))?;
    if !visiting.insert(id.to_string()) {
        return Err(Error::Config(format!("rewriter {id:?} refers to itself")));
    }
    let id_s = id.to_string();
    let r: Arc<dyn Rewriter> = match spec {
        RewriterSpec::Copy => Arc::new(CopyRewriter { id: id_s }),
        RewriterSpec::Normalizer { lowercase } => Arc::new(NormalizerRewriter {
            id: id_s,
            lowercase: *lowercase,
        }),
        RewriterSpec::Roundtrip {
            translator,
            pivots,
            command,
        } => {
            let translator: Arc<dyn Translator> = match translator.as_str() {
                "stub-cipher" => Arc::new(CipherTranslator),
                "stub-lossy" => Arc::new(LossyTranslator),
                "external" => Arc::new(ExternalTranslator {
                    process: external(id, command)?,
                }),
                other => return Err(Error::UnknownBackend(other.to_string())),
            };
            Arc::new(RoundTripRewriter {
                id: id_s,
                translator,
                pivots: pivots.clone(),
            })
        }
        RewriterSpec::Rescored { base, m } => {
            let base = build_one(base, specs, embedder, built, visiting)?;
            Arc::new(RescoredRewriter {
                id: id_s,
                base,
                m: *m,
                embedder: embedder.clone(),
            })
        }
        RewriterSpec::Prompt {
            backend,
            template,
            decoding,
            command,
        } => {
            let backend: Arc<dyn PromptBackend> = match backend.as_str() {
                "stub-echo" => Arc::new(EchoBackend),
                "stub-repeat" => Arc::new(RepeatingBackend),
                "external" => Arc::new(ExternalPromptBackend {
                    process: external(id, command)?,
                }),
                other => return Err(Error::UnknownBackend(other.to_string())),
            };
            Arc::new(PromptRewriter {
                id: id_s,
                backend,
                template: template.clone(),
                decoding: *decoding,
            })
        }
        RewriterSpec::External { command } => Arc::new(ExternalRewriter {
            id: id_s,
            process: external(id, command)?,
        }),
        RewriterSpec::Policy { path, decoding } => {
            let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut policy: TinyPolicy = serde_json::from_str(&raw)?;
            if let Some(d) = decoding {
                policy.set_decoding(*d);
            }
            Arc::new(PolicyRewriter {
                id: id_s,
                policy: Arc::new(policy),
            })
        }
    };
    visiting.remove(id);
    built.insert(id.to_string(), r.clone());
    Ok(r)
}
