//! Pluggable scoring backends: authorship embeddings, semantic embeddings,
//! acceptability judgments and token likelihoods.
//!
//! Neural models plug in through [`external::ExternalProcess`] or any type
//! implementing the traits below. The stubs in [`stub`] are pure functions of
//! `(text, config)` and are what the tests and examples run against.

pub mod external;
pub mod registry;
pub mod stub;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use registry::{BackendKind, ScorerBackendSpec, ScorersConfig};

/// Truncation limit, in whitespace tokens, applied by scorer backends.
pub const DEFAULT_MAX_TOKENS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vector: Vec<f64>,
    /// Zero vector (empty or too-short input).
    #[serde(default)]
    pub degenerate: bool,
    /// Input was cut to the backend's token limit.
    #[serde(default)]
    pub truncated: bool,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

pub type AuthorshipEmbedding = Embedding;
pub type SemanticEmbedding = Embedding;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptabilityJudgment {
    pub probability: f64,
    pub label: bool,
    #[serde(default)]
    pub degenerate: bool,
}

impl AcceptabilityJudgment {
    pub fn from_probability(probability: f64) -> Self {
        let probability = probability.clamp(0.0, 1.0);
        AcceptabilityJudgment {
            probability,
            label: probability >= 0.5,
            degenerate: false,
        }
    }
}

/// A cosine value plus whether either side had zero norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub value: f64,
    pub degenerate: bool,
}

/// Cosine similarity. Zero-norm inputs give `0.0` with `degenerate` set.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<Similarity> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(Similarity {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Similarity {
        // sqrt of the product keeps cosine(v, v) exactly 1
        value: (dot / (na * nb).sqrt()).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// Text to fixed-dimension vectors. Used for both the authorship and the
/// semantic role.
pub trait Embedder: Send + Sync {
    fn backend_id(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, texts: &[&str]) -> Result<Vec<Embedding>>;
    fn concurrent_safe(&self) -> bool {
        true
    }

    fn embed_one(&self, text: &str) -> Result<Embedding> {
        let mut v = self.embed(&[text])?;
        v.pop().ok_or_else(|| Error::BackendUnavailable {
            backend_id: self.backend_id().to_string(),
            reason: "backend returned no embedding".into(),
        })
    }
}

pub trait AcceptabilityJudge: Send + Sync {
    fn backend_id(&self) -> &str;
    fn judge(&self, texts: &[&str]) -> Result<Vec<AcceptabilityJudgment>>;
    fn concurrent_safe(&self) -> bool {
        true
    }
}

/// Frozen reference language model.
pub trait LikelihoodModel: Send + Sync {
    fn backend_id(&self) -> &str;
    /// Per-token log-probabilities of `tokens` following `context`.
    fn sequence_logprob(&self, context: &str, tokens: &[&str]) -> Result<Vec<f64>>;
    fn tokenize<'a>(&self, text: &'a str) -> Vec<&'a str> {
        text.split_whitespace().collect()
    }
    fn concurrent_safe(&self) -> bool {
        true
    }
}

/// Gap-filling coverage score in `[0, 1]` of `source` given `generation`.
pub trait CoverageScorer: Send + Sync {
    fn backend_id(&self) -> &str;
    fn coverage(&self, source: &str, generation: &str) -> Result<f64>;
}

/// The full set of scoring backends a reward or bench run needs.
#[derive(Clone)]
pub struct Scorers {
    pub authorship: Arc<dyn Embedder>,
    pub semantic: Arc<dyn Embedder>,
    pub acceptability: Arc<dyn AcceptabilityJudge>,
    pub likelihood: Arc<dyn LikelihoodModel>,
    pub coverage: Option<Arc<dyn CoverageScorer>>,
}

impl Scorers {
    /// All-stub backends with default settings.
    pub fn stubs() -> Self {
        Scorers {
            authorship: Arc::new(stub::HashedCharNgramEmbedder::default()),
            semantic: Arc::new(stub::HashedBagOfWordsEmbedder::default()),
            acceptability: Arc::new(stub::RuleAcceptability),
            likelihood: Arc::new(stub::UniformLikelihood::open(1000)),
            coverage: Some(Arc::new(stub::TokenRecallCoverage)),
        }
    }

    pub fn embed_authorship(&self, texts: &[&str]) -> Result<Vec<AuthorshipEmbedding>> {
        self.authorship.embed(texts)
    }

    pub fn embed_semantic(&self, texts: &[&str]) -> Result<Vec<SemanticEmbedding>> {
        self.semantic.embed(texts)
    }

    pub fn judge_acceptability(&self, texts: &[&str]) -> Result<Vec<AcceptabilityJudgment>> {
        self.acceptability.judge(texts)
    }

    pub fn sequence_logprob(&self, context: &str, tokens: &[&str]) -> Result<Vec<f64>> {
        self.likelihood.sequence_logprob(context, tokens)
    }

    /// Backend ids, in role order. Enters report manifests.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("authorship".to_string(), self.authorship.backend_id().to_string()),
            ("semantic".to_string(), self.semantic.backend_id().to_string()),
            ("acceptability".to_string(), self.acceptability.backend_id().to_string()),
            ("likelihood".to_string(), self.likelihood.backend_id().to_string()),
        ];
        if let Some(c) = &self.coverage {
            v.push(("coverage".to_string(), c.backend_id().to_string()));
        }
        v
    }
}

impl std::fmt::Debug for Scorers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.describe()).finish()
    }
}
