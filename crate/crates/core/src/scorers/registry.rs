//! Resolves [`ScorerBackendSpec`] entries from a structured config into
//! backend instances.
//!
//! Known ids: `stub-char-ngram`, `stub-bag-of-words`,
//! `stub-rule-acceptability`, `stub-uniform`, `stub-deterministic`,
//! `stub-token-recall`, and `external:<name>` (requires `config.command`).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::external::ExternalProcess;
use super::stub::*;
use super::{AcceptabilityJudge, CoverageScorer, Embedder, LikelihoodModel, Scorers, DEFAULT_MAX_TOKENS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Authorship,
    Semantic,
    Acceptability,
    Likelihood,
    Coverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerBackendSpec {
    pub kind: BackendKind,
    pub backend_id: String,
    #[serde(default)]
    pub config: BTreeMap<String, Value>,
}

impl ScorerBackendSpec {
    pub fn new(kind: BackendKind, backend_id: impl Into<String>) -> Self {
        ScorerBackendSpec {
            kind,
            backend_id: backend_id.into(),
            config: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.config.insert(key.to_string(), value.into());
        self
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.config.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .filter(|n| *n > 0)
                .map(|n| n as usize)
                .ok_or_else(|| Error::Config(format!("{}.{key} must be a positive integer", self.backend_id))),
        }
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.config.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::Config(format!("{}.{key} must hold strings", self.backend_id)))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(Error::Config(format!("{}.{key} must be an array", self.backend_id))),
        }
    }

    fn external(&self) -> Result<Option<ExternalProcess>> {
        if !self.backend_id.starts_with("external") {
            return Ok(None);
        }
        let command = self
            .strings("command")?
            .ok_or_else(|| Error::Config(format!("{} needs config.command", self.backend_id)))?;
        let dim = self.usize_or("dim", 1)?;
        ExternalProcess::new(self.backend_id.clone(), command, dim).map(Some)
    }

    fn expect_kind(&self, kinds: &[BackendKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "backend {} declared as {:?}, expected one of {kinds:?}",
                self.backend_id, self.kind
            )))
        }
    }

    pub fn load_embedder(&self) -> Result<Arc<dyn Embedder>> {
        self.expect_kind(&[BackendKind::Authorship, BackendKind::Semantic])?;
        if let Some(ext) = self.external()? {
            return Ok(Arc::new(ext));
        }
        let max_tokens = self.usize_or("max_tokens", DEFAULT_MAX_TOKENS)?;
        match self.backend_id.as_str() {
            "stub-char-ngram" => Ok(Arc::new(HashedCharNgramEmbedder {
                n: self.usize_or("n", 3)?,
                dim: self.usize_or("dim", 256)?,
                max_tokens,
            })),
            "stub-bag-of-words" => Ok(Arc::new(HashedBagOfWordsEmbedder {
                dim: self.usize_or("dim", 1024)?,
                max_tokens,
            })),
            other => Err(Error::UnknownBackend(other.to_string())),
        }
    }

    pub fn load_acceptability(&self) -> Result<Arc<dyn AcceptabilityJudge>> {
        self.expect_kind(&[BackendKind::Acceptability])?;
        if let Some(ext) = self.external()? {
            return Ok(Arc::new(ext));
        }
        match self.backend_id.as_str() {
            "stub-rule-acceptability" => Ok(Arc::new(RuleAcceptability)),
            other => Err(Error::UnknownBackend(other.to_string())),
        }
    }

    pub fn load_likelihood(&self) -> Result<Arc<dyn LikelihoodModel>> {
        self.expect_kind(&[BackendKind::Likelihood])?;
        if let Some(ext) = self.external()? {
            return Ok(Arc::new(ext));
        }
        match self.backend_id.as_str() {
            "stub-uniform" => Ok(match self.strings("vocabulary")? {
                Some(v) if !v.is_empty() => Arc::new(UniformLikelihood::closed(v)),
                Some(_) => return Err(Error::Config("stub-uniform vocabulary is empty".into())),
                None => Arc::new(UniformLikelihood::open(self.usize_or("vocab_size", 1000)?)),
            }),
            "stub-deterministic" => Ok(Arc::new(DeterministicLikelihood {
                continuation: self.strings("continuation")?,
            })),
            other => Err(Error::UnknownBackend(other.to_string())),
        }
    }

    pub fn load_coverage(&self) -> Result<Arc<dyn CoverageScorer>> {
        self.expect_kind(&[BackendKind::Coverage])?;
        match self.backend_id.as_str() {
            "stub-token-recall" => Ok(Arc::new(TokenRecallCoverage)),
            other => Err(Error::UnknownBackend(other.to_string())),
        }
    }
}

/// The `[scorers]` table of a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorersConfig {
    pub authorship: ScorerBackendSpec,
    pub semantic: ScorerBackendSpec,
    pub acceptability: ScorerBackendSpec,
    pub likelihood: ScorerBackendSpec,
    #[serde(default)]
    pub coverage: Option<ScorerBackendSpec>,
}

impl Default for ScorersConfig {
    fn default() -> Self {
        ScorersConfig {
            authorship: ScorerBackendSpec::new(BackendKind::Authorship, "stub-char-ngram"),
            semantic: ScorerBackendSpec::new(BackendKind::Semantic, "stub-bag-of-words"),
            acceptability: ScorerBackendSpec::new(BackendKind::Acceptability, "stub-rule-acceptability"),
            likelihood: ScorerBackendSpec::new(BackendKind::Likelihood, "stub-uniform"),
            coverage: Some(ScorerBackendSpec::new(BackendKind::Coverage, "stub-token-recall")),
        }
    }
}

impl ScorersConfig {
    pub fn load(&self) -> Result<Scorers> {
        Ok(Scorers {
            authorship: self.authorship.load_embedder()?,
            semantic: self.semantic.load_embedder()?,
            acceptability: self.acceptability.load_acceptability()?,
            likelihood: self.likelihood.load_likelihood()?,
            coverage: self.coverage.as_ref().map(|c| c.load_coverage()).transpose()?,
        })
    }
}
