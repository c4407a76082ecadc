//! Deterministic CPU-only backends.

use std::collections::HashSet;

use super::{AcceptabilityJudge, AcceptabilityJudgment, CoverageScorer, Embedder, Embedding, LikelihoodModel};
use super::DEFAULT_MAX_TOKENS;
use crate::error::{Error, Result};
use crate::text::{fnv1a, l2_norm};

/// Cuts `text` to its first `max_tokens` whitespace tokens.
fn truncate(text: &str, max_tokens: usize) -> (std::borrow::Cow<'_, str>, bool) {
    let mut toks = text.split_whitespace();
    if toks.clone().nth(max_tokens).is_none() {
        return (text.into(), false);
    }
    let kept: Vec<&str> = toks.by_ref().take(max_tokens).collect();
    (kept.join(" ").into(), true)
}

fn finish(mut vector: Vec<f64>, truncated: bool) -> Embedding {
    let norm = l2_norm(&vector);
    let degenerate = norm == 0.0;
    if !degenerate {
        vector.iter_mut().for_each(|x| *x /= norm);
    }
    Embedding {
        vector,
        degenerate,
        truncated,
    }
}

/// Character n-gram counts hashed (FNV-1a of the UTF-8 n-gram, modulo
/// `dim`) and L2-normalized. Case and punctuation sensitive.
#[derive(Debug, Clone)]
pub struct HashedCharNgramEmbedder {
    pub n: usize,
    pub dim: usize,
    pub max_tokens: usize,
}

impl Default for HashedCharNgramEmbedder {
    fn default() -> Self {
        HashedCharNgramEmbedder {
            n: 3,
            dim: 256,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

impl HashedCharNgramEmbedder {
    pub fn bucket(&self, gram: &str) -> usize {
        (fnv1a(gram.as_bytes()) % self.dim as u64) as usize
    }

    fn embed_text(&self, text: &str) -> Embedding {
        let (text, truncated) = truncate(text, self.max_tokens);
        let mut v = vec![0.0; self.dim];
        let chars: Vec<char> = text.chars().collect();
        let mut buf = String::new();
        for w in chars.windows(self.n.max(1)) {
            buf.clear();
            buf.extend(w);
            v[self.bucket(&buf)] += 1.0;
        }
        finish(v, truncated)
    }
}

impl Embedder for HashedCharNgramEmbedder {
    fn backend_id(&self) -> &str {
        "stub-char-ngram"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        Ok(texts.iter().map(|t| self.embed_text(t)).collect())
    }
}

/// Lowercased words with surrounding ASCII punctuation stripped.
pub fn content_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
}

/// Hashed bag of content words, L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedBagOfWordsEmbedder {
    pub dim: usize,
    pub max_tokens: usize,
}

impl Default for HashedBagOfWordsEmbedder {
    fn default() -> Self {
        HashedBagOfWordsEmbedder {
            dim: 1024,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

impl HashedBagOfWordsEmbedder {
    pub fn bucket(&self, word: &str) -> usize {
        (fnv1a(word.as_bytes()) % self.dim as u64) as usize
    }
}

impl Embedder for HashedBagOfWordsEmbedder {
    fn backend_id(&self) -> &str {
        "stub-bag-of-words"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        Ok(texts
            .iter()
            .map(|t| {
                let (t, truncated) = truncate(t, self.max_tokens);
                let mut v = vec![0.0; self.dim];
                for w in content_words(&t) {
                    v[self.bucket(&w)] += 1.0;
                }
                finish(v, truncated)
            })
            .collect())
    }
}

/// Acceptable iff the text ends in `.`, `!` or `?` and has at least three
/// whitespace tokens. Probability is 1 or 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleAcceptability;

impl RuleAcceptability {
    pub fn judge_text(text: &str) -> AcceptabilityJudgment {
        let trimmed = text.trim_end();
        if trimmed.is_empty() {
            return AcceptabilityJudgment {
                probability: 0.0,
                label: false,
                degenerate: true,
            };
        }
        let ok = trimmed.ends_with(['.', '!', '?']) && trimmed.split_whitespace().count() >= 3;
        AcceptabilityJudgment::from_probability(if ok { 1.0 } else { 0.0 })
    }
}

impl AcceptabilityJudge for RuleAcceptability {
    fn backend_id(&self) -> &str {
        "stub-rule-acceptability"
    }

    fn judge(&self, texts: &[&str]) -> Result<Vec<AcceptabilityJudgment>> {
        Ok(texts.iter().map(|t| Self::judge_text(t)).collect())
    }
}

/// Uniform distribution over `vocab_size` symbols. With a closed vocabulary,
/// tokens outside it are rejected.
#[derive(Debug, Clone)]
pub struct UniformLikelihood {
    vocab_size: usize,
    vocabulary: Option<HashSet<String>>,
}

impl UniformLikelihood {
    pub fn open(vocab_size: usize) -> Self {
        assert!(vocab_size > 0, "vocabulary must be non-empty");
        UniformLikelihood {
            vocab_size,
            vocabulary: None,
        }
    }

    pub fn closed<I, S>(vocabulary: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vocabulary: HashSet<String> = vocabulary.into_iter().map(Into::into).collect();
        assert!(!vocabulary.is_empty(), "vocabulary must be non-empty");
        UniformLikelihood {
            vocab_size: vocabulary.len(),
            vocabulary: Some(vocabulary),
        }
    }
}

impl LikelihoodModel for UniformLikelihood {
    fn backend_id(&self) -> &str {
        "stub-uniform"
    }

    fn sequence_logprob(&self, _context: &str, tokens: &[&str]) -> Result<Vec<f64>> {
        let lp = -(self.vocab_size as f64).ln();
        tokens
            .iter()
            .map(|t| match &self.vocabulary {
                Some(v) if !v.contains(*t) => Err(Error::UnknownToken {
                    backend_id: self.backend_id().into(),
                    token: t.to_string(),
                }),
                _ => Ok(lp),
            })
            .collect()
    }
}

/// Puts all mass on one continuation. With no continuation set, every token
/// is certain.
#[derive(Debug, Clone, Default)]
pub struct DeterministicLikelihood {
    pub continuation: Option<Vec<String>>,
}

impl LikelihoodModel for DeterministicLikelihood {
    fn backend_id(&self) -> &str {
        "stub-deterministic"
    }

    fn sequence_logprob(&self, _context: &str, tokens: &[&str]) -> Result<Vec<f64>> {
        if let Some(cont) = &self.continuation {
            for (i, t) in tokens.iter().enumerate() {
                if cont.get(i).map(String::as_str) != Some(*t) {
                    return Err(Error::UnknownToken {
                        backend_id: self.backend_id().into(),
                        token: t.to_string(),
                    });
                }
            }
        }
        Ok(vec![0.0; tokens.len()])
    }
}

/// Fraction of the source's distinct content words that reappear in the
/// generation.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenRecallCoverage;

impl CoverageScorer for TokenRecallCoverage {
    fn backend_id(&self) -> &str {
        "stub-token-recall"
    }

    fn coverage(&self, source: &str, generation: &str) -> Result<f64> {
        let src: HashSet<String> = content_words(source).collect();
        if src.is_empty() {
            return Ok(1.0);
        }
        let gen: HashSet<String> = content_words(generation).collect();
        Ok(src.intersection(&gen).count() as f64 / src.len() as f64)
    }
}
