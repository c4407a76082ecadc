//! Autoregressive rewrite policies `p(y | x; theta)`.
//!
//! A [`Policy`] samples candidates with their per-token log-probabilities,
//! re-scores token sequences, and exposes its parameters and log-likelihood
//! gradients so the optimizer and the trainer stay backend-agnostic.

pub mod optim;
pub mod params;
pub mod tiny;

use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
pub use optim::{OptimizerConfig, OptimizerKind, OptimizerState, StepOutcome};
pub use params::{Layer, Parameters};
pub use tiny::{TinyPolicy, TinyPolicyConfig, Vocabulary};

pub type TokenId = usize;

/// Default number of samples per input.
pub const DEFAULT_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Decoding {
    /// `0` selects greedy decoding.
    pub temperature: f64,
    pub top_p: f64,
    /// `None` means `ceil(1.4 * input tokens) + 8`.
    pub max_len: Option<usize>,
    /// End-of-sequence is masked before this many tokens.
    pub min_len: usize,
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding {
            temperature: 1.0,
            top_p: 1.0,
            max_len: None,
            min_len: 0,
        }
    }
}

impl Decoding {
    pub fn greedy() -> Self {
        Decoding {
            temperature: 0.0,
            ..Default::default()
        }
    }

    pub fn max_len_for(&self, input_tokens: usize) -> usize {
        self.max_len
            .unwrap_or_else(|| (1.4 * input_tokens as f64).ceil() as usize + 8)
    }

    /// Temperature used when turning logits into recorded log-probabilities.
    /// Greedy decoding records the untempered distribution.
    pub fn scoring_temperature(&self) -> f64 {
        if self.temperature > 0.0 {
            self.temperature
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Generated tokens, including the end-of-sequence token when one was
    /// produced.
    pub tokens: Vec<TokenId>,
    pub text: String,
    pub token_logprobs: Vec<f64>,
    /// Empty generation (end-of-sequence first). Kept so the sample count
    /// stays `k`.
    #[serde(default)]
    pub empty: bool,
    /// Stopped at `max_len` without an end-of-sequence token.
    #[serde(default)]
    pub hit_max_len: bool,
}

impl Candidate {
    pub fn sequence_logprob(&self) -> f64 {
        self.token_logprobs.iter().sum()
    }
}

pub trait Policy: Send + Sync {
    fn backend_id(&self) -> &str;
    fn tokenizer_id(&self) -> String;
    /// Incremented by every parameter update.
    fn version(&self) -> u64;
    fn decoding(&self) -> &Decoding;
    fn set_decoding(&mut self, decoding: Decoding);

    fn sample(&self, x: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<Candidate>>;
    /// Per-token log-probabilities of `tokens` given `x`, under the current
    /// parameters and decoding settings.
    fn score(&self, x: &str, tokens: &[TokenId]) -> Result<Vec<f64>>;
    /// Encodes a target text for teacher forcing (end-of-sequence appended).
    fn encode_target(&self, text: &str) -> Result<Vec<TokenId>>;

    fn parameters(&self) -> &Parameters;
    /// Adds `weight * d/dtheta sum_i log p(tokens_i | ..., x)` into `grad`.
    fn accumulate_logprob_gradient(
        &self,
        x: &str,
        tokens: &[TokenId],
        weight: f64,
        grad: &mut Parameters,
    ) -> Result<()>;
    /// Replaces parameter values and bumps the version.
    fn update_parameters(&mut self, f: &mut dyn FnMut(&mut Parameters));
    /// Loads checkpointed parameters and version.
    fn restore(&mut self, params: Parameters, version: u64) -> Result<()>;
}

/// One optimizer step on the policy's parameters for a loss gradient.
pub fn apply_gradient_step(
    policy: &mut dyn Policy,
    gradient: &Parameters,
    optimizer: &mut OptimizerState,
) -> StepOutcome {
    if !gradient.all_finite() {
        optimizer.skipped += 1;
        return StepOutcome {
            applied: false,
            step_norm: 0.0,
        };
    }
    let mut outcome = None;
    policy.update_parameters(&mut |p| outcome = Some(optimizer.apply(p, gradient)));
    outcome.expect("update closure runs once")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphrasePair {
    pub src: String,
    pub tgt: String,
}

pub fn read_paraphrase_pairs(path: impl AsRef<Path>) -> Result<Vec<ParaphrasePair>> {
    jsonl::read(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneReport {
    /// Mean per-pair target NLL before training, then after each epoch.
    pub epoch_nll: Vec<f64>,
    /// `(pair index, reason)` for pairs that could not be tokenized.
    pub failures: Vec<(usize, String)>,
}

/// Mean target negative log-likelihood over the encodable pairs.
pub fn paraphrase_nll(policy: &dyn Policy, pairs: &[(String, Vec<TokenId>)]) -> Result<f64> {
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (src, tgt) in pairs {
        total -= policy.score(src, tgt)?.iter().sum::<f64>();
    }
    Ok(total / pairs.len() as f64)
}

/// Supervised sequence-to-sequence warm-up: minimizes target NLL given the
/// source with minibatches of `batch_size` pairs, in pair order.
pub fn supervised_paraphrase_finetune(
    policy: &mut dyn Policy,
    pairs: &[ParaphrasePair],
    epochs: usize,
    batch_size: usize,
    optimizer: &mut OptimizerState,
) -> Result<FinetuneReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no paraphrase pairs".into()));
    }
    let mut failures = Vec::new();
    let mut encoded = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        match policy.encode_target(&p.tgt) {
            Ok(t) => encoded.push((p.src.clone(), t)),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let mut epoch_nll = vec![paraphrase_nll(policy, &encoded)?];
    for _ in 0..epochs {
        for chunk in encoded.chunks(batch_size.max(1)) {
            let mut grad = policy.parameters().zeros_like();
            for (src, tgt) in chunk {
                // descent on -log p
                policy.accumulate_logprob_gradient(src, tgt, -1.0 / chunk.len() as f64, &mut grad)?;
            }
            apply_gradient_step(policy, &grad, optimizer);
        }
        epoch_nll.push(paraphrase_nll(policy, &encoded)?);
    }
    Ok(FinetuneReport { epoch_nll, failures })
}

/// Written next to every saved policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyManifest {
    pub backend_id: String,
    pub version: u64,
    pub tokenizer_id: String,
    pub config_hash: String,
    pub optimizer: String,
}
