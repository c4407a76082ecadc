//! Reward components for obfuscation and their weighted-log composition.
//!
//! A sample's reward is
//!
//! ```text
//! R = g1*log(privacy) + g2*log(meaning) + g3*log(fluency) + g4*log(acceptability)
//!     [+ g5*log(coverage)] + sum_i log(1 - G_i)
//! ```
//!
//! where each log argument is floored at `epsilon` first. A triggered
//! guardrail (`G_i = 1`) or a zero component therefore adds `log(epsilon)`
//! (about -9.21 for the default) rather than negative infinity.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scorers::{cosine, Scorers};
use crate::text::{char_len, has_repeated_word_ngram};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_BREVITY_LO: f64 = 0.8;
pub const DEFAULT_BREVITY_HI: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            gamma1: 3.0,
            gamma2: 2.0,
            gamma3: 1.0,
            gamma4: 1.0,
        }
    }
}

impl RewardWeights {
    pub const ZERO: RewardWeights = RewardWeights {
        gamma1: 0.0,
        gamma2: 0.0,
        gamma3: 0.0,
        gamma4: 0.0,
    };
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailResult {
    pub brevity_triggered: bool,
    pub repetition_triggered: bool,
    #[serde(default)]
    pub extras: BTreeMap<String, bool>,
}

impl GuardrailResult {
    /// Guardrail states in a fixed order: brevity, repetition, then extras
    /// by name.
    pub fn states(&self) -> impl Iterator<Item = bool> + '_ {
        [self.brevity_triggered, self.repetition_triggered]
            .into_iter()
            .chain(self.extras.values().copied())
    }

    pub fn triggered_count(&self) -> usize {
        self.states().filter(|t| *t).count()
    }

    pub fn any(&self) -> bool {
        self.triggered_count() > 0
    }
}

/// Weighted log terms, one per component. Disabled components contribute
/// exactly zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub privacy: f64,
    pub meaning: f64,
    pub fluency: f64,
    pub acceptability: f64,
    pub coverage: f64,
    pub guardrails: f64,
}

impl Contributions {
    pub fn total(&self) -> f64 {
        self.privacy + self.meaning + self.fluency + self.acceptability + self.coverage + self.guardrails
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// 1 - cosine of authorship embeddings, in `[0, 2]`.
    pub luar_self: f64,
    /// Cosine of semantic embeddings, in `[-1, 1]`.
    pub sbert_self: f64,
    /// Exponentiated mean token log-likelihood, in `(0, 1]`.
    pub fluency: f64,
    /// 1 if input and output get the same acceptability label.
    pub cola_agree: f64,
    #[serde(default)]
    pub coverage: Option<f64>,
    pub guardrails: GuardrailResult,
    pub contributions: Contributions,
    pub total: f64,
    #[serde(default)]
    pub flags: BTreeSet<String>,
}

impl RewardBreakdown {
    /// A breakdown carrying only a scalar total (custom reward functions).
    pub fn scalar(total: f64) -> Self {
        RewardBreakdown {
            total,
            ..Default::default()
        }
    }
}

pub fn privacy_reward(scorers: &Scorers, x: &str, y: &str) -> Result<(f64, bool)> {
    let e = scorers.embed_authorship(&[x, y])?;
    let sim = cosine(&e[0].vector, &e[1].vector)?;
    Ok((1.0 - sim.value, sim.degenerate))
}

pub fn meaning_reward(scorers: &Scorers, x: &str, y: &str) -> Result<(f64, bool)> {
    let e = scorers.embed_semantic(&[x, y])?;
    let sim = cosine(&e[0].vector, &e[1].vector)?;
    Ok((sim.value, sim.degenerate))
}

pub fn acceptability_reward(scorers: &Scorers, x: &str, y: &str) -> Result<f64> {
    let j = scorers.judge_acceptability(&[x, y])?;
    Ok(if j[0].label == j[1].label { 1.0 } else { 0.0 })
}

/// `exp(mean token log-prob)` of `y`, clamped to `[epsilon, 1]`. An empty
/// `y` yields `(epsilon, true)`.
pub fn fluency_reward(scorers: &Scorers, y: &str, context: &str, epsilon: f64) -> Result<(f64, bool)> {
    let tokens = scorers.likelihood.tokenize(y);
    if tokens.is_empty() {
        return Ok((epsilon, true));
    }
    let lps = scorers.sequence_logprob(context, &tokens)?;
    let mean = lps.iter().sum::<f64>() / lps.len() as f64;
    Ok((mean.exp().clamp(epsilon, 1.0), false))
}

/// Triggered when the character-length ratio `|y| / |x|` falls outside the
/// inclusive range `[lo, hi]`, or when `x` is empty.
pub fn brevity_guardrail(x: &str, y: &str, lo: f64, hi: f64) -> bool {
    let lx = char_len(x);
    if lx == 0 {
        return true;
    }
    let ratio = char_len(y) as f64 / lx as f64;
    !(lo..=hi).contains(&ratio)
}

/// Triggered when any whitespace-token 3-gram occurs twice.
pub fn repetition_guardrail(y: &str) -> bool {
    has_repeated_word_ngram(y, 3)
}

fn floored_log(x: f64, epsilon: f64) -> f64 {
    x.max(epsilon).ln()
}

// A switched-off term is exactly +0.0 (never -0.0) so logs read cleanly.
fn weighted(w: f64, term: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * term
    }
}

/// How the components are weighted and which are switched on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composition {
    pub weights: RewardWeights,
    pub coverage_weight: f64,
    pub guardrails: bool,
    pub epsilon: f64,
}

impl From<RewardWeights> for Composition {
    fn from(weights: RewardWeights) -> Self {
        Composition {
            weights,
            coverage_weight: 0.0,
            guardrails: true,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

pub fn contributions(b: &RewardBreakdown, c: &Composition) -> Contributions {
    let w = &c.weights;
    let eps = c.epsilon;
    Contributions {
        privacy: weighted(w.gamma1, floored_log(b.luar_self, eps)),
        meaning: weighted(w.gamma2, floored_log(b.sbert_self, eps)),
        fluency: weighted(w.gamma3, floored_log(b.fluency, eps)),
        acceptability: weighted(w.gamma4, floored_log(b.cola_agree, eps)),
        coverage: match b.coverage {
            Some(cov) => weighted(c.coverage_weight, floored_log(cov, eps)),
            None => 0.0,
        },
        guardrails: if c.guardrails {
            b.guardrails
                .states()
                .map(|t| floored_log(if t { 0.0 } else { 1.0 }, eps))
                .sum()
        } else {
            0.0
        },
    }
}

/// Weighted log-sum with the default epsilon and guardrails on.
pub fn compose_reward(components: &RewardBreakdown, weights: &RewardWeights) -> f64 {
    contributions(components, &Composition::from(*weights)).total()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toggle {
    pub enabled: bool,
}

impl Default for Toggle {
    fn default() -> Self {
        Toggle { enabled: true }
    }
}

/// Per-component ablation switches (`reward.components.<name>.enabled`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComponentToggles {
    pub privacy: Toggle,
    pub meaning: Toggle,
    pub fluency: Toggle,
    pub acceptability: Toggle,
    pub guardrails: Toggle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrevityBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for BrevityBounds {
    fn default() -> Self {
        BrevityBounds {
            lo: DEFAULT_BREVITY_LO,
            hi: DEFAULT_BREVITY_HI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageConfig {
    pub enabled: bool,
    pub weight: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            enabled: false,
            weight: 1.0,
        }
    }
}

/// The `[reward]` config table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    #[serde(flatten)]
    pub weights: RewardWeights,
    pub epsilon: f64,
    pub brevity: BrevityBounds,
    pub coverage: CoverageConfig,
    pub components: ComponentToggles,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            weights: RewardWeights::default(),
            epsilon: DEFAULT_EPSILON,
            brevity: BrevityBounds::default(),
            coverage: CoverageConfig::default(),
            components: ComponentToggles::default(),
        }
    }
}

impl RewardConfig {
    pub fn composition(&self) -> Composition {
        let gate = |t: Toggle, g: f64| if t.enabled { g } else { 0.0 };
        let c = &self.components;
        Composition {
            weights: RewardWeights {
                gamma1: gate(c.privacy, self.weights.gamma1),
                gamma2: gate(c.meaning, self.weights.gamma2),
                gamma3: gate(c.fluency, self.weights.gamma3),
                gamma4: gate(c.acceptability, self.weights.gamma4),
            },
            coverage_weight: if self.coverage.enabled { self.coverage.weight } else { 0.0 },
            guardrails: c.guardrails.enabled,
            epsilon: self.epsilon,
        }
    }
}

/// Anything that turns an input and its candidate rewrites into rewards.
pub trait RewardFunction: Send + Sync {
    fn score(&self, x: &str, ys: &[&str]) -> Result<Vec<RewardBreakdown>>;
    /// `(role, backend_id)` pairs recorded in run manifests.
    fn describe(&self) -> Vec<(String, String)> {
        Vec::new()
    }
}

/// The composite obfuscation reward over a set of scorer backends.
#[derive(Debug, Clone)]
pub struct CompositeReward {
    pub scorers: Scorers,
    pub config: RewardConfig,
}

impl CompositeReward {
    pub fn new(scorers: Scorers, config: RewardConfig) -> Self {
        CompositeReward { scorers, config }
    }

    fn parallel_ok(&self) -> bool {
        let s = &self.scorers;
        s.authorship.concurrent_safe()
            && s.semantic.concurrent_safe()
            && s.acceptability.concurrent_safe()
            && s.likelihood.concurrent_safe()
    }

    /// Scores one pair. Every component is computed even when switched off
    /// so that logs show the raw values; switched-off components carry zero
    /// weight.
    pub fn evaluate(&self, x: &str, y: &str) -> Result<RewardBreakdown> {
        let cfg = &self.config;
        let mut flags = BTreeSet::new();
        let (luar_self, priv_degenerate) = privacy_reward(&self.scorers, x, y)?;
        if priv_degenerate {
            flags.insert("degenerate_authorship_embedding".to_string());
        }
        let (sbert_self, sem_degenerate) = meaning_reward(&self.scorers, x, y)?;
        if sem_degenerate {
            flags.insert("degenerate_semantic_embedding".to_string());
        }
        if sbert_self < 0.0 {
            flags.insert("negative_semantic_cosine_clamped".to_string());
        }
        let (fluency, empty) = fluency_reward(&self.scorers, y, "", cfg.epsilon)?;
        if empty {
            flags.insert("empty_output".to_string());
        }
        let cola_agree = acceptability_reward(&self.scorers, x, y)?;
        let coverage = match (&self.scorers.coverage, cfg.coverage.enabled) {
            (Some(c), true) => Some(c.coverage(x, y)?),
            _ => None,
        };
        let guardrails = GuardrailResult {
            brevity_triggered: brevity_guardrail(x, y, cfg.brevity.lo, cfg.brevity.hi),
            repetition_triggered: repetition_guardrail(y),
            extras: BTreeMap::new(),
        };
        let mut b = RewardBreakdown {
            luar_self,
            sbert_self,
            fluency,
            cola_agree,
            coverage,
            guardrails,
            contributions: Contributions::default(),
            total: 0.0,
            flags,
        };
        b.contributions = contributions(&b, &cfg.composition());
        b.total = b.contributions.total();
        Ok(b)
    }
}

impl RewardFunction for CompositeReward {
    fn score(&self, x: &str, ys: &[&str]) -> Result<Vec<RewardBreakdown>> {
        if self.parallel_ok() {
            ys.par_iter().map(|y| self.evaluate(x, y)).collect()
        } else {
            ys.iter().map(|y| self.evaluate(x, y)).collect()
        }
    }

    fn describe(&self) -> Vec<(String, String)> {
        self.scorers.describe()
    }
}
