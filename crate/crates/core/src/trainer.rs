//! k-sample self-critical policy-gradient training.
//!
//! For each input `x` the policy draws `k` rewrites, each is rewarded, and
//! the per-input loss is
//!
//! ```text
//! L(x) = sum_j (mean_R - R_j) * sum_i log p(y_i^j | y_<i^j, x)
//! ```
//!
//! so samples above the mean reward gain likelihood and samples below lose
//! it. The batch loss is the mean of `L(x)` over the batch. Rewards come from
//! decoded text; gradients flow only through the log-probabilities.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{
    apply_gradient_step, Candidate, Decoding, OptimizerConfig, OptimizerKind, OptimizerState, Parameters,
    Policy, PolicyManifest, DEFAULT_K,
};
use crate::jsonl;
use crate::rewards::{Contributions, RewardBreakdown, RewardConfig, RewardFunction};

pub const DEFAULT_BATCH_SIZE: usize = 4;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub k: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub max_steps: u64,
    pub seed: u64,
    /// Save a checkpoint every this many steps (0: initial and final only).
    pub checkpoint_every: u64,
    pub decoding: Decoding,
    pub reward: RewardConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: DEFAULT_K,
            batch_size: DEFAULT_BATCH_SIZE,
            learning_rate: DEFAULT_LEARNING_RATE,
            optimizer: OptimizerKind::Lamb,
            max_steps: 100,
            seed: 0,
            checkpoint_every: 50,
            decoding: Decoding::default(),
            reward: RewardConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2 (got {})", self.k)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::Config(format!("bad learning_rate {}", self.learning_rate)));
        }
        Ok(())
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            kind: self.optimizer,
            learning_rate: self.learning_rate,
            ..Default::default()
        }
    }
}

/// `k` candidates for one input with their rewards and the mean baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub input: String,
    pub candidates: Vec<Candidate>,
    pub rewards: Vec<RewardBreakdown>,
    pub mean_reward: f64,
}

impl SampleSet {
    pub fn new(input: impl Into<String>, candidates: Vec<Candidate>, rewards: Vec<RewardBreakdown>) -> Result<Self> {
        if candidates.is_empty() || candidates.len() != rewards.len() {
            return Err(Error::InvalidInput(format!(
                "{} candidates but {} rewards",
                candidates.len(),
                rewards.len()
            )));
        }
        let mean_reward = rewards.iter().map(|r| r.total).sum::<f64>() / rewards.len() as f64;
        Ok(SampleSet {
            input: input.into(),
            candidates,
            rewards,
            mean_reward,
        })
    }

    pub fn k(&self) -> usize {
        self.candidates.len()
    }

    /// `mean_R - R_j` for every candidate.
    pub fn advantages(&self) -> Vec<f64> {
        self.rewards.iter().map(|r| self.mean_reward - r.total).collect()
    }
}

fn finite_sequence_logprob(input: &str, j: usize, token_logprobs: &[f64]) -> Result<f64> {
    let lp: f64 = token_logprobs.iter().sum();
    if lp.is_finite() {
        Ok(lp)
    } else {
        let head: String = input.chars().take(40).collect();
        Err(Error::NonFiniteLogProb {
            candidate: format!("candidate {j} of input {head:?}"),
        })
    }
}

/// Loss of one sample set from the log-probabilities recorded at sampling.
pub fn kscst_loss(set: &SampleSet) -> Result<f64> {
    let mut loss = 0.0;
    for (j, (c, a)) in set.candidates.iter().zip(set.advantages()).enumerate() {
        loss += a * finite_sequence_logprob(&set.input, j, &c.token_logprobs)?;
    }
    Ok(loss)
}

/// Batch loss with every candidate re-scored under the policy's current
/// parameters.
pub fn batch_loss(policy: &dyn Policy, sets: &[SampleSet]) -> Result<f64> {
    if sets.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for set in sets {
        for (j, (c, a)) in set.candidates.iter().zip(set.advantages()).enumerate() {
            let lp = policy.score(&set.input, &c.tokens)?;
            total += a * finite_sequence_logprob(&set.input, j, &lp)?;
        }
    }
    Ok(total / sets.len() as f64)
}

/// Adds the gradient of [`batch_loss`] into `grad`.
pub fn accumulate_batch_gradient(policy: &dyn Policy, sets: &[SampleSet], grad: &mut Parameters) -> Result<()> {
    let n = sets.len() as f64;
    for set in sets {
        for (c, a) in set.candidates.iter().zip(set.advantages()) {
            policy.accumulate_logprob_gradient(&set.input, &c.tokens, a / n, grad)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeans {
    pub luar_self: f64,
    pub sbert_self: f64,
    pub fluency: f64,
    pub cola_agree: f64,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRecord {
    pub step: u64,
    pub mean_reward: f64,
    pub loss: f64,
    pub components: ComponentMeans,
    /// Mean weighted contribution of each component to the total reward.
    pub contributions: Contributions,
    /// Fraction of candidates with at least one guardrail triggered.
    pub guardrail_rate: f64,
    pub empty_rate: f64,
    pub theta_version: u64,
    pub step_norm: f64,
    pub skipped_steps: u64,
}

fn summarize(sets: &[SampleSet]) -> (f64, ComponentMeans, Contributions, f64, f64) {
    let all: Vec<(&Candidate, &RewardBreakdown)> = sets
        .iter()
        .flat_map(|s| s.candidates.iter().zip(&s.rewards))
        .collect();
    let n = all.len().max(1) as f64;
    let mean = |f: &dyn Fn(&RewardBreakdown) -> f64| all.iter().map(|(_, r)| f(r)).sum::<f64>() / n;
    let coverage = if all.iter().all(|(_, r)| r.coverage.is_some()) && !all.is_empty() {
        Some(mean(&|r| r.coverage.unwrap_or(0.0)))
    } else {
        None
    };
    let components = ComponentMeans {
        luar_self: mean(&|r| r.luar_self),
        sbert_self: mean(&|r| r.sbert_self),
        fluency: mean(&|r| r.fluency),
        cola_agree: mean(&|r| r.cola_agree),
        coverage,
    };
    let contributions = Contributions {
        privacy: mean(&|r| r.contributions.privacy),
        meaning: mean(&|r| r.contributions.meaning),
        fluency: mean(&|r| r.contributions.fluency),
        acceptability: mean(&|r| r.contributions.acceptability),
        coverage: mean(&|r| r.contributions.coverage),
        guardrails: mean(&|r| r.contributions.guardrails),
    };
    let guard = mean(&|r| if r.guardrails.any() { 1.0 } else { 0.0 });
    let empty = all.iter().filter(|(c, _)| c.empty).count() as f64 / n;
    (mean(&|r| r.total), components, contributions, guard, empty)
}

/// Deterministic random stream for one training step.
pub fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// Samples, rewards and updates once over `inputs`.
///
/// Sampling and reward evaluation finish before the parameters are touched,
/// so a failing scorer leaves the policy and optimizer unchanged.
pub fn train_step(
    policy: &mut dyn Policy,
    reward: &dyn RewardFunction,
    optimizer: &mut OptimizerState,
    inputs: &[&str],
    config: &TrainConfig,
    step: u64,
) -> Result<TrainLogRecord> {
    config.validate()?;
    let mut rng = step_rng(config.seed, step);
    let mut sets = Vec::with_capacity(inputs.len());
    for x in inputs {
        let candidates = policy.sample(x, config.k, &mut rng)?;
        let texts: Vec<&str> = candidates.iter().map(|c| c.text.as_str()).collect();
        let rewards = reward.score(x, &texts)?;
        sets.push(SampleSet::new(*x, candidates, rewards)?);
    }
    let mut loss = 0.0;
    for set in &sets {
        loss += kscst_loss(set)?;
    }
    loss /= sets.len().max(1) as f64;
    let mut grad = policy.parameters().zeros_like();
    accumulate_batch_gradient(&*policy, &sets, &mut grad)?;
    let outcome = apply_gradient_step(policy, &grad, optimizer);
    let (mean_reward, components, contributions, guardrail_rate, empty_rate) = summarize(&sets);
    Ok(TrainLogRecord {
        step,
        mean_reward,
        loss,
        components,
        contributions,
        guardrail_rate,
        empty_rate,
        theta_version: policy.version(),
        step_norm: outcome.step_norm,
        skipped_steps: optimizer.skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    #[serde(flatten)]
    pub policy: PolicyManifest,
    pub step: u64,
}

/// Written once per run, next to the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub policy_backend: String,
    pub tokenizer_id: String,
    pub optimizer: OptimizerKind,
    /// Set when the plain adaptive-moment optimizer replaces the layer-wise one.
    pub optimizer_fallback: bool,
    pub decoding: Decoding,
    pub seed: u64,
    pub reward_backends: BTreeMap<String, String>,
}

pub const LOG_FILE: &str = "train_log.jsonl";
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

pub fn checkpoint_dir(out: &Path, step: u64) -> PathBuf {
    out.join("checkpoints").join(format!("step-{step:06}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    std::fs::write(path, body + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&raw)?)
}

pub fn save_checkpoint(
    dir: &Path,
    policy: &dyn Policy,
    optimizer: &OptimizerState,
    config_hash: &str,
    step: u64,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = CheckpointManifest {
        policy: PolicyManifest {
            backend_id: policy.backend_id().to_string(),
            version: policy.version(),
            tokenizer_id: policy.tokenizer_id(),
            config_hash: config_hash.to_string(),
            optimizer: format!("{:?}", optimizer.config.kind).to_lowercase(),
        },
        step,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    write_json(&dir.join("params.json"), policy.parameters())?;
    write_json(&dir.join("optimizer.json"), optimizer)
}

pub fn read_checkpoint_manifest(dir: &Path) -> Result<CheckpointManifest> {
    read_json(&dir.join("manifest.json"))
}

/// Restores policy parameters and optimizer state; returns the checkpoint
/// step. Refuses checkpoints written under a different configuration.
pub fn load_checkpoint(
    dir: &Path,
    policy: &mut dyn Policy,
    config_hash: &str,
) -> Result<(u64, OptimizerState)> {
    let manifest = read_checkpoint_manifest(dir)?;
    if manifest.policy.config_hash != config_hash {
        return Err(Error::ConfigHashMismatch {
            checkpoint: manifest.policy.config_hash,
            config: config_hash.to_string(),
        });
    }
    if manifest.policy.tokenizer_id != policy.tokenizer_id() {
        return Err(Error::Config(format!(
            "checkpoint tokenizer {} does not match policy tokenizer {}",
            manifest.policy.tokenizer_id,
            policy.tokenizer_id()
        )));
    }
    let params: Parameters = read_json(&dir.join("params.json"))?;
    let optimizer: OptimizerState = read_json(&dir.join("optimizer.json"))?;
    policy.restore(params, manifest.policy.version)?;
    Ok((manifest.step, optimizer))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub first_step: u64,
    pub last_step: u64,
    pub records: Vec<TrainLogRecord>,
    pub checkpoints: Vec<PathBuf>,
}

/// Inputs visited in one seeded order, `batch_size` per step, wrapping.
fn batch_for(order: &[usize], step: u64, batch_size: usize) -> Vec<usize> {
    let start = (step.saturating_sub(1) as usize) * batch_size;
    (0..batch_size).map(|i| order[(start + i) % order.len()]).collect()
}

/// Runs (or resumes) training, writing checkpoints, the run manifest and a
/// JSON-lines log of [`TrainLogRecord`]s under `out`.
///
/// Steps are numbered from 1; step 0 is the initial checkpoint. A resumed run
/// keeps the log up to its checkpoint and continues numbering from there, so
/// an interrupted and resumed run logs exactly what an uninterrupted one does.
pub fn train(
    policy: &mut dyn Policy,
    reward: &dyn RewardFunction,
    inputs: &[String],
    config: &TrainConfig,
    config_hash: &str,
    out: &Path,
    resume: Option<&Path>,
) -> Result<TrainSummary> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::InvalidInput("training corpus is empty".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    policy.set_decoding(config.decoding);
    let log_path = out.join(LOG_FILE);

    let (start, mut optimizer, mut records) = match resume {
        Some(dir) => {
            let (step, optimizer) = load_checkpoint(dir, policy, config_hash)?;
            let kept: Vec<TrainLogRecord> = if log_path.exists() {
                jsonl::read::<TrainLogRecord>(&log_path)?
                    .into_iter()
                    .filter(|r| r.step <= step)
                    .collect()
            } else {
                Vec::new()
            };
            (step, optimizer, kept)
        }
        None => (0, OptimizerState::new(config.optimizer_config(), policy.parameters()), Vec::new()),
    };
    jsonl::write(&log_path, &records)?;

    let manifest = RunManifest {
        config_hash: config_hash.to_string(),
        policy_backend: policy.backend_id().to_string(),
        tokenizer_id: policy.tokenizer_id(),
        optimizer: config.optimizer,
        optimizer_fallback: config.optimizer != OptimizerKind::Lamb,
        decoding: config.decoding,
        seed: config.seed,
        reward_backends: reward.describe().into_iter().collect(),
    };
    write_json(&out.join(RUN_MANIFEST_FILE), &manifest)?;

    let mut checkpoints = Vec::new();
    if resume.is_none() {
        let dir = checkpoint_dir(out, 0);
        save_checkpoint(&dir, policy, &optimizer, config_hash, 0)?;
        checkpoints.push(dir);
    }

    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));

    let first_step = start + 1;
    for step in first_step..=config.max_steps {
        let batch: Vec<&str> = batch_for(&order, step, config.batch_size)
            .into_iter()
            .map(|i| inputs[i].as_str())
            .collect();
        let record = train_step(policy, reward, &mut optimizer, &batch, config, step)?;
        log::debug!("step {step}: mean reward {:.4}, loss {:.4}", record.mean_reward, record.loss);
        jsonl::append(&log_path, &record)?;
        records.push(record);
        let due = config.checkpoint_every > 0 && step % config.checkpoint_every == 0;
        if due || step == config.max_steps {
            let dir = checkpoint_dir(out, step);
            save_checkpoint(&dir, policy, &optimizer, config_hash, step)?;
            checkpoints.push(dir);
        }
    }
    Ok(TrainSummary {
        first_step,
        last_step: config.max_steps.max(start),
        records,
        checkpoints,
    })
}

/// Reward = fraction of whitespace tokens equal to a target token (0 for an
/// empty rewrite). A toy objective for exercising the training loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetTokenReward {
    pub target: String,
}

impl TargetTokenReward {
    pub fn new(target: impl Into<String>) -> Self {
        TargetTokenReward { target: target.into() }
    }

    pub fn value(&self, y: &str) -> f64 {
        let words: Vec<&str> = y.split_whitespace().collect();
        if words.is_empty() {
            return 0.0;
        }
        words.iter().filter(|w| **w == self.target).count() as f64 / words.len() as f64
    }
}

impl RewardFunction for TargetTokenReward {
    fn score(&self, _x: &str, ys: &[&str]) -> Result<Vec<RewardBreakdown>> {
        Ok(ys.iter().map(|y| RewardBreakdown::scalar(self.value(y))).collect())
    }

    fn describe(&self) -> Vec<(String, String)> {
        vec![("target_token".into(), self.target.clone())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{TinyPolicy, TinyPolicyConfig, Vocabulary};
    use crate::rewards::{CompositeReward, RewardWeights};
    use crate::scorers::Scorers;
    use proptest::prelude::*;

    fn candidate(logprobs: Vec<f64>) -> Candidate {
        Candidate {
            tokens: vec![3; logprobs.len()],
            text: "a".into(),
            token_logprobs: logprobs,
            empty: false,
            hit_max_len: false,
        }
    }

    fn set(rewards: &[f64], logprobs: &[f64]) -> SampleSet {
        SampleSet::new(
            "x",
            logprobs.iter().map(|&l| candidate(vec![l])).collect(),
            rewards.iter().map(|&r| RewardBreakdown::scalar(r)).collect(),
        )
        .unwrap()
    }

    fn tiny(dim: usize) -> TinyPolicy {
        TinyPolicy::new(
            Vocabulary::new(["a", "b", "c", "d", "e"]),
            TinyPolicyConfig {
                dim,
                init_scale: 0.3,
                seed: 1,
            },
            Decoding {
                max_len: Some(5),
                ..Default::default()
            },
        )
    }

    #[test]
    fn loss_examples() {
        assert_eq!(kscst_loss(&set(&[0.3, 0.3, 0.3], &[-1.0, -5.0, -2.0])).unwrap(), 0.0);
        assert!((kscst_loss(&set(&[1.0, 0.0], &[-1.0, -2.0])).unwrap() - -0.5).abs() < 1e-12);
        let err = kscst_loss(&set(&[1.0, 0.0], &[-1.0, f64::NEG_INFINITY])).unwrap_err();
        assert!(err.to_string().contains("candidate 1"), "{err}");
    }

    #[test]
    fn k_below_two_is_rejected() {
        let cfg = TrainConfig {
            k: 1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn loss_is_shift_invariant_and_scale_linear(
            pairs in prop::collection::vec((-5.0f64..5.0, -20.0f64..0.0), 2..10),
            shift in -10.0f64..10.0,
            scale in 0.01f64..10.0,
        ) {
            let r: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let l: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let base = kscst_loss(&set(&r, &l)).unwrap();
            let shifted: Vec<f64> = r.iter().map(|x| x + shift).collect();
            prop_assert!((kscst_loss(&set(&shifted, &l)).unwrap() - base).abs() < 1e-9 * (1.0 + base.abs()));
            let scaled: Vec<f64> = r.iter().map(|x| x * scale).collect();
            prop_assert!((kscst_loss(&set(&scaled, &l)).unwrap() - scale * base).abs() < 1e-9 * (1.0 + base.abs()));
        }
    }

    #[test]
    fn one_step_favours_above_mean_samples() {
        let mut policy = tiny(16);
        let reward = TargetTokenReward::new("c");
        let mut rng = step_rng(3, 1);
        let cands = policy.sample("a b", 8, &mut rng).unwrap();
        let texts: Vec<&str> = cands.iter().map(|c| c.text.as_str()).collect();
        let rewards = reward.score("a b", &texts).unwrap();
        let s = SampleSet::new("a b", cands, rewards).unwrap();
        let best = (0..s.k()).max_by(|&a, &b| s.rewards[a].total.total_cmp(&s.rewards[b].total)).unwrap();
        let worst = (0..s.k()).min_by(|&a, &b| s.rewards[a].total.total_cmp(&s.rewards[b].total)).unwrap();
        assert!(s.rewards[best].total > s.rewards[worst].total, "need reward variance");
        let lp = |p: &TinyPolicy, j: usize| p.score("a b", &s.candidates[j].tokens).unwrap().iter().sum::<f64>();
        let (b0, w0) = (lp(&policy, best), lp(&policy, worst));
        let mut grad = policy.parameters().zeros_like();
        accumulate_batch_gradient(&policy, std::slice::from_ref(&s), &mut grad).unwrap();
        let mut opt = OptimizerState::new(
            OptimizerConfig {
                learning_rate: 1e-3,
                ..Default::default()
            },
            policy.parameters(),
        );
        apply_gradient_step(&mut policy, &grad, &mut opt);
        assert!(lp(&policy, best) > b0);
        assert!(lp(&policy, worst) < w0);
    }

    struct Failing;
    impl RewardFunction for Failing {
        fn score(&self, _: &str, _: &[&str]) -> Result<Vec<RewardBreakdown>> {
            Err(Error::BackendUnavailable {
                backend_id: "failing".into(),
                reason: "down".into(),
            })
        }
    }

    #[test]
    fn failing_scorer_leaves_policy_untouched() {
        let mut policy = tiny(8);
        let before = policy.clone();
        let cfg = TrainConfig::default();
        let mut opt = OptimizerState::new(cfg.optimizer_config(), policy.parameters());
        let opt_before = opt.clone();
        assert!(train_step(&mut policy, &Failing, &mut opt, &["a b"], &cfg, 1).is_err());
        assert_eq!(policy, before);
        assert_eq!(opt, opt_before);
    }

    #[test]
    fn zero_weight_reward_leaves_parameters() {
        let mut policy = tiny(8);
        let before = policy.parameters().clone();
        let mut cfg = TrainConfig::default();
        cfg.reward.weights = RewardWeights::ZERO;
        cfg.reward.components.guardrails.enabled = false;
        let reward = CompositeReward::new(Scorers::stubs(), cfg.reward.clone());
        let mut opt = OptimizerState::new(cfg.optimizer_config(), policy.parameters());
        let rec = train_step(&mut policy, &reward, &mut opt, &["a b c", "d e"], &cfg, 1).unwrap();
        assert_eq!(rec.loss, 0.0);
        assert_eq!(policy.parameters(), &before);
    }

    #[test]
    fn max_steps_zero_writes_initial_checkpoint_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut policy = tiny(8);
        let cfg = TrainConfig {
            max_steps: 0,
            ..Default::default()
        };
        let s = train(&mut policy, &TargetTokenReward::new("a"), &["a b".into()], &cfg, "h", dir.path(), None).unwrap();
        assert_eq!(s.checkpoints, vec![checkpoint_dir(dir.path(), 0)]);
        assert!(s.records.is_empty());
    }

    #[test]
    fn resume_continues_numbering_and_reproduces_logs() {
        let inputs: Vec<String> = ["a b c", "b c d", "e a", "d d b", "c"].iter().map(|s| s.to_string()).collect();
        let reward = TargetTokenReward::new("e");
        let cfg = TrainConfig {
            max_steps: 6,
            checkpoint_every: 3,
            ..Default::default()
        };
        let full = tempfile::tempdir().unwrap();
        train(&mut tiny(8), &reward, &inputs, &cfg, "h", full.path(), None).unwrap();

        let part = tempfile::tempdir().unwrap();
        let short = TrainConfig { max_steps: 3, ..cfg.clone() };
        train(&mut tiny(8), &reward, &inputs, &short, "h", part.path(), None).unwrap();
        let mut resumed = tiny(8);
        let s = train(
            &mut resumed,
            &reward,
            &inputs,
            &cfg,
            "h",
            part.path(),
            Some(&checkpoint_dir(part.path(), 3)),
        )
        .unwrap();
        assert_eq!(s.first_step, 4);
        let a = std::fs::read(full.path().join(LOG_FILE)).unwrap();
        let b = std::fs::read(part.path().join(LOG_FILE)).unwrap();
        assert_eq!(a, b);

        let err = train(
            &mut tiny(8),
            &reward,
            &inputs,
            &cfg,
            "other",
            part.path(),
            Some(&checkpoint_dir(part.path(), 3)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ConfigHashMismatch { .. }));
    }
}
