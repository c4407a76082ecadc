//! End-to-end evaluation: rewrite every needle comment, rebuild the needle
//! profiles, and attack them with attribution and verification adversaries
//! next to meaning and soundness metrics.

pub mod report;
pub mod sweep;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::verification::{c_at_1_problems, calibrate_on_pairs, CALIBRATION_LENGTHS};
use crate::adversaries::{
    attribute, calibration_pairs, mrr, recall_at_k, verify, CngModel, ProfilePair, RetrievalResult,
    VerificationProblem, Weighting,
};
use crate::baselines::{Rewriter, RewriterSpec};
use crate::corpus::{normalize, AuthorProfile, Comment, EvalSplit};
use crate::error::{Error, Result};
use crate::scorers::{cosine, Scorers, ScorersConfig};
use crate::text::char_len;

pub use report::{emit_report, emit_sweep, render_table, write_run, ReportFormat};
pub use sweep::{profile_length_sweep, SweepPoint};

pub const DEFAULT_RECALL_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeedleMode {
    /// Needle comments go to the rewriter as stored.
    #[default]
    Raw,
    /// Needle comments are normalized (no lowercasing) before rewriting.
    Normalized,
}

/// Which verification pairs are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationComposition {
    /// Each rewritten needle profile against its author's unmodified profile.
    #[default]
    SameOnly,
    /// Additionally, each against one other author's unmodified profile.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifierConfig {
    pub n: usize,
    pub weighting: Weighting,
    pub non_answer_radius: f64,
    /// Profile lengths mixed into the calibration pairs.
    pub calibration_lengths: Vec<usize>,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        let m = CngModel::default();
        VerifierConfig {
            n: m.n,
            weighting: m.weighting,
            non_answer_radius: m.non_answer_radius,
            calibration_lengths: CALIBRATION_LENGTHS.to_vec(),
        }
    }
}

impl VerifierConfig {
    pub fn model(&self) -> CngModel {
        CngModel {
            n: self.n,
            weighting: self.weighting,
            non_answer_radius: self.non_answer_radius,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub seed: u64,
    /// Evaluation split written by `build-eval-split`.
    pub split: PathBuf,
    /// Run directory for reports and the manifest.
    pub out_dir: PathBuf,
    pub needle_mode: NeedleMode,
    pub verification: VerificationComposition,
    pub recall_k: usize,
    pub verifier: VerifierConfig,
    pub sweep_lengths: Vec<usize>,
    pub scorers: ScorersConfig,
    pub rewriters: BTreeMap<String, RewriterSpec>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 0,
            split: PathBuf::from("split.json"),
            out_dir: PathBuf::from("runs/bench"),
            needle_mode: NeedleMode::Raw,
            verification: VerificationComposition::SameOnly,
            recall_k: DEFAULT_RECALL_K,
            verifier: VerifierConfig::default(),
            sweep_lengths: CALIBRATION_LENGTHS.to_vec(),
            scorers: ScorersConfig::default(),
            rewriters: BTreeMap::from([("copy".to_string(), RewriterSpec::Copy)]),
        }
    }
}

/// One row of the results table. Every metric is either present or listed
/// in `skipped` with a reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub system_id: String,
    pub config_hash: String,
    pub r_at_8: Option<f64>,
    pub mrr: Option<f64>,
    pub cng_c_at_1: Option<f64>,
    pub luar_dist: Option<f64>,
    pub sbert_self: Option<f64>,
    pub cola_out: Option<f64>,
    pub len_ratio: Option<f64>,
    pub skipped: BTreeMap<String, String>,
    pub needle_mode: NeedleMode,
    pub verification: VerificationComposition,
    /// Interpretation notes carried with the numbers.
    pub notes: Vec<String>,
    pub n_queries: usize,
    pub n_comments: usize,
}

pub const METRIC_NAMES: [&str; 7] = ["r_at_8", "mrr", "cng_c_at_1", "luar_dist", "sbert_self", "cola_out", "len_ratio"];

impl MetricsReport {
    fn empty(system_id: &str, config_hash: &str, cfg: &BenchConfig) -> Self {
        MetricsReport {
            system_id: system_id.to_string(),
            config_hash: config_hash.to_string(),
            r_at_8: None,
            mrr: None,
            cng_c_at_1: None,
            luar_dist: None,
            sbert_self: None,
            cola_out: None,
            len_ratio: None,
            skipped: BTreeMap::new(),
            needle_mode: cfg.needle_mode,
            verification: cfg.verification,
            notes: vec![
                "sbert_self uses raw cosine; negative values clamp only inside the reward".into(),
                "c@1 = (n_correct + n_nonanswer * n_correct / n) / n".into(),
            ],
            n_queries: 0,
            n_comments: 0,
        }
    }

    fn skip_all(&mut self, reason: &str) {
        for m in METRIC_NAMES {
            self.skipped.insert(m.to_string(), reason.to_string());
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "r_at_8" => self.r_at_8,
            "mrr" => self.mrr,
            "cng_c_at_1" => self.cng_c_at_1,
            "luar_dist" => self.luar_dist,
            "sbert_self" => self.sbert_self,
            "cola_out" => self.cola_out,
            "len_ratio" => self.len_ratio,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    /// Mean semantic cosine, ×100.
    pub sbert_self: f64,
    /// Percentage of outputs judged acceptable.
    pub cola_out: f64,
    /// Mean output/input character-length ratio, ×100, over non-empty inputs.
    pub len_ratio: f64,
}

pub fn quality_metrics(scorers: &Scorers, pairs: &[(&str, &str)]) -> Result<QualityMetrics> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no (input, output) pairs".into()));
    }
    let xs: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<&str> = pairs.iter().map(|p| p.1).collect();
    let ex = scorers.embed_semantic(&xs)?;
    let ey = scorers.embed_semantic(&ys)?;
    let mut sim = 0.0;
    for (a, b) in ex.iter().zip(&ey) {
        sim += cosine(&a.vector, &b.vector)?.value;
    }
    let judged = scorers.judge_acceptability(&ys)?;
    let acceptable = judged.iter().filter(|j| j.label).count();
    let ratios: Vec<f64> = pairs
        .iter()
        .filter(|p| char_len(p.0) > 0)
        .map(|p| char_len(p.1) as f64 / char_len(p.0) as f64)
        .collect();
    let n = pairs.len() as f64;
    Ok(QualityMetrics {
        sbert_self: 100.0 * sim / n,
        cola_out: 100.0 * acceptable as f64 / n,
        len_ratio: if ratios.is_empty() {
            0.0
        } else {
            100.0 * ratios.iter().sum::<f64>() / ratios.len() as f64
        },
    })
}

/// Per-system raw adversary outputs, kept so aggregates can be re-derived.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemRaw {
    pub retrieval: Vec<RetrievalResult>,
    pub verification: Vec<VerificationProblem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchManifest {
    pub config_hash: String,
    pub seed: u64,
    pub scorers: BTreeMap<String, String>,
    pub rewriters: Vec<String>,
    pub verifier: CngModel,
    pub needles: usize,
    pub haystack: usize,
    pub comments_per_author: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub manifest: BenchManifest,
    /// Ordered by system id.
    pub reports: Vec<MetricsReport>,
    pub raw: BTreeMap<String, SystemRaw>,
}

/// Calibrates the verifier on unmodified haystack profiles, preferring
/// authors that are not needles.
pub fn calibrate_verifier(split: &EvalSplit, cfg: &BenchConfig) -> Result<CngModel> {
    let needle_ids: std::collections::BTreeSet<&str> = split.needles.iter().map(|p| p.author_id.as_str()).collect();
    let others: Vec<AuthorProfile> = split
        .haystack
        .iter()
        .filter(|p| !needle_ids.contains(p.author_id.as_str()))
        .cloned()
        .collect();
    let pool = if others.len() >= 2 { others } else { split.haystack.clone() };
    let pairs = calibration_pairs(&pool, &cfg.verifier.calibration_lengths, cfg.seed);
    let mut model = cfg.verifier.model();
    if model.weighting == Weighting::TfIdf {
        model.fit_idf(pool.iter().map(|p| p.concatenated_text.as_str()));
    }
    calibrate_on_pairs(&model, &pairs)
}

/// Deterministic per-comment random stream.
fn comment_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Needle comments in profile order with the configured preprocessing.
pub fn needle_inputs(split: &EvalSplit, mode: NeedleMode) -> Vec<Comment> {
    split
        .needles
        .iter()
        .flat_map(|p| p.comments.iter())
        .map(|c| match mode {
            NeedleMode::Raw => c.clone(),
            NeedleMode::Normalized => Comment {
                text: normalize(&c.text, false),
                ..c.clone()
            },
        })
        .collect()
}

/// Rewrites every comment; comment `i` draws from stream `i` of the seed.
pub fn obfuscate_comments(rewriter: &dyn Rewriter, comments: &[Comment], seed: u64) -> Result<Vec<Comment>> {
    let one = |(i, c): (usize, &Comment)| -> Result<Comment> {
        let text = rewriter.rewrite(&c.text, &mut comment_rng(seed, i))?;
        Ok(Comment { text, ..c.clone() })
    };
    if rewriter.concurrent_safe() {
        comments.par_iter().enumerate().map(one).collect()
    } else {
        comments.iter().enumerate().map(one).collect()
    }
}

/// Regroups comments into per-author profiles, keeping first-seen order.
pub fn regroup(comments: &[Comment]) -> Vec<AuthorProfile> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<Comment>> = BTreeMap::new();
    for c in comments {
        if !groups.contains_key(&c.author_id) {
            order.push(c.author_id.clone());
        }
        groups.entry(c.author_id.clone()).or_default().push(c.clone());
    }
    order
        .into_iter()
        .map(|a| {
            let cs = groups.remove(&a).unwrap_or_default();
            AuthorProfile::from_comments(a, cs)
        })
        .collect()
}

/// Verification pairs for rewritten needle profiles against unmodified
/// candidates, each side cut to `length` comments when given.
pub fn verification_pairs(
    needles: &[AuthorProfile],
    split: &EvalSplit,
    composition: VerificationComposition,
    length: Option<usize>,
    seed: u64,
) -> Vec<ProfilePair> {
    let cut = |p: &AuthorProfile| match length {
        Some(l) => p.truncated(l),
        None => p.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for n in needles {
        let Some(same) = split.haystack_profile(&n.author_id) else {
            continue;
        };
        pairs.push(ProfilePair {
            left: cut(n),
            right: cut(same),
            same_author: true,
        });
        if composition == VerificationComposition::Mixed {
            let others: Vec<&AuthorProfile> = split.haystack.iter().filter(|p| p.author_id != n.author_id).collect();
            if let Some(o) = others.choose(&mut rng) {
                pairs.push(ProfilePair {
                    left: cut(n),
                    right: cut(o),
                    same_author: false,
                });
            }
        }
    }
    pairs
}

/// Mean authorship-embedding distance between original and rewritten
/// profiles, ×100.
pub fn luar_distance(scorers: &Scorers, original: &[AuthorProfile], rewritten: &[AuthorProfile]) -> Result<f64> {
    if original.is_empty() {
        return Err(Error::InvalidInput("no profiles".into()));
    }
    let a: Vec<&str> = original.iter().map(|p| p.concatenated_text.as_str()).collect();
    let b: Vec<&str> = rewritten.iter().map(|p| p.concatenated_text.as_str()).collect();
    let ea = scorers.embed_authorship(&a)?;
    let eb = scorers.embed_authorship(&b)?;
    let mut total = 0.0;
    for (x, y) in ea.iter().zip(&eb) {
        total += 1.0 - cosine(&x.vector, &y.vector)?.value;
    }
    Ok(100.0 * total / original.len() as f64)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_system(
    rewriter: &dyn Rewriter,
    split: &EvalSplit,
    inputs: &[Comment],
    originals: &[AuthorProfile],
    scorers: &Scorers,
    verifier: &CngModel,
    cfg: &BenchConfig,
    report: &mut MetricsReport,
) -> Result<SystemRaw> {
    let rewritten = obfuscate_comments(rewriter, inputs, cfg.seed)?;
    let needles = regroup(&rewritten);
    report.n_queries = needles.len();
    report.n_comments = rewritten.len();

    let retrieval = attribute(&needles, &split.haystack, scorers.authorship.as_ref())?;
    report.r_at_8 = Some(recall_at_k(&retrieval, cfg.recall_k));
    report.mrr = Some(mrr(&retrieval));

    let pairs = verification_pairs(&needles, split, cfg.verification, None, cfg.seed);
    let verification = verify(verifier, &pairs);
    report.cng_c_at_1 = Some(100.0 * c_at_1_problems(&verification));

    report.luar_dist = Some(luar_distance(scorers, originals, &needles)?);
    let text_pairs: Vec<(&str, &str)> = inputs
        .iter()
        .zip(&rewritten)
        .map(|(x, y)| (x.text.as_str(), y.text.as_str()))
        .collect();
    let q = quality_metrics(scorers, &text_pairs)?;
    report.sbert_self = Some(q.sbert_self);
    report.cola_out = Some(q.cola_out);
    report.len_ratio = Some(q.len_ratio);
    Ok(SystemRaw { retrieval, verification })
}

/// Runs every rewriter through both adversaries and the quality metrics.
///
/// The split is audited first; leakage aborts the run. A rewriter or scorer
/// failure turns that system's row into a skipped row instead.
pub fn run_bench(
    split: &EvalSplit,
    rewriters: &[std::sync::Arc<dyn Rewriter>],
    scorers: &Scorers,
    cfg: &BenchConfig,
    config_hash: &str,
) -> Result<BenchOutcome> {
    split.audit()?;
    if split.needles.is_empty() {
        return Err(Error::InvalidInput("split has no needles".into()));
    }
    let verifier = calibrate_verifier(split, cfg)?;
    let inputs = needle_inputs(split, cfg.needle_mode);
    let originals = regroup(&inputs);

    let mut sorted: Vec<&std::sync::Arc<dyn Rewriter>> = rewriters.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    let mut reports = Vec::new();
    let mut raw = BTreeMap::new();
    for r in sorted {
        let mut report = MetricsReport::empty(r.id(), config_hash, cfg);
        match evaluate_system(r.as_ref(), split, &inputs, &originals, scorers, &verifier, cfg, &mut report) {
            Ok(sys) => {
                raw.insert(r.id().to_string(), sys);
            }
            Err(e) => {
                log::warn!("system {} skipped: {e}", r.id());
                report = MetricsReport::empty(r.id(), config_hash, cfg);
                report.skip_all(&e.to_string());
            }
        }
        reports.push(report);
    }
    Ok(BenchOutcome {
        manifest: BenchManifest {
            config_hash: config_hash.to_string(),
            seed: cfg.seed,
            scorers: scorers.describe().into_iter().collect(),
            rewriters: reports.iter().map(|r| r.system_id.clone()).collect(),
            verifier,
            needles: split.needles.len(),
            haystack: split.haystack.len(),
            comments_per_author: split.comments_per_author,
        },
        reports,
        raw,
    })
}
