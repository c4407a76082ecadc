use serde::{Deserialize, Serialize};

use super::{needle_inputs, obfuscate_comments, regroup, verification_pairs, BenchConfig};
use crate::adversaries::verification::c_at_1_problems;
use crate::adversaries::{attribute, mrr, recall_at_k, verify, CngModel};
use crate::baselines::Rewriter;
use crate::corpus::{AuthorProfile, EvalSplit};
use crate::error::{Error, Result};
use crate::scorers::Scorers;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub comments_per_profile: usize,
    pub r_at_8: f64,
    pub mrr: f64,
    /// Percentage, like the other two.
    pub c_at_1: f64,
}

/// Attack strength as a function of needle profile length.
///
/// Needle comments are rewritten once; for each length the rewritten
/// profiles keep only their first `length` comments. Attribution searches
/// the full unmodified haystack; verification compares against the
/// author's unmodified profile cut to the same length.
pub fn profile_length_sweep(
    split: &EvalSplit,
    rewriter: &dyn Rewriter,
    lengths: &[usize],
    scorers: &Scorers,
    verifier: &CngModel,
    cfg: &BenchConfig,
) -> Result<Vec<SweepPoint>> {
    split.audit()?;
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.first() == Some(&0) {
        return Err(Error::InvalidInput("profile length must be at least 1".into()));
    }
    let rewritten = obfuscate_comments(rewriter, &needle_inputs(split, cfg.needle_mode), cfg.seed)?;
    let full = regroup(&rewritten);
    let mut points = Vec::with_capacity(lengths.len());
    for l in lengths {
        let needles: Vec<AuthorProfile> = full.iter().map(|p| p.truncated(l)).collect();
        let retrieval = attribute(&needles, &split.haystack, scorers.authorship.as_ref())?;
        let pairs = verification_pairs(&needles, split, cfg.verification, Some(l), cfg.seed);
        let problems = verify(verifier, &pairs);
        points.push(SweepPoint {
            comments_per_profile: l,
            r_at_8: recall_at_k(&retrieval, cfg.recall_k),
            mrr: mrr(&retrieval),
            c_at_1: 100.0 * c_at_1_problems(&problems),
        });
    }
    Ok(points)
}
