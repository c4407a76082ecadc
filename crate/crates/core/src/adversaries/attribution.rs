use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::AuthorProfile;
use crate::error::{Error, Result};
use crate::scorers::{cosine, Embedder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub query_author_id: String,
    /// Haystack authors by descending similarity, ties by author id.
    pub ranked_author_ids: Vec<String>,
    /// Similarity of each entry in `ranked_author_ids`.
    pub similarities: Vec<f64>,
    /// 1-based rank of the query author; `None` if absent from the haystack.
    pub true_rank: Option<usize>,
}

/// Ranks every haystack profile against every needle profile by cosine of
/// their embeddings.
pub fn attribute(
    needles: &[AuthorProfile],
    haystack: &[AuthorProfile],
    embedder: &dyn Embedder,
) -> Result<Vec<RetrievalResult>> {
    let mut seen = HashSet::new();
    for p in haystack {
        if !seen.insert(p.author_id.as_str()) {
            return Err(Error::InvalidInput(format!(
                "duplicate haystack author {:?}",
                p.author_id
            )));
        }
    }
    let hay_texts: Vec<&str> = haystack.iter().map(|p| p.concatenated_text.as_str()).collect();
    let needle_texts: Vec<&str> = needles.iter().map(|p| p.concatenated_text.as_str()).collect();
    let hay = embedder.embed(&hay_texts)?;
    let queries = embedder.embed(&needle_texts)?;

    let rank_one = |(needle, q): (&AuthorProfile, &crate::scorers::Embedding)| -> Result<RetrievalResult> {
        let mut scored = Vec::with_capacity(haystack.len());
        for (p, h) in haystack.iter().zip(&hay) {
            scored.push((cosine(&q.vector, &h.vector)?.value, p.author_id.as_str()));
        }
        scored.sort_by(|a, b| match b.0.total_cmp(&a.0) {
            Ordering::Equal => a.1.cmp(b.1),
            o => o,
        });
        let true_rank = scored
            .iter()
            .position(|(_, id)| *id == needle.author_id)
            .map(|i| i + 1);
        if true_rank.is_none() {
            log::warn!("needle author {:?} is not in the haystack", needle.author_id);
        }
        Ok(RetrievalResult {
            query_author_id: needle.author_id.clone(),
            ranked_author_ids: scored.iter().map(|(_, id)| id.to_string()).collect(),
            similarities: scored.iter().map(|(s, _)| *s).collect(),
            true_rank,
        })
    };
    needles.par_iter().zip(queries.par_iter()).map(rank_one).collect()
}

/// Percentage of queries whose author ranks within the top `k`.
pub fn recall_at_k(results: &[RetrievalResult], k: usize) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    let hits = results
        .iter()
        .filter(|r| matches!(r.true_rank, Some(rank) if rank <= k))
        .count();
    100.0 * hits as f64 / results.len() as f64
}

/// Mean reciprocal rank as a percentage; absent authors contribute 0.
pub fn mrr(results: &[RetrievalResult]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    let sum: f64 = results
        .iter()
        .map(|r| r.true_rank.map_or(0.0, |rank| 1.0 / rank as f64))
        .sum();
    100.0 * sum / results.len() as f64
}
