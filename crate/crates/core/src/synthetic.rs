//! Seeded synthetic comment corpora with controllable authorial signal.
//!
//! Every author belongs to a dialect group with its own content vocabulary
//! and owns a handful of private quirk words. Each comment draws content
//! words from the group vocabulary — a `favorite_rate` share of them from the
//! author's own small favorite subset — and, with probability `quirk_rate`,
//! one of the author's quirks. A single comment carries little identifying
//! signal; a profile accumulates it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Comment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub authors: usize,
    pub comments_per_author: usize,
    pub words_per_comment: usize,
    /// Author groups with pairwise disjoint content vocabularies.
    pub dialects: usize,
    pub vocab_per_dialect: usize,
    pub quirks_per_author: usize,
    pub quirk_rate: f64,
    pub favorites_per_author: usize,
    /// Probability that a content word comes from the author's favorites.
    pub favorite_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            authors: 50,
            comments_per_author: 32,
            words_per_comment: 12,
            dialects: 1,
            vocab_per_dialect: 200,
            quirks_per_author: 4,
            quirk_rate: 0.5,
            favorites_per_author: 8,
            favorite_rate: 0.3,
            seed: 0,
        }
    }
}

const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

/// A pronounceable nonce word; distinct indices give distinct words.
fn nonce(mut i: usize, tag: &str) -> String {
    let mut w = String::from(tag);
    loop {
        w.push_str(ONSETS[i % ONSETS.len()]);
        i /= ONSETS.len();
        w.push_str(VOWELS[i % VOWELS.len()]);
        i /= VOWELS.len();
        if i == 0 {
            return w;
        }
    }
}

/// Content vocabulary of one dialect group.
pub fn dialect_vocabulary(dialect: usize, size: usize) -> Vec<String> {
    (0..size).map(|i| nonce(i, &format!("{}", (b'a' + (dialect % 26) as u8) as char))).collect()
}

/// Author id for author `i`.
pub fn author_id(i: usize) -> String {
    format!("author{i:04}")
}

/// Dialect group of author `i`.
pub fn dialect_of(i: usize, dialects: usize) -> usize {
    i % dialects.max(1)
}

/// All comments, grouped by author in author order, with unique source ids.
pub fn synthetic_comments(cfg: &SyntheticConfig) -> Vec<Comment> {
    let vocabs: Vec<Vec<String>> = (0..cfg.dialects.max(1))
        .map(|d| dialect_vocabulary(d, cfg.vocab_per_dialect.max(1)))
        .collect();
    let mut out = Vec::with_capacity(cfg.authors * cfg.comments_per_author);
    for a in 0..cfg.authors {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(a as u64);
        let vocab = &vocabs[dialect_of(a, cfg.dialects)];
        let quirks: Vec<String> = (0..cfg.quirks_per_author)
            .map(|q| format!("{}{}", nonce(a * cfg.quirks_per_author + q, "q"), ["!", "~", ";", ".."][q % 4]))
            .collect();
        let favorites: Vec<&String> = vocab.choose_multiple(&mut rng, cfg.favorites_per_author).collect();
        let favorite_rate = if favorites.is_empty() { 0.0 } else { cfg.favorite_rate.clamp(0.0, 1.0) };
        let id = author_id(a);
        for c in 0..cfg.comments_per_author {
            let mut words: Vec<String> = (0..cfg.words_per_comment)
                .map(|_| {
                    let pool: &[&String] = if rng.gen_bool(favorite_rate) { &favorites } else { &[] };
                    match pool.choose(&mut rng) {
                        Some(w) => (*w).clone(),
                        None => vocab.choose(&mut rng).expect("nonempty vocabulary").clone(),
                    }
                })
                .collect();
            if !quirks.is_empty() && rng.gen_bool(cfg.quirk_rate.clamp(0.0, 1.0)) {
                let pos = rng.gen_range(0..=words.len());
                words.insert(pos, quirks.choose(&mut rng).expect("nonempty").clone());
            }
            out.push(Comment::new(
                id.clone(),
                format!("group{}", dialect_of(a, cfg.dialects)),
                words.join(" "),
                format!("{id}-{c:04}"),
            ));
        }
    }
    out
}
