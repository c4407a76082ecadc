//! Tokenization, n-gram enumeration and stable hashing.

use std::collections::BTreeMap;

/// Whitespace tokens (Unicode whitespace).
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Counts of every character n-gram of `text`, keyed by the n-gram string.
pub fn char_ngrams(text: &str, n: usize) -> BTreeMap<String, u32> {
    let chars: Vec<char> = text.chars().collect();
    let mut counts = BTreeMap::new();
    if n == 0 || chars.len() < n {
        return counts;
    }
    for window in chars.windows(n) {
        *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
    }
    counts
}

/// True if some whitespace-token n-gram occurs at least twice.
pub fn has_repeated_word_ngram(text: &str, n: usize) -> bool {
    let toks = words(text);
    if n == 0 || toks.len() < n {
        return false;
    }
    let mut seen = std::collections::HashSet::with_capacity(toks.len());
    toks.windows(n).any(|w| !seen.insert(w))
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the UTF-8 bytes. Stable across processes and platforms.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
