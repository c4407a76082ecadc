//! Comment ingestion, text normalization, author profiles and the
//! needle/haystack evaluation split.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::text::word_count;

/// Minimum pseudo-document length used for training profiles.
pub const DEFAULT_MIN_WORDS: usize = 250;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub author_id: String,
    pub subreddit: String,
    pub text: String,
    pub source_id: String,
}

impl Comment {
    pub fn new(
        author_id: impl Into<String>,
        subreddit: impl Into<String>,
        text: impl Into<String>,
        source_id: impl Into<String>,
    ) -> Self {
        Comment {
            author_id: author_id.into(),
            subreddit: subreddit.into(),
            text: text.into(),
            source_id: source_id.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.author_id.is_empty() {
            return Err(Error::EmptyAuthor {
                source_id: self.source_id.clone(),
            });
        }
        if self.text.trim().is_empty() {
            return Err(Error::InvalidInput(format!(
                "comment {:?} has empty text",
                self.source_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_id: String,
    /// Shared community key for training profiles; `None` for evaluation
    /// profiles, which may span communities.
    pub subreddit: Option<String>,
    pub comments: Vec<Comment>,
    pub concatenated_text: String,
    pub word_count: usize,
    /// Leftover accumulation that never reached the word threshold.
    pub short_tail: bool,
}

impl AuthorProfile {
    /// Concatenates `comments` (in the given order) with a single space.
    pub fn from_comments(author_id: impl Into<String>, comments: Vec<Comment>) -> Self {
        let concatenated_text = comments
            .iter()
            .map(|c| c.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let subreddit = match comments.first() {
            Some(first) if comments.iter().all(|c| c.subreddit == first.subreddit) => {
                Some(first.subreddit.clone())
            }
            _ => None,
        };
        AuthorProfile {
            author_id: author_id.into(),
            subreddit,
            word_count: word_count(&concatenated_text),
            concatenated_text,
            comments,
            short_tail: false,
        }
    }

    /// Same author, but only the first `n` comments.
    pub fn truncated(&self, n: usize) -> Self {
        let mut p = AuthorProfile::from_comments(
            self.author_id.clone(),
            self.comments.iter().take(n).cloned().collect(),
        );
        p.short_tail = self.short_tail;
        p
    }

    pub fn texts(&self) -> Vec<&str> {
        self.comments.iter().map(|c| c.text.as_str()).collect()
    }

    pub fn to_record(&self) -> ProfileRecord {
        ProfileRecord {
            author_id: self.author_id.clone(),
            texts: self.comments.iter().map(|c| c.text.clone()).collect(),
            word_count: self.word_count,
            short_tail: self.short_tail,
        }
    }
}

/// On-disk profile line: `{author_id, texts, word_count, short_tail}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub author_id: String,
    pub texts: Vec<String>,
    pub word_count: usize,
    #[serde(default)]
    pub short_tail: bool,
}

impl ProfileRecord {
    /// Rebuilds a profile. Comments get synthetic source ids
    /// `<author_id>#<index>` since the record format does not carry them.
    pub fn into_profile(self) -> AuthorProfile {
        let comments = self
            .texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Comment::new(self.author_id.clone(), "", t, format!("{}#{i}", self.author_id)))
            .collect();
        let mut p = AuthorProfile::from_comments(self.author_id, comments);
        p.subreddit = None;
        p.short_tail = self.short_tail;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSplit {
    pub needles: Vec<AuthorProfile>,
    pub haystack: Vec<AuthorProfile>,
    pub comments_per_author: usize,
}

impl EvalSplit {
    /// Checks every structural invariant: disjoint source ids, needle
    /// authors present in the haystack, and per-author comment counts.
    pub fn audit(&self) -> Result<()> {
        let needle_ids: HashSet<&str> = self
            .needles
            .iter()
            .flat_map(|p| p.comments.iter().map(|c| c.source_id.as_str()))
            .collect();
        let shared = self
            .haystack
            .iter()
            .flat_map(|p| p.comments.iter())
            .filter(|c| needle_ids.contains(c.source_id.as_str()))
            .count();
        if shared > 0 {
            return Err(Error::Leakage(shared));
        }
        let hay_authors: HashSet<&str> = self.haystack.iter().map(|p| p.author_id.as_str()).collect();
        if hay_authors.len() != self.haystack.len() {
            return Err(Error::InvalidInput("duplicate author ids in haystack".into()));
        }
        if let Some(p) = self
            .needles
            .iter()
            .find(|p| !hay_authors.contains(p.author_id.as_str()))
        {
            return Err(Error::InvalidInput(format!(
                "needle author {:?} missing from haystack",
                p.author_id
            )));
        }
        if let Some(p) = self
            .needles
            .iter()
            .chain(&self.haystack)
            .find(|p| p.comments.len() != self.comments_per_author)
        {
            return Err(Error::InvalidInput(format!(
                "author {:?} has {} comments, expected {}",
                p.author_id,
                p.comments.len(),
                self.comments_per_author
            )));
        }
        Ok(())
    }

    pub fn haystack_profile(&self, author_id: &str) -> Option<&AuthorProfile> {
        self.haystack.iter().find(|p| p.author_id == author_id)
    }
}

fn is_newline(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}')
}

/// Lowercases (optionally), turns newlines into spaces, collapses runs of
/// spaces and runs of one repeated punctuation character, and trims.
///
/// Mixed punctuation runs such as `?!` are kept. Characters whose lowercase
/// form expands to several characters are left unchanged so the output is
/// never longer than the input.
pub fn normalize(text: &str, lowercase: bool) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    for raw in text.chars() {
        let mut c = if is_newline(raw) { ' ' } else { raw };
        if lowercase {
            let mut lower = c.to_lowercase();
            if let (Some(l), None) = (lower.next(), lower.next()) {
                c = l;
            }
        }
        if let Some(p) = prev {
            if p == c && (c == ' ' || c.is_ascii_punctuation()) {
                continue;
            }
        }
        if c == ' ' && prev.is_none() {
            continue;
        }
        out.push(c);
        prev = Some(c);
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Groups comments by `(author_id, subreddit)` and accumulates each group in
/// input order into profiles that close once they reach `min_words`.
/// Leftovers below the threshold are emitted with `short_tail` set.
///
/// Output order: profiles of a group appear in the order the group was first
/// seen, closed profiles before the group's tail.
pub fn build_profiles<I>(comments: I, min_words: usize) -> Result<Vec<AuthorProfile>>
where
    I: IntoIterator<Item = Comment>,
{
    if min_words == 0 {
        return Err(Error::InvalidInput("min_words must be positive".into()));
    }
    let mut group_order: Vec<(String, String)> = Vec::new();
    let mut open: BTreeMap<(String, String), (Vec<Comment>, usize)> = BTreeMap::new();
    let mut closed: BTreeMap<(String, String), Vec<AuthorProfile>> = BTreeMap::new();

    for comment in comments {
        comment.validate()?;
        let key = (comment.author_id.clone(), comment.subreddit.clone());
        let entry = open.entry(key.clone()).or_insert_with(|| {
            group_order.push(key.clone());
            (Vec::new(), 0)
        });
        entry.1 += word_count(&comment.text);
        entry.0.push(comment);
        if entry.1 >= min_words {
            let (done, _) = std::mem::take(entry);
            closed
                .entry(key.clone())
                .or_default()
                .push(AuthorProfile::from_comments(key.0, done));
        }
    }

    let mut out = Vec::new();
    for key in group_order {
        out.extend(closed.remove(&key).unwrap_or_default());
        if let Some((rest, _)) = open.remove(&key) {
            if !rest.is_empty() {
                let mut tail = AuthorProfile::from_comments(key.0.clone(), rest);
                tail.short_tail = true;
                out.push(tail);
            }
        }
    }
    Ok(out)
}

/// Samples `n_needle_authors` authors with at least `2 * comments_per_author`
/// comments; each contributes disjoint comment sets to the needle and the
/// haystack side. Every other author with enough comments joins the
/// haystack. Deterministic under `seed`.
pub fn build_eval_split(
    comments: &[Comment],
    n_needle_authors: usize,
    comments_per_author: usize,
    seed: u64,
) -> Result<EvalSplit> {
    if comments_per_author == 0 {
        return Err(Error::InvalidInput("comments_per_author must be positive".into()));
    }
    let mut by_author: BTreeMap<&str, Vec<&Comment>> = BTreeMap::new();
    let mut seen_sources = HashSet::new();
    for c in comments {
        c.validate()?;
        if !seen_sources.insert(c.source_id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate source_id {:?}", c.source_id)));
        }
        by_author.entry(c.author_id.as_str()).or_default().push(c);
    }

    let need = 2 * comments_per_author;
    let mut eligible: Vec<&str> = by_author
        .iter()
        .filter(|(_, cs)| cs.len() >= need)
        .map(|(a, _)| *a)
        .collect();
    if eligible.len() < n_needle_authors {
        let short = by_author
            .iter()
            .filter(|(_, cs)| cs.len() < need)
            .map(|(a, cs)| (a.to_string(), cs.len()))
            .collect();
        return Err(Error::InsufficientComments(short));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eligible.shuffle(&mut rng);
    let needle_authors: BTreeSet<&str> = eligible.into_iter().take(n_needle_authors).collect();

    let mut needles = Vec::new();
    let mut haystack = Vec::new();
    for (author, cs) in &by_author {
        if cs.len() < comments_per_author {
            continue;
        }
        let mut idx: Vec<usize> = (0..cs.len()).collect();
        idx.shuffle(&mut rng);
        let pick = |slice: &[usize]| -> Vec<Comment> {
            let mut s = slice.to_vec();
            s.sort_unstable();
            s.into_iter().map(|i| cs[i].clone()).collect()
        };
        if needle_authors.contains(author) {
            needles.push(AuthorProfile::from_comments(
                *author,
                pick(&idx[..comments_per_author]),
            ));
            haystack.push(AuthorProfile::from_comments(
                *author,
                pick(&idx[comments_per_author..need]),
            ));
        } else {
            haystack.push(AuthorProfile::from_comments(*author, pick(&idx[..comments_per_author])));
        }
    }
    let split = EvalSplit {
        needles,
        haystack,
        comments_per_author,
    };
    split.audit()?;
    Ok(split)
}

pub fn read_comments(path: impl AsRef<Path>) -> Result<Vec<Comment>> {
    jsonl::read(path)
}

pub fn write_profiles(path: impl AsRef<Path>, profiles: &[AuthorProfile]) -> Result<()> {
    let records: Vec<ProfileRecord> = profiles.iter().map(AuthorProfile::to_record).collect();
    jsonl::write(path, &records)
}

pub fn read_profiles(path: impl AsRef<Path>) -> Result<Vec<AuthorProfile>> {
    Ok(jsonl::read::<ProfileRecord>(path)?
        .into_iter()
        .map(ProfileRecord::into_profile)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words_n(n: usize, tag: &str) -> String {
        (0..n).map(|i| format!("{tag}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn normalize_applies_all_rules() {
        assert_eq!(normalize("A  B\n\nC!!", true), "a b c!");
        assert_eq!(normalize("already clean", true), "already clean");
        assert_eq!(normalize("Keep Case??", false), "Keep Case?");
        assert_eq!(normalize("mixed ?! stays", true), "mixed ?! stays");
        assert_eq!(normalize("", true), "");
    }

    #[test]
    fn profiles_accumulate_until_threshold() {
        let cs: Vec<Comment> = (0..3)
            .map(|i| Comment::new("a", "r", words_n(100, "w"), format!("s{i}")))
            .collect();
        let ps = build_profiles(cs, 250).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].word_count, 300);
        assert_eq!(ps[0].comments.len(), 3);
        assert!(!ps[0].short_tail);
    }

    #[test]
    fn single_long_comment_closes_immediately() {
        let ps = build_profiles(vec![Comment::new("a", "r", words_n(260, "w"), "s")], 250).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].comments.len(), 1);
    }

    #[test]
    fn leftover_is_flagged() {
        let cs = (0..2).map(|i| Comment::new("a", "r", words_n(100, "w"), format!("s{i}")));
        let ps = build_profiles(cs, 250).unwrap();
        assert_eq!(ps.len(), 1);
        assert!(ps[0].short_tail);
        assert_eq!(ps[0].word_count, 200);
    }

    #[test]
    fn groups_split_by_subreddit() {
        let cs = vec![
            Comment::new("a", "r1", words_n(200, "w"), "1"),
            Comment::new("a", "r2", words_n(200, "w"), "2"),
            Comment::new("a", "r1", words_n(60, "w"), "3"),
        ];
        let ps = build_profiles(cs, 250).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].subreddit.as_deref(), Some("r1"));
        assert_eq!(ps[0].word_count, 260);
        assert!(ps[1].short_tail);
    }

    #[test]
    fn empty_author_is_rejected() {
        let err = build_profiles(vec![Comment::new("", "r", "text", "s1")], 250).unwrap_err();
        assert!(matches!(err, Error::EmptyAuthor { .. }));
        assert!(build_profiles(Vec::new(), 0).is_err());
    }

    #[test]
    fn minimal_split() {
        let cs = vec![
            Comment::new("a", "r", "one", "1"),
            Comment::new("a", "r", "two", "2"),
            Comment::new("b", "r", "three", "3"),
            Comment::new("b", "r", "four", "4"),
        ];
        let split = build_eval_split(&cs, 2, 1, 7).unwrap();
        assert_eq!(split.needles.len(), 2);
        assert_eq!(split.haystack.len(), 2);
        split.audit().unwrap();
        assert_eq!(split, build_eval_split(&cs, 2, 1, 7).unwrap());
    }

    #[test]
    fn split_names_short_authors() {
        let cs = vec![
            Comment::new("a", "r", "one", "1"),
            Comment::new("a", "r", "two", "2"),
            Comment::new("b", "r", "three", "3"),
        ];
        match build_eval_split(&cs, 2, 1, 0) {
            Err(Error::InsufficientComments(short)) => {
                assert_eq!(short, vec![("b".to_string(), 1)]);
            }
            other => panic!("expected shortfall, got {other:?}"),
        }
    }

    #[test]
    fn split_profiles_keep_source_order() {
        let cs: Vec<Comment> = (0..10)
            .map(|i| Comment::new("a", "r", format!("c{i}"), format!("{i:02}")))
            .collect();
        let split = build_eval_split(&cs, 1, 4, 3).unwrap();
        for p in split.needles.iter().chain(&split.haystack) {
            let ids: Vec<&str> = p.comments.iter().map(|c| c.source_id.as_str()).collect();
            let mut sorted = ids.clone();
            sorted.sort();
            assert_eq!(ids, sorted);
        }
    }

    #[test]
    fn profile_records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let cs = (0..2).map(|i| Comment::new("a", "r", words_n(100, "w"), format!("s{i}")));
        let ps = build_profiles(cs, 250).unwrap();
        write_profiles(&path, &ps).unwrap();
        let back = read_profiles(&path).unwrap();
        assert_eq!(back[0].concatenated_text, ps[0].concatenated_text);
        assert_eq!(back[0].word_count, ps[0].word_count);
        assert!(back[0].short_tail);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_shrinking(s in "[ a-zA-Z!?.,\n\r\tÀ-ÿİ]{0,60}", lower in any::<bool>()) {
            let once = normalize(&s, lower);
            prop_assert_eq!(normalize(&once, lower), once.clone());
            prop_assert!(once.chars().count() <= s.chars().count());
            prop_assert!(!once.contains('\n'));
            prop_assert!(!once.contains("  "));
        }

        #[test]
        fn word_count_matches_retokenization(lens in proptest::collection::vec(1usize..120, 1..20)) {
            let cs: Vec<Comment> = lens.iter().enumerate()
                .map(|(i, &n)| Comment::new("a", "r", words_n(n, "t"), format!("{i}")))
                .collect();
            let ps = build_profiles(cs, 250).unwrap();
            let total: usize = ps.iter().map(|p| p.comments.len()).sum();
            prop_assert_eq!(total, lens.len());
            for p in &ps {
                prop_assert_eq!(p.word_count, word_count(&p.concatenated_text));
                prop_assert!(p.short_tail || p.word_count >= 250);
            }
        }
    }
}
