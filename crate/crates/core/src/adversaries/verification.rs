use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorProfile, ProfileRecord};
use crate::error::{Error, Result};
use crate::text::char_ngrams;

pub const DEFAULT_N: usize = 4;
pub const DEFAULT_NON_ANSWER_RADIUS: f64 = 0.05;
/// Profile lengths (in comments) mixed evenly into calibration sets.
pub const CALIBRATION_LENGTHS: [usize; 5] = [1, 2, 4, 8, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    Tf,
    TfIdf,
}

/// Character n-gram cosine verifier with a calibrated decision band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CngModel {
    pub n: usize,
    pub weighting: Weighting,
    pub threshold: f64,
    pub non_answer_radius: f64,
    /// Inverse document frequencies; only used with tf-idf weighting.
    #[serde(default)]
    pub idf: BTreeMap<String, f64>,
}

impl Default for CngModel {
    fn default() -> Self {
        CngModel {
            n: DEFAULT_N,
            weighting: Weighting::Tf,
            threshold: 0.5,
            non_answer_radius: DEFAULT_NON_ANSWER_RADIUS,
            idf: BTreeMap::new(),
        }
    }
}

impl CngModel {
    /// Smoothed idf, `ln((1 + N) / (1 + df)) + 1`, over `documents`.
    pub fn fit_idf<'a>(&mut self, documents: impl IntoIterator<Item = &'a str>) {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0usize;
        for d in documents {
            n_docs += 1;
            for g in char_ngrams(d, self.n).into_keys() {
                *df.entry(g).or_default() += 1;
            }
        }
        self.idf = df
            .into_iter()
            .map(|(g, c)| (g, ((1.0 + n_docs as f64) / (1.0 + c as f64)).ln() + 1.0))
            .collect();
    }

    fn weights(&self, text: &str) -> BTreeMap<String, f64> {
        char_ngrams(text, self.n)
            .into_iter()
            .map(|(g, c)| {
                let w = match self.weighting {
                    Weighting::Tf => c as f64,
                    // unseen n-grams get the maximum idf of the fitted table
                    Weighting::TfIdf => {
                        let max = self.idf.values().cloned().fold(1.0, f64::max);
                        c as f64 * self.idf.get(&g).copied().unwrap_or(max)
                    }
                };
                (g, w)
            })
            .collect()
    }

    pub fn decide(&self, score: f64) -> Decision {
        if score > self.threshold + self.non_answer_radius {
            Decision::Same
        } else if score < self.threshold - self.non_answer_radius {
            Decision::Different
        } else {
            Decision::NonAnswer
        }
    }
}

/// Cosine of weighted character n-gram vectors, clamped to `[0, 1]`.
pub fn cng_similarity(a: &str, b: &str, model: &CngModel) -> f64 {
    let wa = model.weights(a);
    let wb = model.weights(b);
    let dot: f64 = wa.iter().filter_map(|(g, x)| wb.get(g).map(|y| x * y)).sum();
    let na = wa.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = wb.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Same,
    Different,
    NonAnswer,
}

/// Two profiles and whether they share an author.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePair {
    pub left: AuthorProfile,
    pub right: AuthorProfile,
    pub same_author: bool,
}

/// On-disk form of a [`ProfilePair`], one per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub left: ProfileRecord,
    pub right: ProfileRecord,
    pub same_author: bool,
}

impl From<&ProfilePair> for PairRecord {
    fn from(p: &ProfilePair) -> Self {
        PairRecord {
            left: p.left.to_record(),
            right: p.right.to_record(),
            same_author: p.same_author,
        }
    }
}

impl PairRecord {
    pub fn into_pair(self) -> ProfilePair {
        ProfilePair {
            left: self.left.into_profile(),
            right: self.right.into_profile(),
            same_author: self.same_author,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationProblem {
    pub left_author_id: String,
    pub right_author_id: String,
    pub left_comments: usize,
    pub right_comments: usize,
    pub same_author: bool,
    pub score: f64,
    pub decision: Decision,
}

impl VerificationProblem {
    pub fn correct(&self) -> bool {
        matches!(
            (self.decision, self.same_author),
            (Decision::Same, true) | (Decision::Different, false)
        )
    }
}

pub fn verify(model: &CngModel, pairs: &[ProfilePair]) -> Vec<VerificationProblem> {
    pairs
        .par_iter()
        .map(|p| {
            let score = cng_similarity(&p.left.concatenated_text, &p.right.concatenated_text, model);
            VerificationProblem {
                left_author_id: p.left.author_id.clone(),
                right_author_id: p.right.author_id.clone(),
                left_comments: p.left.comments.len(),
                right_comments: p.right.comments.len(),
                same_author: p.same_author,
                score,
                decision: model.decide(score),
            }
        })
        .collect()
}

/// Sets the threshold at the equal-error-rate point of `(score, same)`
/// observations: the midpoint of the gap between consecutive distinct
/// scores where false-accept and false-reject rates are closest (then
/// lowest in total). The radius is shrunk so the band stays inside `[0, 1]`.
pub fn calibrate(model: &CngModel, scored: &[(f64, bool)]) -> Result<CngModel> {
    let n_same = scored.iter().filter(|s| s.1).count();
    let n_diff = scored.len() - n_same;
    if n_same == 0 || n_diff == 0 {
        return Err(Error::SingleClassCalibration);
    }
    let mut scores: Vec<f64> = scored.iter().map(|s| s.0).collect();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    let mut candidates = Vec::with_capacity(scores.len() + 1);
    candidates.push(scores[0] / 2.0);
    candidates.extend(scores.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    candidates.push((scores[scores.len() - 1] + 1.0) / 2.0);

    let rates = |t: f64| {
        let fa = scored.iter().filter(|s| !s.1 && s.0 >= t).count() as f64 / n_diff as f64;
        let fr = scored.iter().filter(|s| s.1 && s.0 < t).count() as f64 / n_same as f64;
        ((fa - fr).abs(), fa + fr)
    };
    let mut best = candidates[0];
    let mut best_key = rates(best);
    for &t in &candidates[1..] {
        let key = rates(t);
        if key.0 < best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
            best = t;
            best_key = key;
        }
    }
    let threshold = best.clamp(0.0, 1.0);
    Ok(CngModel {
        threshold,
        non_answer_radius: model.non_answer_radius.min(threshold).min(1.0 - threshold).max(0.0),
        ..model.clone()
    })
}

/// Scores the pairs with `model`, then calibrates on them.
pub fn calibrate_on_pairs(model: &CngModel, pairs: &[ProfilePair]) -> Result<CngModel> {
    let scored: Vec<(f64, bool)> = verify(model, pairs).iter().map(|p| (p.score, p.same_author)).collect();
    calibrate(model, &scored)
}

/// Balanced calibration pairs at an even mixture of profile lengths.
///
/// Author `i` (in seeded order) is assigned `lengths[i % lengths.len()]`
/// comments, falling back to the longest length its comments allow when
/// split into two disjoint halves. Each author yields one same-author pair
/// (two disjoint comment subsets) and one different-author pair against the
/// next author in the order.
pub fn calibration_pairs(profiles: &[AuthorProfile], lengths: &[usize], seed: u64) -> Vec<ProfilePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut usable: Vec<&AuthorProfile> = profiles.iter().filter(|p| p.comments.len() >= 2).collect();
    usable.shuffle(&mut rng);
    let shuffled: Vec<Vec<_>> = usable
        .iter()
        .map(|p| {
            let mut c = p.comments.clone();
            c.shuffle(&mut rng);
            c
        })
        .collect();
    let mut pairs = Vec::new();
    if usable.len() < 2 || lengths.is_empty() {
        return pairs;
    }
    for (i, p) in usable.iter().enumerate() {
        let want = lengths[i % lengths.len()];
        let half = shuffled[i].len() / 2;
        let l = lengths.iter().copied().filter(|&l| l <= half).min_by_key(|&l| l.abs_diff(want));
        let Some(l) = l else { continue };
        let left = AuthorProfile::from_comments(p.author_id.clone(), shuffled[i][..l].to_vec());
        let right = AuthorProfile::from_comments(p.author_id.clone(), shuffled[i][l..2 * l].to_vec());
        let j = (i + 1) % usable.len();
        let m = l.min(shuffled[j].len());
        let other = AuthorProfile::from_comments(usable[j].author_id.clone(), shuffled[j][..m].to_vec());
        pairs.push(ProfilePair {
            left: left.clone(),
            right,
            same_author: true,
        });
        pairs.push(ProfilePair {
            left,
            right: other,
            same_author: false,
        });
    }
    pairs
}

/// `(n_correct + n_nonanswer * n_correct / n) / n`; 0 for `n = 0`.
pub fn c_at_1_counts(n: usize, n_correct: usize, n_nonanswer: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let nc = n_correct as f64;
    (nc + n_nonanswer as f64 * nc / n) / n
}

/// c@1 over `(decision, gold same-author)` pairs.
pub fn c_at_1(decisions: &[(Decision, bool)]) -> f64 {
    let correct = decisions
        .iter()
        .filter(|d| matches!(d, (Decision::Same, true) | (Decision::Different, false)))
        .count();
    let nonanswers = decisions.iter().filter(|d| d.0 == Decision::NonAnswer).count();
    c_at_1_counts(decisions.len(), correct, nonanswers)
}

pub fn c_at_1_problems(problems: &[VerificationProblem]) -> f64 {
    let d: Vec<(Decision, bool)> = problems.iter().map(|p| (p.decision, p.same_author)).collect();
    c_at_1(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tf(n: usize) -> CngModel {
        CngModel {
            n,
            ..Default::default()
        }
    }

    #[test]
    fn similarity_examples() {
        let m = tf(4);
        assert!((cng_similarity("hello world", "hello world", &m) - 1.0).abs() < 1e-12);
        assert_eq!(cng_similarity("abcd", "wxyz", &m), 0.0);
        // 4-grams {abcd, bcde} vs {bcde, cdef}: one shared of two each
        assert!((cng_similarity("abcde", "bcdef", &m) - 0.5).abs() < 1e-12);
        assert_eq!(cng_similarity("abc", "abc", &m), 0.0);
    }

    #[test]
    fn order_matters_beyond_unigrams() {
        assert!((cng_similarity("ab ba", "ba ab", &tf(1)) - 1.0).abs() < 1e-12);
        assert!(cng_similarity("abc xyz", "xyz abc", &tf(2)) < 1.0);
    }

    #[test]
    fn calibration_examples() {
        let scored = [(0.9, true), (0.95, true), (1.0, true), (0.0, false), (0.05, false), (0.1, false)];
        let m = calibrate(&CngModel::default(), &scored).unwrap();
        assert!((m.threshold - 0.5).abs() < 1e-12);
        assert_eq!(m.non_answer_radius, 0.05);
        assert!(matches!(
            calibrate(&CngModel::default(), &[(0.3, true)]),
            Err(Error::SingleClassCalibration)
        ));
        let edge = calibrate(&CngModel::default(), &[(1.0, true), (1.0, false), (0.99, false)]).unwrap();
        assert!(edge.threshold + edge.non_answer_radius <= 1.0);
    }

    #[test]
    fn decision_band() {
        let m = CngModel::default();
        assert_eq!(m.decide(0.56), Decision::Same);
        assert_eq!(m.decide(0.5), Decision::NonAnswer);
        assert_eq!(m.decide(0.44), Decision::Different);
    }

    #[test]
    fn c_at_1_examples() {
        assert_eq!(c_at_1(&[(Decision::Same, true), (Decision::Different, false)]), 1.0);
        assert!((c_at_1_counts(10, 6, 2) - 0.72).abs() < 1e-12);
        assert_eq!(c_at_1(&[(Decision::NonAnswer, true); 4]), 0.0);
    }

    #[test]
    fn tf_idf_downweights_common_ngrams() {
        let mut m = CngModel {
            weighting: Weighting::TfIdf,
            ..Default::default()
        };
        m.fit_idf(["the cat", "the dog", "the owl"]);
        let plain = cng_similarity("the cat", "the dog", &tf(4));
        assert!(cng_similarity("the cat", "the dog", &m) < plain);
    }

    proptest! {
        #[test]
        fn similarity_is_symmetric_and_bounded(a in "[a-d ]{0,20}", b in "[a-d ]{0,20}", n in 1usize..5) {
            let m = tf(n);
            let s = cng_similarity(&a, &b, &m);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, cng_similarity(&b, &a, &m));
        }

        #[test]
        fn c_at_1_without_abstentions_is_accuracy(n in 1usize..50, c in 0usize..50) {
            let c = c.min(n);
            prop_assert!((c_at_1_counts(n, c, 0) - c as f64 / n as f64).abs() < 1e-12);
        }
    }
}
