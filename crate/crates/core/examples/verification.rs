// Calibrate the character n-gram verifier on one set of authors and
// score held-out same/different pairs with c@1.

use std::collections::BTreeMap;

use authobf::adversaries::verification::{c_at_1_problems, calibrate_on_pairs};
use authobf::adversaries::{calibration_pairs, verify, CngModel, Decision};
use authobf::corpus::{AuthorProfile, Comment};
use authobf::synthetic::{synthetic_comments, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut by_author: BTreeMap<String, Vec<Comment>> = BTreeMap::new();
    for c in synthetic_comments(&SyntheticConfig {
        authors: 40,
        dialects: 2,
        ..Default::default()
    }) {
        by_author.entry(c.author_id.clone()).or_default().push(c);
    }
    let profiles: Vec<AuthorProfile> = by_author.into_iter().map(|(a, cs)| AuthorProfile::from_comments(a, cs)).collect();
    let (fit, held_out) = profiles.split_at(20);

    let model = calibrate_on_pairs(&CngModel::default(), &calibration_pairs(fit, &[8, 16], 0))?;
    println!("threshold {:.3}, non-answer band ±{:.3}", model.threshold, model.non_answer_radius);

    let problems = verify(&model, &calibration_pairs(held_out, &[8, 16], 1));
    let count = |d: Decision| problems.iter().filter(|p| p.decision == d).count();
    println!(
        "{} pairs: {} same, {} different, {} non-answers; c@1 {:.3}",
        problems.len(),
        count(Decision::Same),
        count(Decision::Different),
        count(Decision::NonAnswer),
        c_at_1_problems(&problems)
    );
    Ok(())
}
