// Train against the full composite reward on a synthetic corpus, stop,
// and resume from the checkpoint; the resumed log matches an
// uninterrupted run.

use authobf::config::config_hash;
use authobf::generator::{Decoding, TinyPolicy, TinyPolicyConfig, Vocabulary};
use authobf::rewards::CompositeReward;
use authobf::scorers::Scorers;
use authobf::synthetic::{synthetic_comments, SyntheticConfig};
use authobf::trainer::{checkpoint_dir, train, TrainConfig, LOG_FILE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs: Vec<String> = synthetic_comments(&SyntheticConfig {
        authors: 6,
        comments_per_author: 4,
        words_per_comment: 6,
        ..Default::default()
    })
    .into_iter()
    .map(|c| c.text)
    .collect();
    let vocab = Vocabulary::from_texts(inputs.iter().map(String::as_str), 200);
    let mut config = TrainConfig {
        k: 4,
        max_steps: 4,
        checkpoint_every: 2,
        decoding: Decoding {
            max_len: Some(10),
            min_len: 3,
            ..Default::default()
        },
        ..Default::default()
    };
    let new_policy = || TinyPolicy::new(vocab.clone(), TinyPolicyConfig { dim: 32, ..Default::default() }, config.decoding);
    let reward = CompositeReward::new(Scorers::stubs(), config.reward.clone());
    let hash = config_hash(&config);

    let full = tempfile::tempdir()?;
    let summary = train(&mut new_policy(), &reward, &inputs, &config, &hash, full.path(), None)?;
    for r in &summary.records {
        let c = &r.contributions;
        println!(
            "step {}  reward {:8.3}  privacy {:6.3}  meaning {:6.3}  fluency {:6.3}  acceptability {:6.3}  guardrail rate {:.2}",
            r.step, r.mean_reward, c.privacy, c.meaning, c.fluency, c.acceptability, r.guardrail_rate
        );
    }

    // the same run, interrupted after step 2 and resumed
    let split = tempfile::tempdir()?;
    config.max_steps = 2;
    train(&mut new_policy(), &reward, &inputs, &config, &hash, split.path(), None)?;
    config.max_steps = 4;
    let mut resumed = new_policy();
    train(&mut resumed, &reward, &inputs, &config, &hash, split.path(), Some(&checkpoint_dir(split.path(), 2)))?;
    let same = std::fs::read(full.path().join(LOG_FILE))? == std::fs::read(split.path().join(LOG_FILE))?;
    println!("resumed log identical to uninterrupted log: {same}");
    Ok(())
}
