// k-sample self-critical training of the tiny policy on a toy objective:
// produce as many copies of a target word as possible.

use authobf::generator::{Decoding, Policy, TinyPolicy, TinyPolicyConfig, Vocabulary};
use authobf::trainer::{train, TargetTokenReward, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean_reward(policy: &TinyPolicy, reward: &TargetTokenReward, inputs: &[String]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sum = 0.0;
    for x in inputs {
        sum += policy.sample(x, 128, &mut rng).unwrap().iter().map(|c| reward.value(&c.text)).sum::<f64>() / 128.0;
    }
    sum / inputs.len() as f64
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"];
    let inputs: Vec<String> = vec!["alpha beta".into(), "gamma delta epsilon".into(), "eta theta".into()];
    let decoding = Decoding {
        max_len: Some(6),
        ..Default::default()
    };
    let mut policy = TinyPolicy::new(Vocabulary::new(words), TinyPolicyConfig::default(), decoding);
    let reward = TargetTokenReward::new("zeta");
    let config = TrainConfig {
        max_steps: 60,
        checkpoint_every: 0,
        decoding,
        ..Default::default()
    };
    let before = mean_reward(&policy, &reward, &inputs);
    let out = tempfile::tempdir()?;
    let summary = train(&mut policy, &reward, &inputs, &config, "toy", out.path(), None)?;
    for r in summary.records.iter().step_by(10) {
        println!("step {:3}  mean reward {:.3}  loss {:+.3}", r.step, r.mean_reward, r.loss);
    }
    println!("share of target tokens: {before:.3} -> {:.3}", mean_reward(&policy, &reward, &inputs));
    Ok(())
}
