// Score candidate rewrites with the composite reward on the stub backends
// and look at each weighted term.

use authobf::rewards::{CompositeReward, RewardConfig, RewardFunction};
use authobf::scorers::Scorers;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reward = CompositeReward::new(Scorers::stubs(), RewardConfig::default());
    let x = "I reckon the new library is grand, honestly.";
    let candidates = [
        "I reckon the new library is grand, honestly.",
        "The new library seems quite good to me.",
        "library library library library",
        "Good.",
    ];
    for (y, b) in candidates.iter().zip(reward.score(x, &candidates)?) {
        let c = &b.contributions;
        println!("{y:?}");
        println!(
            "  total {:8.3} = privacy {:7.3} + meaning {:7.3} + fluency {:7.3} + acceptability {:7.3} + guardrails {:7.3}",
            b.total, c.privacy, c.meaning, c.fluency, c.acceptability, c.guardrails
        );
        println!(
            "  luar_self {:.3}  sbert_self {:.3}  brevity {}  repetition {}",
            b.luar_self, b.sbert_self, b.guardrails.brevity_triggered, b.guardrails.repetition_triggered
        );
    }
    Ok(())
}
