// Every built-in comparison rewriter applied to the same sentence.

use std::collections::BTreeMap;

use authobf::baselines::{build_rewriters, RewriterSpec};
use authobf::scorers::Scorers;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs: BTreeMap<String, RewriterSpec> = toml::from_str(
        r#"
        [copy]
        kind = "copy"

        [normalizer]
        kind = "normalizer"

        [roundtrip]
        kind = "roundtrip"
        translator = "stub-lossy"

        [rescored]
        kind = "rescored"
        base = "roundtrip"
        m = 4

        [prompt]
        kind = "prompt"
        backend = "stub-repeat"
        "#,
    )?;
    let rewriters = build_rewriters(&specs, Scorers::stubs().authorship)?;
    let x = "Honestly!!  The   weather in the north is the WORST.";
    for r in &rewriters {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        println!("{:>10} ({:?}): {:?}", r.id(), r.kind(), r.rewrite(x, &mut rng)?);
    }
    Ok(())
}
