// A complete benchmark run: several rewriters through both adversaries,
// written to a run directory and rendered as a table.

use authobf::baselines::build_rewriters;
use authobf::config::config_hash;
use authobf::corpus::build_eval_split;
use authobf::evalbench::{render_table, run_bench, write_run, BenchConfig};
use authobf::synthetic::{synthetic_comments, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let split = build_eval_split(
        &synthetic_comments(&SyntheticConfig {
            authors: 80,
            ..Default::default()
        }),
        20,
        16,
        1,
    )?;
    let cfg: BenchConfig = toml::from_str(
        r#"
        seed = 5
        verification = "mixed"

        # one length only: same-author calibration pairs are halves of a
        # 16-comment haystack profile
        [verifier]
        calibration_lengths = [8]

        [rewriters.copy]
        kind = "copy"

        [rewriters.normalizer]
        kind = "normalizer"

        [rewriters.roundtrip]
        kind = "roundtrip"
        translator = "stub-lossy"

        [rewriters.constant]
        kind = "prompt"
        backend = "stub-repeat"
        "#,
    )?;
    let scorers = cfg.scorers.load()?;
    let rewriters = build_rewriters(&cfg.rewriters, scorers.authorship.clone())?;
    let outcome = run_bench(&split, &rewriters, &scorers, &cfg, &config_hash(&cfg))?;
    let dir = tempfile::tempdir()?;
    write_run(dir.path(), &outcome)?;
    print!("{}", render_table(&outcome.reports));
    println!("verifier threshold {:.3}", outcome.manifest.verifier.threshold);
    Ok(())
}
