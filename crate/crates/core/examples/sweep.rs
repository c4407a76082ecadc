// How attack strength grows with the number of comments per profile, with
// the JSON-lines, CSV and SVG outputs.

use authobf::baselines::{CopyRewriter, NormalizerRewriter, Rewriter};
use authobf::corpus::build_eval_split;
use authobf::evalbench::{calibrate_verifier, emit_sweep, profile_length_sweep, BenchConfig};
use authobf::synthetic::{synthetic_comments, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let split = build_eval_split(
        &synthetic_comments(&SyntheticConfig {
            authors: 150,
            favorite_rate: 0.2,
            ..Default::default()
        }),
        50,
        16,
        2,
    )?;
    let cfg = BenchConfig::default();
    let scorers = cfg.scorers.load()?;
    let verifier = calibrate_verifier(&split, &cfg)?;
    let out = tempfile::tempdir()?;
    let rewriters: [&dyn Rewriter; 2] = [&CopyRewriter::default(), &NormalizerRewriter::default()];
    for r in rewriters {
        let points = profile_length_sweep(&split, r, &cfg.sweep_lengths, &scorers, &verifier, &cfg)?;
        println!("{}:", r.id());
        for p in &points {
            println!("  {:2} comments  R@8 {:5.1}  MRR {:5.1}  c@1 {:5.1}", p.comments_per_profile, p.r_at_8, p.mrr, p.c_at_1);
        }
        let files = emit_sweep(&out.path().join(r.id()), r.id(), &points)?;
        println!("  wrote {} files", files.len());
    }
    Ok(())
}
