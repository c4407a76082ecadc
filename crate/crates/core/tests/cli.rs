//! End-to-end runs of every subcommand of the binary.

use std::path::Path;
use std::process::Command;

use authobf::adversaries::{calibration_pairs, PairRecord, RetrievalResult, VerificationProblem};
use authobf::corpus::{read_profiles, EvalSplit};
use authobf::evalbench::{MetricsReport, SweepPoint};
use authobf::jsonl;
use authobf::synthetic::{synthetic_comments, SyntheticConfig};

fn authobf(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_authobf"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "authobf {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn full_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let comments = synthetic_comments(&SyntheticConfig {
        authors: 30,
        ..Default::default()
    });
    jsonl::write(dir.join("comments.jsonl"), &comments).unwrap();

    authobf(dir, &["build-corpus", "--input", "comments.jsonl", "--min-words", "250", "--lowercase", "--out", "profiles.jsonl"]);
    let profiles = read_profiles(dir.join("profiles.jsonl")).unwrap();
    let total: usize = profiles.iter().map(|p| p.comments.len()).sum();
    assert_eq!(total, comments.len());

    authobf(
        dir,
        &["build-eval-split", "--input", "comments.jsonl", "--needle-authors", "8", "--comments-per-author", "16", "--seed", "3", "--out", "split.json"],
    );
    let split: EvalSplit = serde_json::from_str(&std::fs::read_to_string(dir.join("split.json")).unwrap()).unwrap();
    assert_eq!(split.needles.len(), 8);
    authobf::corpus::write_profiles(dir.join("needles.jsonl"), &split.needles).unwrap();
    authobf::corpus::write_profiles(dir.join("haystack.jsonl"), &split.haystack).unwrap();

    let stdout = authobf(dir, &["evaluate-attribution", "--needles", "needles.jsonl", "--haystack", "haystack.jsonl", "--backend", "stub-char-ngram"]);
    let results: Vec<RetrievalResult> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(results.len(), 8);

    authobf(dir, &["calibrate-verifier", "--profiles", "haystack.jsonl", "--out", "verifier.json"]);
    let pairs: Vec<PairRecord> = calibration_pairs(&split.needles, &[4, 8], 1).iter().map(PairRecord::from).collect();
    jsonl::write(dir.join("pairs.jsonl"), &pairs).unwrap();
    authobf(dir, &["evaluate-verification", "--pairs", "pairs.jsonl", "--model", "verifier.json", "--out", "problems.jsonl"]);
    let problems: Vec<VerificationProblem> = jsonl::read(dir.join("problems.jsonl")).unwrap();
    assert_eq!(problems.len(), pairs.len());

    std::fs::write(
        dir.join("train.toml"),
        r#"
        [corpus]
        profiles = "profiles.jsonl"
        max_vocab = 300

        [policy]
        dim = 16

        [train]
        k = 2
        batch_size = 2
        max_steps = 2
        checkpoint_every = 1

        [train.decoding]
        max_len = 8
        "#,
    )
    .unwrap();
    authobf(dir, &["train", "--config", "train.toml", "--out", "run"]);
    assert_eq!(std::fs::read_to_string(dir.join("run/train_log.jsonl")).unwrap().lines().count(), 2);
    assert!(dir.join("run/policy.json").exists());
    assert!(dir.join("run/checkpoints/step-000002/manifest.json").exists());

    std::fs::write(
        dir.join("bench.toml"),
        r#"
        split = "split.json"
        out_dir = "bench"

        [rewriters.copy]
        kind = "copy"

        [rewriters.trained]
        kind = "policy"
        path = "run/policy.json"
        "#,
    )
    .unwrap();
    let table = authobf(dir, &["bench", "run", "--config", "bench.toml"]);
    assert!(table.contains("| copy |") && table.contains("| trained |"));
    let reports: Vec<MetricsReport> = jsonl::read(dir.join("bench/reports.jsonl")).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(dir.join("bench/manifest.json").exists());
    assert!(dir.join("bench/raw/copy.retrieval.jsonl").exists());

    authobf(dir, &["bench", "sweep", "--config", "bench.toml", "--lengths", "1,4,16"]);
    let points: Vec<SweepPoint> = jsonl::read(dir.join("bench/sweep/copy/sweep.jsonl")).unwrap();
    assert_eq!(points.iter().map(|p| p.comments_per_profile).collect::<Vec<_>>(), vec![1, 4, 16]);
    assert_eq!(points[2].r_at_8, reports.iter().find(|r| r.system_id == "copy").unwrap().r_at_8.unwrap());

    let json = authobf(dir, &["bench", "report", "--run", "bench", "--format", "json"]);
    assert_eq!(json.lines().count(), 2);
    let plots = authobf(dir, &["bench", "report", "--run", "bench", "--format", "plot"]);
    assert_eq!(plots.lines().count(), 2);
    assert!(authobf(dir, &["bench", "report", "--run", "bench", "--format", "table"]).starts_with("| system |"));
}

#[test]
fn bad_input_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_authobf"))
        .current_dir(tmp.path())
        .args(["build-corpus", "--input", "missing.jsonl", "--out", "x.jsonl"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));
}
