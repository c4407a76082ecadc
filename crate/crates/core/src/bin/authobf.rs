use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use authobf::adversaries::{attribute, calibrate, calibration_pairs, mrr, recall_at_k, verify, CngModel, PairRecord};
use authobf::baselines::build_rewriters;
use authobf::config::{config_hash, load_toml};
use authobf::corpus::{build_eval_split, build_profiles, normalize, read_comments, read_profiles, write_profiles, EvalSplit};
use authobf::error::{Error, Result};
use authobf::evalbench::{self, report, BenchConfig, ReportFormat};
use authobf::generator::{TinyPolicy, TinyPolicyConfig, Vocabulary};
use authobf::jsonl;
use authobf::rewards::CompositeReward;
use authobf::scorers::registry::{BackendKind, ScorerBackendSpec, ScorersConfig};
use authobf::trainer::{train, TrainConfig};

#[derive(Parser)]
#[command(name = "authobf", version, about = "Authorship obfuscation training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize comments and pack them into ≥min-words author profiles.
    BuildCorpus {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = authobf::corpus::DEFAULT_MIN_WORDS)]
        min_words: usize,
        #[arg(long)]
        lowercase: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split authors into disjoint needle and haystack profiles.
    BuildEvalSplit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        needle_authors: usize,
        #[arg(long, default_value_t = 16)]
        comments_per_author: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the tiny policy with k-SCST.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint directory to resume from.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Rank haystack authors for every needle profile.
    EvaluateAttribution {
        #[arg(long)]
        needles: PathBuf,
        #[arg(long)]
        haystack: PathBuf,
        #[arg(long, default_value = "stub-char-ngram")]
        backend: String,
        /// Results file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the character n-gram verifier threshold on unmodified profiles.
    CalibrateVerifier {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long, default_value_t = authobf::adversaries::verification::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value = "tf")]
        weighting: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide same/different/non-answer for every profile pair.
    EvaluateVerification {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Obfuscation benchmark.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run every configured rewriter through both adversaries.
    Run(BenchArgs),
    /// Attack strength against comments per needle profile.
    Sweep {
        #[command(flatten)]
        bench: BenchArgs,
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<usize>>,
    },
    /// Render a finished run directory.
    Report {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `train --config` file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrainFile {
    corpus: CorpusSection,
    #[serde(default)]
    policy: TinyPolicyConfig,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    scorers: ScorersConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CorpusSection {
    /// Profiles written by `build-corpus`; every comment is a training input.
    profiles: PathBuf,
    #[serde(default = "default_vocab")]
    max_vocab: usize,
}

fn default_vocab() -> usize {
    5000
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn write_or_print<T: Serialize>(out: Option<&Path>, items: &[T]) -> Result<()> {
    match out {
        Some(p) => jsonl::write(p, items),
        None => {
            print!("{}", jsonl::to_string(items)?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildCorpus {
            input,
            min_words,
            lowercase,
            out,
        } => {
            let comments = read_comments(&input)?;
            let n = comments.len();
            let normalized = comments.into_iter().map(|mut c| {
                c.text = normalize(&c.text, lowercase);
                c
            });
            let profiles = build_profiles(normalized, min_words)?;
            write_profiles(&out, &profiles)?;
            let tails = profiles.iter().filter(|p| p.short_tail).count();
            log::info!("{n} comments -> {} profiles ({tails} short tails)", profiles.len());
        }
        Command::BuildEvalSplit {
            input,
            needle_authors,
            comments_per_author,
            seed,
            out,
        } => {
            let comments = read_comments(&input)?;
            let split = build_eval_split(&comments, needle_authors, comments_per_author, seed)?;
            let body = serde_json::to_string(&split)? + "\n";
            std::fs::write(&out, body).map_err(|e| Error::io(&out, e))?;
            log::info!("{} needles, {} haystack authors", split.needles.len(), split.haystack.len());
        }
        Command::Train { config, out, resume } => {
            let file: TrainFile = load_toml(&config)?;
            let hash = config_hash(&file);
            let profiles = read_profiles(&file.corpus.profiles)?;
            let inputs: Vec<String> = profiles
                .iter()
                .flat_map(|p| p.comments.iter().map(|c| c.text.clone()))
                .collect();
            let vocab = Vocabulary::from_texts(inputs.iter().map(String::as_str), file.corpus.max_vocab);
            let mut policy = TinyPolicy::new(vocab, file.policy, file.train.decoding);
            let reward = CompositeReward::new(file.scorers.load()?, file.train.reward.clone());
            let summary = train(&mut policy, &reward, &inputs, &file.train, &hash, &out, resume.as_deref())?;
            let policy_path = out.join("policy.json");
            let body = serde_json::to_string(&policy)?;
            std::fs::write(&policy_path, body).map_err(|e| Error::io(&policy_path, e))?;
            if let Some(last) = summary.records.last() {
                log::info!("step {}: mean reward {:.4}", last.step, last.mean_reward);
            }
        }
        Command::EvaluateAttribution {
            needles,
            haystack,
            backend,
            out,
        } => {
            let needles = read_profiles(&needles)?;
            let haystack = read_profiles(&haystack)?;
            let embedder = ScorerBackendSpec::new(BackendKind::Authorship, backend).load_embedder()?;
            let results = attribute(&needles, &haystack, embedder.as_ref())?;
            log::info!("R@8 {:.1}  MRR {:.1}", recall_at_k(&results, 8), mrr(&results));
            write_or_print(out.as_deref(), &results)?;
        }
        Command::CalibrateVerifier {
            profiles,
            n,
            weighting,
            seed,
            out,
        } => {
            let profiles = read_profiles(&profiles)?;
            let weighting = serde_json::from_value(serde_json::Value::String(weighting))
                .map_err(|e| Error::Config(format!("--weighting: {e}")))?;
            let mut model = CngModel {
                n,
                weighting,
                ..Default::default()
            };
            if model.weighting == authobf::adversaries::Weighting::TfIdf {
                model.fit_idf(profiles.iter().map(|p| p.concatenated_text.as_str()));
            }
            let pairs = calibration_pairs(&profiles, &authobf::adversaries::verification::CALIBRATION_LENGTHS, seed);
            let scored: Vec<(f64, bool)> = pairs
                .iter()
                .map(|p| {
                    let s = authobf::adversaries::cng_similarity(&p.left.concatenated_text, &p.right.concatenated_text, &model);
                    (s, p.same_author)
                })
                .collect();
            let model = calibrate(&model, &scored)?;
            log::info!("threshold {:.4}, radius {:.4}", model.threshold, model.non_answer_radius);
            let body = serde_json::to_string_pretty(&model)? + "\n";
            std::fs::write(&out, body).map_err(|e| Error::io(&out, e))?;
        }
        Command::EvaluateVerification { pairs, model, out } => {
            let pairs: Vec<_> = jsonl::read::<PairRecord>(&pairs)?
                .into_iter()
                .map(PairRecord::into_pair)
                .collect();
            let raw = std::fs::read_to_string(&model).map_err(|e| Error::io(&model, e))?;
            let model: CngModel = serde_json::from_str(&raw)?;
            let problems = verify(&model, &pairs);
            log::info!("c@1 {:.3}", authobf::adversaries::verification::c_at_1_problems(&problems));
            write_or_print(out.as_deref(), &problems)?;
        }
        Command::Bench { command } => bench(command)?,
    }
    Ok(())
}

struct BenchSetup {
    cfg: BenchConfig,
    hash: String,
    split: EvalSplit,
    scorers: authobf::scorers::Scorers,
    rewriters: Vec<Arc<dyn authobf::baselines::Rewriter>>,
    out: PathBuf,
}

fn bench_setup(args: &BenchArgs) -> Result<BenchSetup> {
    let cfg: BenchConfig = load_toml(&args.config)?;
    let hash = config_hash(&cfg);
    let raw = std::fs::read_to_string(&cfg.split).map_err(|e| Error::io(&cfg.split, e))?;
    let split: EvalSplit = serde_json::from_str(&raw)?;
    let scorers = cfg.scorers.load()?;
    let rewriters = build_rewriters(&cfg.rewriters, scorers.authorship.clone())?;
    let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    Ok(BenchSetup {
        cfg,
        hash,
        split,
        scorers,
        rewriters,
        out,
    })
}

fn bench(command: BenchCommand) -> Result<()> {
    match command {
        BenchCommand::Run(args) => {
            let s = bench_setup(&args)?;
            let outcome = evalbench::run_bench(&s.split, &s.rewriters, &s.scorers, &s.cfg, &s.hash)?;
            report::write_run(&s.out, &outcome)?;
            print!("{}", evalbench::render_table(&outcome.reports));
        }
        BenchCommand::Sweep { bench, lengths } => {
            let s = bench_setup(&bench)?;
            let lengths = lengths.unwrap_or_else(|| s.cfg.sweep_lengths.clone());
            let verifier = evalbench::calibrate_verifier(&s.split, &s.cfg)?;
            for r in &s.rewriters {
                let points = evalbench::profile_length_sweep(&s.split, r.as_ref(), &lengths, &s.scorers, &verifier, &s.cfg)?;
                let dir = s.out.join("sweep").join(r.id());
                evalbench::emit_sweep(&dir, r.id(), &points)?;
                for p in &points {
                    println!("{}\t{}\tR@8 {:.1}\tMRR {:.1}\tc@1 {:.1}", r.id(), p.comments_per_profile, p.r_at_8, p.mrr, p.c_at_1);
                }
            }
        }
        BenchCommand::Report { run, format } => {
            let reports = report::read_reports(&run)?;
            match format.parse::<ReportFormat>()? {
                ReportFormat::Json => print!("{}", jsonl::to_string(&reports)?),
                ReportFormat::Table => print!("{}", evalbench::render_table(&reports)),
                ReportFormat::Plot => {
                    let sweep_root = run.join("sweep");
                    let entries = std::fs::read_dir(&sweep_root)
                        .map_err(|e| Error::Config(format!("{}: {e} (run `bench sweep` first)", sweep_root.display())))?;
                    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
                    dirs.sort();
                    for dir in dirs {
                        let id = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                        let points = report::read_sweep(&dir)?;
                        evalbench::emit_sweep(&dir, &id, &points)?;
                        println!("{}", dir.join(report::SWEEP_SVG).display());
                    }
                }
            }
        }
    }
    Ok(())
}
