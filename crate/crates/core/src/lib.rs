//! Authorship obfuscation toolkit.
//!
//! Trains text rewriters with k-sample self-critical policy gradients
//! against a composite privacy / meaning / soundness reward, and benchmarks
//! any rewriter against an embedding-based attribution adversary and a
//! character n-gram verification adversary.
//!
//! Module map:
//!
//! - [`corpus`]: comment ingestion, normalization, author profiles, needle/haystack splits
//! - [`scorers`]: authorship/semantic embedders, acceptability judges, likelihood models
//! - [`rewards`]: reward components, guardrails and their weighted-log composition
//! - [`generator`]: rewrite policies (sampling, scoring, optimizer steps, supervised warm-up)
//! - [`trainer`]: the k-sample self-critical training loop with checkpoints
//! - [`adversaries`]: attribution retrieval (R@8, MRR) and verification (c@1)
//! - [`baselines`]: copy, normalizer, round-trip, rescored, prompt and external rewriters
//! - [`evalbench`]: end-to-end benchmark runs, profile-length sweeps and reports
//! - [`synthetic`]: seeded synthetic corpora with controllable author signal
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod adversaries;
pub mod baselines;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evalbench;
pub mod generator;
pub mod jsonl;
pub mod rewards;
pub mod scorers;
pub mod synthetic;
pub mod text;
pub mod trainer;

pub use error::{Error, Result};
