// Rank haystack authors for each needle profile and report R@8 and MRR.

use authobf::adversaries::{attribute, mrr, recall_at_k};
use authobf::corpus::build_eval_split;
use authobf::scorers::Scorers;
use authobf::synthetic::{synthetic_comments, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let comments = synthetic_comments(&SyntheticConfig {
        authors: 60,
        ..Default::default()
    });
    let split = build_eval_split(&comments, 20, 16, 3)?;
    let scorers = Scorers::stubs();
    let results = attribute(&split.needles, &split.haystack, scorers.authorship.as_ref())?;
    for r in results.iter().take(3) {
        println!(
            "{}: true author at rank {:?}; top 3 {:?}",
            r.query_author_id,
            r.true_rank,
            &r.ranked_author_ids[..3]
        );
    }
    println!("R@8 {:.1}  MRR {:.1}  ({} queries)", recall_at_k(&results, 8), mrr(&results), results.len());
    Ok(())
}
