// Normalize raw comments, pack them into author profiles, and cut a
// needle/haystack evaluation split.

use authobf::corpus::{build_eval_split, build_profiles, normalize, Comment};
use authobf::synthetic::{synthetic_comments, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:?}", normalize("Wow!!!   That   was\nGREAT??  ?!", true));

    let comments: Vec<Comment> = synthetic_comments(&SyntheticConfig {
        authors: 12,
        comments_per_author: 40,
        ..Default::default()
    });
    let normalized = comments.iter().cloned().map(|mut c| {
        c.text = normalize(&c.text, true);
        c
    });
    let profiles = build_profiles(normalized, 250)?;
    let tails = profiles.iter().filter(|p| p.short_tail).count();
    println!("{} comments -> {} profiles ({tails} short tails)", comments.len(), profiles.len());
    for p in profiles.iter().take(3) {
        println!("  {} {:?}: {} comments, {} words", p.author_id, p.subreddit, p.comments.len(), p.word_count);
    }

    let split = build_eval_split(&comments, 4, 16, 7)?;
    split.audit()?;
    println!(
        "split: {} needle profiles, {} haystack profiles, {} comments each",
        split.needles.len(),
        split.haystack.len(),
        split.comments_per_author
    );
    Ok(())
}
