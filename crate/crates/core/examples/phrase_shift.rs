//! Explains classifications: which phrases pushed a single message, and a
//! whole set of messages, toward a mode.

use actionlens::classify::EvalConfig;
use actionlens::explain::{shift_aggregate, shift_single};
use actionlens::ingest::normalize_text;
use actionlens::pipeline::labeled_corpus;
use actionlens::segment::{induce_lexicon, tokenize, LexiconParams};
use actionlens::synth::TweetFixture;
use actionlens::{ActionMode, ModelBundle};

fn main() -> actionlens::Result<()> {
    let tweets = TweetFixture { tweets: 2000, seed: 4 }.generate();
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let lexicon = induce_lexicon(
        normalized.iter().map(|s| tokenize(s)),
        LexiconParams { min_count: 10, ..LexiconParams::default() },
    )?;
    let (corpus, _) = labeled_corpus(&tweets, &lexicon);
    let mode = ActionMode::CollectiveForce;
    let bundle = ModelBundle::train(&corpus, lexicon, &[mode], &EvalConfig::default())?;
    let model = bundle.model(mode)?;

    let doc = bundle.document("riot police are throwing tear gas, stay safe everyone");
    let single = shift_single(model, &doc);
    println!("single message, total shift {:+.3}:", single.total);
    for e in &single.entries {
        println!("  {:<20} x{} {:+.3}", e.phrase, e.frequency, e.contribution);
    }

    let docs: Vec<_> = tweets.iter().map(|t| bundle.document(&t.text)).collect();
    let positives: Vec<_> = docs.iter().filter(|d| model.is_positive(model.posterior(d))).collect();
    let agg = shift_aggregate(model, positives.iter().copied())?;
    let (top, truncated) = agg.top_k(10);
    println!("\n{} positive messages, top phrases (truncated: {truncated}):", positives.len());
    for e in top {
        println!("  {:<20} x{:<4} {:+.2}", e.phrase, e.frequency, e.contribution);
    }
    Ok(())
}
