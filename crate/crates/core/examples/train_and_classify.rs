//! Trains one classifier per action mode on a coded stream and classifies
//! new messages.

use actionlens::classify::EvalConfig;
use actionlens::ingest::normalize_text;
use actionlens::pipeline::labeled_corpus;
use actionlens::segment::{induce_lexicon, tokenize, LexiconParams};
use actionlens::synth::TweetFixture;
use actionlens::{ActionMode, ModelBundle};

fn main() -> actionlens::Result<()> {
    let tweets = TweetFixture { tweets: 3000, seed: 3 }.generate();
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let lexicon = induce_lexicon(
        normalized.iter().map(|s| tokenize(s)),
        LexiconParams { min_count: 10, ..LexiconParams::default() },
    )?;
    let (corpus, unlabeled) = labeled_corpus(&tweets, &lexicon);
    println!("{} coded documents ({unlabeled} without labels)", corpus.len());

    let bundle = ModelBundle::train(&corpus, lexicon, &ActionMode::ALL_MODES, &EvalConfig::default())?;
    for (mode, t) in bundle.thresholds() {
        println!("  {:<17} threshold {t:.4}", mode.name());
    }

    // phrases the model never saw favour the rarer positive class, so the
    // probes stick to the fixture's vocabulary
    for text in [
        "RIOT POLICE tear gas #Ferguson",
        "candle vigil peaceful march coffee",
        "broke the window stole lol",
        "so sad praying for @user7",
        "lunch friends game tonight",
    ] {
        let c = bundle.classify_text(text);
        let positives: Vec<&str> = c.positives.iter().map(|m| m.name()).collect();
        println!("\n{text}\n  positive: {positives:?}");
        println!("  p(all) = {:.4}", c.posteriors[&ActionMode::All]);
    }
    Ok(())
}
