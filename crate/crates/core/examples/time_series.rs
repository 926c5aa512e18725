//! Hourly presence of each mode: the sum of posteriors per UTC hour.

use actionlens::analytics::{hourly_presence, write_series_csv};
use actionlens::classify::EvalConfig;
use actionlens::ingest::normalize_text;
use actionlens::pipeline::labeled_corpus;
use actionlens::segment::{induce_lexicon, tokenize, LexiconParams};
use actionlens::stream::ClassifiedTweet;
use actionlens::synth::{fixture_start, TweetFixture};
use actionlens::{ActionMode, ModelBundle};
use chrono::Duration;

fn main() -> actionlens::Result<()> {
    let tweets = TweetFixture { tweets: 2000, seed: 8 }.generate();
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let lexicon = induce_lexicon(
        normalized.iter().map(|s| tokenize(s)),
        LexiconParams { min_count: 10, ..LexiconParams::default() },
    )?;
    let (corpus, _) = labeled_corpus(&tweets, &lexicon);
    let bundle = ModelBundle::train(&corpus, lexicon, &ActionMode::ATOMIC, &EvalConfig::default())?;

    let classified: Vec<ClassifiedTweet> = tweets
        .into_iter()
        .map(|t| {
            let classification = bundle.classify_text(&t.text);
            ClassifiedTweet { tweet: t, classification }
        })
        .collect();
    let from = fixture_start();
    let bins = hourly_presence(&classified, &ActionMode::ATOMIC, from, from + Duration::hours(24))?;
    write_series_csv(&bins, std::io::stdout())
}
