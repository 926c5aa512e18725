//! Share of political tweets per county, from county boundaries in GeoJSON.

use actionlens::analytics::{county_activity, parse_boundaries, write_counties_csv};
use actionlens::classify::EvalConfig;
use actionlens::ingest::normalize_text;
use actionlens::pipeline::labeled_corpus;
use actionlens::segment::{induce_lexicon, tokenize, LexiconParams};
use actionlens::stream::ClassifiedTweet;
use actionlens::synth::{fixture_counties_geojson, fixture_start, TweetFixture};
use actionlens::{ActionMode, ModelBundle};
use chrono::Duration;

fn main() -> actionlens::Result<()> {
    let tweets = TweetFixture { tweets: 2000, seed: 9 }.generate();
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let lexicon = induce_lexicon(
        normalized.iter().map(|s| tokenize(s)),
        LexiconParams { min_count: 10, ..LexiconParams::default() },
    )?;
    let (corpus, _) = labeled_corpus(&tweets, &lexicon);
    let bundle = ModelBundle::train(&corpus, lexicon, &[ActionMode::All], &EvalConfig::default())?;

    let classified: Vec<ClassifiedTweet> = tweets
        .into_iter()
        .map(|t| {
            let classification = bundle.classify_text(&t.text);
            ClassifiedTweet { tweet: t, classification }
        })
        .collect();

    // a 3 x 3 grid of square "counties" over the St. Louis area
    let counties = parse_boundaries(&fixture_counties_geojson())?;
    let from = fixture_start();
    let table = county_activity(&classified, &counties, from, from + Duration::hours(24))?;
    write_counties_csv(&table, std::io::stdout())?;
    println!("# out of range: {}", table.out_of_range);
    Ok(())
}
