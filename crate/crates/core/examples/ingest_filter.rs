//! Parses raw tweet records, tallies rejections, then keeps only tweets that
//! fall inside documented protest windows.

use std::io::Cursor;

use actionlens::ingest::{protest_filter, Tally, TweetReader};
use actionlens::synth::{fixture_windows, TweetFixture};

fn main() -> actionlens::Result<()> {
    let raw = r#"{"id":"a1","ts":"2014-11-25T02:10:00Z","lat":38.744,"lon":-90.291,"text":"Tear gas on W Florissant #Ferguson"}
{"id":"a2","ts":"not a time","lat":38.7,"lon":-90.2,"text":"x"}
{"id":"a3","ts":"2014-11-25T02:10:00Z","lat":123.0,"lon":-90.2,"text":"bad latitude"}

{"id":"a4","ts":"2014-11-25T02:20:00Z","lat":38.62,"lon":-90.19,"text":"lunch downtown"}"#;

    let mut tally = Tally::default();
    for parsed in TweetReader::new(Cursor::new(raw)) {
        let parsed = parsed?;
        tally.record(&parsed.outcome);
        match &parsed.outcome {
            Ok(t) => println!("line {}: accepted {}", parsed.line, t.id),
            Err(r) => println!("line {}: rejected ({})", parsed.line, r.code()),
        }
    }
    println!("tally: {}", serde_json::to_string(&tally).unwrap());

    let tweets = TweetFixture::default().generate();
    let windows = fixture_windows();
    let kept: Vec<_> = protest_filter(tweets.clone(), &windows)?.collect();
    println!("{} of {} fixture tweets fall inside {} windows", kept.len(), tweets.len(), windows.len());
    for f in kept.iter().take(3) {
        println!("  {} {} {:?}", f.tweet.id, f.tweet.timestamp, f.windows);
    }
    Ok(())
}
