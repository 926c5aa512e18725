//! Induces a multi-word-expression lexicon from raw text and segments a
//! message into phrases with it.

use actionlens::ingest::normalize_text;
use actionlens::segment::{document_from_text, induce_lexicon, tokenize, LexiconParams};
use actionlens::synth::TweetFixture;

fn main() -> actionlens::Result<()> {
    let tweets = TweetFixture { tweets: 2000, seed: 1 }.generate();
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let params = LexiconParams { min_count: 10, ..LexiconParams::default() };
    let lexicon = induce_lexicon(normalized.iter().map(|s| tokenize(s)), params)?;

    println!("{} entries, longest {} tokens", lexicon.len(), lexicon.max_len());
    for p in lexicon.sorted_entries().iter().take(12) {
        println!("  {p}");
    }

    let text = "RIOT POLICE fired Tear Gas near the candle light vigil @someone http://t.co/x";
    println!("\n{text}\n  normalized: {}", normalize_text(text));
    let doc = document_from_text(text, &lexicon);
    for (phrase, freq) in doc.iter() {
        println!("  {phrase} x{freq}");
    }
    Ok(())
}
