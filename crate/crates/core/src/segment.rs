//! Tokenization and multiword-expression segmentation.
//!
//! A [`MweLexicon`] holds the multiword expressions known to the pipeline.
//! [`segment`] walks a token list left to right and, at each position,
//! consumes the longest lexicon entry starting there, falling back to the
//! single token. The result is a [`Document`]: a bag of non-overlapping
//! phrases whose frequencies account for every token exactly once.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use unicode_segmentation::UnicodeSegmentation;

use crate::ingest::normalize_text;
use crate::{Error, Result};

pub const DEFAULT_MAX_LEN: usize = 4;
pub const DEFAULT_MIN_COUNT: u64 = 25;
pub const DEFAULT_MIN_SCORE: f64 = 1.0;

const SENTINELS: [&str; 2] = ["<url>", "<user>"];

/// A single- or multi-word expression, stored as its canonical key
/// (tokens joined by one space).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phrase(String);

impl Phrase {
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput("phrase needs at least one token".into()));
        }
        for t in tokens {
            let t = t.as_ref();
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::InvalidInput(format!("invalid phrase token {t:?}")));
            }
        }
        Ok(Phrase(join(tokens)))
    }

    /// Parses a canonical key. Fails on empty tokens or non-space whitespace.
    pub fn parse(key: &str) -> Result<Self> {
        let tokens: Vec<&str> = key.split(' ').collect();
        Phrase::from_tokens(&tokens)
    }

    pub(crate) fn from_key_unchecked(key: String) -> Self {
        Phrase(key)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.0.split(' ')
    }

    pub fn token_len(&self) -> usize {
        self.0.bytes().filter(|&b| b == b' ').count() + 1
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Phrase {
    fn borrow(&self) -> &str {
        &self.0
    }
}

fn join<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut key = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            key.push(' ');
        }
        key.push_str(t.as_ref());
    }
    key
}

/// Set of multiword expressions (two or more tokens each).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MweLexicon {
    entries: HashSet<Phrase>,
    first_tokens: HashSet<String>,
    max_len: usize,
}

impl MweLexicon {
    pub fn new(entries: impl IntoIterator<Item = Phrase>) -> Result<Self> {
        let mut lex = MweLexicon::default();
        for p in entries {
            lex.insert(p)?;
        }
        Ok(lex)
    }

    /// Adds an entry; duplicates and single-token phrases are errors.
    pub fn insert(&mut self, phrase: Phrase) -> Result<()> {
        let n = phrase.token_len();
        if n < 2 {
            return Err(Error::Lexicon(format!(
                "entry {phrase:?} has fewer than two tokens"
            )));
        }
        let first = phrase.tokens().next().unwrap_or_default().to_string();
        if !self.entries.insert(phrase.clone()) {
            return Err(Error::Lexicon(format!("duplicate entry {:?}", phrase.as_str())));
        }
        self.first_tokens.insert(first);
        self.max_len = self.max_len.max(n);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Entries in canonical-key order.
    pub fn sorted_entries(&self) -> Vec<&Phrase> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort();
        v
    }

    /// Reads the lexicon file format: one phrase per line, `#` starts a
    /// comment line. Lines go through the same normalization and
    /// tokenization as message text.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lex = MweLexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<lexicon>", e))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let normalized = normalize_text(trimmed);
            let tokens = tokenize(&normalized);
            let phrase = Phrase::from_tokens(&tokens)?;
            lex.insert(phrase)
                .map_err(|e| Error::Lexicon(format!("line {}: {e}", i + 1)))?;
        }
        Ok(lex)
    }

    /// Writes entries sorted, preceded by the given comment lines.
    pub fn write<W: Write>(&self, mut out: W, header: &[String]) -> std::io::Result<()> {
        for h in header {
            writeln!(out, "# {h}")?;
        }
        for p in self.sorted_entries() {
            writeln!(out, "{p}")?;
        }
        Ok(())
    }
}

/// Bag of phrases with integer frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    phrases: BTreeMap<Phrase, u32>,
    total_tokens: usize,
}

impl Document {
    pub fn new() -> Self {
        Document::default()
    }

    /// Builds a document from explicit counts; zero counts are dropped.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (Phrase, u32)>,
    {
        let mut doc = Document::new();
        for (p, f) in counts {
            doc.add(p, f);
        }
        doc
    }

    pub fn add(&mut self, phrase: Phrase, freq: u32) {
        if freq == 0 {
            return;
        }
        self.total_tokens += phrase.token_len() * freq as usize;
        *self.phrases.entry(phrase).or_insert(0) += freq;
    }

    /// Number of distinct phrases.
    pub fn n(&self) -> usize {
        self.phrases.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn frequency(&self, key: &str) -> u32 {
        self.phrases.get(key).copied().unwrap_or(0)
    }

    /// Phrases in canonical-key order.
    pub fn iter(&self) -> impl Iterator<Item = (&Phrase, u32)> {
        self.phrases.iter().map(|(p, &f)| (p, f))
    }

    pub fn merge(&mut self, other: &Document) {
        for (p, f) in other.iter() {
            self.add(p.clone(), f);
        }
    }

    /// Every frequency multiplied by `m`.
    pub fn scaled(&self, m: u32) -> Document {
        Document::from_counts(self.iter().map(|(p, f)| (p.clone(), f * m)))
    }
}

fn is_word_grapheme(g: &str) -> bool {
    g.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_')
}

fn is_joiner(g: &str) -> bool {
    matches!(g, "'" | "\u{2019}" | "-")
}

fn tokenize_chunk<'a>(chunk: &'a str, out: &mut Vec<&'a str>) {
    let gs: Vec<(usize, &str)> = chunk.grapheme_indices(true).collect();
    let offset = |j: usize| gs.get(j).map_or(chunk.len(), |g| g.0);
    let mut i = 0;
    while i < gs.len() {
        let (start, g) = gs[i];
        if let Some(s) = SENTINELS.iter().find(|s| chunk[start..].starts_with(**s)) {
            out.push(&chunk[start..start + s.len()]);
            while i < gs.len() && gs[i].0 < start + s.len() {
                i += 1;
            }
            continue;
        }
        if !is_word_grapheme(g) {
            out.push(g);
            i += 1;
            continue;
        }
        let mut j = i + 1;
        loop {
            if j < gs.len() && is_word_grapheme(gs[j].1) {
                j += 1;
            } else if j + 1 < gs.len() && is_joiner(gs[j].1) && is_word_grapheme(gs[j + 1].1) {
                j += 2;
            } else {
                break;
            }
        }
        out.push(&chunk[start..offset(j)]);
        i = j;
    }
}

/// Splits normalized text into tokens. Punctuation becomes separate
/// tokens (apostrophes and hyphens between word characters stay inside the
/// word), each emoji or other symbol grapheme is one token, and `<url>` /
/// `<user>` survive intact.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        tokenize_chunk(chunk, &mut out);
    }
    out
}

/// Greedy left-to-right longest-match segmentation.
pub fn segment<S: AsRef<str>>(tokens: &[S], lexicon: &MweLexicon) -> Document {
    let mut doc = Document::new();
    let mut key = String::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut consumed = 1;
        if lexicon.first_tokens.contains(tokens[i].as_ref()) {
            let longest = lexicon.max_len.min(tokens.len() - i);
            for n in (2..=longest).rev() {
                key.clear();
                for (k, t) in tokens[i..i + n].iter().enumerate() {
                    if k > 0 {
                        key.push(' ');
                    }
                    key.push_str(t.as_ref());
                }
                if lexicon.contains(&key) {
                    consumed = n;
                    break;
                }
            }
        }
        let phrase = if consumed == 1 {
            tokens[i].as_ref().to_string()
        } else {
            key.clone()
        };
        doc.add(Phrase::from_key_unchecked(phrase), 1);
        i += consumed;
    }
    doc
}

/// Normalize, tokenize and segment raw message text.
pub fn document_from_text(text: &str, lexicon: &MweLexicon) -> Document {
    let normalized = normalize_text(text);
    segment(&tokenize(&normalized), lexicon)
}

/// Thresholds for [`induce_lexicon`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexiconParams {
    pub min_count: u64,
    pub min_score: f64,
    pub max_len: usize,
}

impl Default for LexiconParams {
    fn default() -> Self {
        LexiconParams {
            min_count: DEFAULT_MIN_COUNT,
            min_score: DEFAULT_MIN_SCORE,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

impl LexiconParams {
    pub fn validate(&self) -> Result<()> {
        if !(2..=6).contains(&self.max_len) {
            return Err(Error::InvalidInput(format!(
                "max_len must be in [2, 6], got {}",
                self.max_len
            )));
        }
        if self.min_count < 1 {
            return Err(Error::InvalidInput("min_count must be >= 1".into()));
        }
        if !self.min_score.is_finite() {
            return Err(Error::InvalidInput("min_score must be finite".into()));
        }
        Ok(())
    }
}

/// Unigram and n-gram counts. Merging is a plain sum, so counting shards
/// and merging them in any order gives the same totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramCounts {
    max_len: usize,
    docs: u64,
    unigrams: HashMap<String, u64>,
    total_tokens: u64,
    ngrams: HashMap<String, u64>,
    /// Number of n-gram positions per length n (index n).
    positions: Vec<u64>,
}

impl NgramCounts {
    pub fn new(max_len: usize) -> Self {
        NgramCounts {
            max_len,
            positions: vec![0; max_len + 1],
            ..Default::default()
        }
    }

    /// N-grams never cross document boundaries. N-grams containing a
    /// non-word token (punctuation, emoji, `<url>`, `<user>`) are not
    /// counted as candidates but still count as positions.
    pub fn add_document<S: AsRef<str>>(&mut self, tokens: &[S]) {
        self.docs += 1;
        for t in tokens {
            *self.unigrams.entry(t.as_ref().to_string()).or_insert(0) += 1;
        }
        self.total_tokens += tokens.len() as u64;
        for n in 2..=self.max_len {
            if tokens.len() < n {
                break;
            }
            self.positions[n] += (tokens.len() - n + 1) as u64;
            for w in tokens.windows(n) {
                if w.iter().all(|t| is_word_grapheme(t.as_ref())) {
                    *self.ngrams.entry(join(w)).or_insert(0) += 1;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &NgramCounts) {
        assert_eq!(self.max_len, other.max_len, "merging counts with different max_len");
        self.docs += other.docs;
        self.total_tokens += other.total_tokens;
        for (k, v) in &other.unigrams {
            *self.unigrams.entry(k.clone()).or_insert(0) += v;
        }
        for (k, v) in &other.ngrams {
            *self.ngrams.entry(k.clone()).or_insert(0) += v;
        }
        for (a, b) in self.positions.iter_mut().zip(&other.positions) {
            *a += b;
        }
    }

    pub fn documents(&self) -> u64 {
        self.docs
    }

    /// Association score of an n-gram: `log10(p(g) / prod p(token)) / (n - 1)`.
    pub fn score(&self, key: &str) -> Option<f64> {
        let count = *self.ngrams.get(key)?;
        let n = key.split(' ').count();
        let p_gram = count as f64 / self.positions[n] as f64;
        let total = self.total_tokens as f64;
        let log_indep: f64 = key
            .split(' ')
            .map(|t| (self.unigrams[t] as f64 / total).log10())
            .sum();
        Some((p_gram.log10() - log_indep) / (n - 1) as f64)
    }

    /// `(phrase, count, score)` for every candidate with `count >= min_count`,
    /// in canonical-key order.
    pub fn scored(&self, min_count: u64) -> Vec<(Phrase, u64, f64)> {
        let keys: BTreeSet<&String> = self
            .ngrams
            .iter()
            .filter(|(_, &c)| c >= min_count)
            .map(|(k, _)| k)
            .collect();
        keys.into_iter()
            .map(|k| {
                let score = self.score(k).expect("candidate is counted");
                (Phrase::from_key_unchecked(k.clone()), self.ngrams[k], score)
            })
            .collect()
    }
}

/// Builds a lexicon of frequent, strongly associated n-grams.
pub fn induce_lexicon<I, T, S>(corpus: I, params: LexiconParams) -> Result<MweLexicon>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    params.validate()?;
    let mut counts = NgramCounts::new(params.max_len);
    for doc in corpus {
        counts.add_document(doc.as_ref());
    }
    lexicon_from_counts(&counts, params)
}

pub fn lexicon_from_counts(counts: &NgramCounts, params: LexiconParams) -> Result<MweLexicon> {
    params.validate()?;
    if counts.documents() == 0 {
        return Err(Error::InvalidInput("lexicon corpus is empty".into()));
    }
    MweLexicon::new(
        counts
            .scored(params.min_count)
            .into_iter()
            .filter(|&(_, _, s)| s >= params.min_score)
            .map(|(p, _, _)| p),
    )
}
