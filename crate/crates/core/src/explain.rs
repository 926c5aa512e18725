//! Phrase shifts: per-phrase contributions to a classification.
//!
//! For a document counted as `f(w_i)`, phrase `w_i` contributes
//! `f(w_i) * (log10 L(w_i|+) - log10 L(w_i|-))` to the posterior log-odds.
//! Positive contributions pull toward the mode, negative ones away from it.
//! Out-of-vocabulary phrases are pooled under a single `<oov>` entry so the
//! contributions always add up to the log-odds minus the prior log-odds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::{ActionMode, BayesModel};
use crate::segment::Document;
use crate::{Error, Result};

pub const OOV_KEY: &str = "<oov>";
pub const DEFAULT_TOP_K: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEntry {
    pub phrase: String,
    pub contribution: f64,
    pub frequency: u64,
    /// `log10 L(w|+) - log10 L(w|-)` for one occurrence.
    pub log_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftScope {
    Single,
    Aggregate { documents: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseShift {
    pub mode: ActionMode,
    pub scope: ShiftScope,
    /// Sorted by |contribution| descending, ties by phrase.
    pub entries: Vec<ShiftEntry>,
    /// Sum of contributions, accumulated in phrase-key order.
    pub total: f64,
}

type FreqMap = BTreeMap<String, (u64, f64)>;

fn accumulate(model: &BayesModel, doc: &Document, into: &mut FreqMap) {
    for (p, f) in doc.iter() {
        let ((lp, ln), known) = model.likelihoods(p.as_str());
        let key = if known { p.as_str() } else { OOV_KEY };
        let slot = into.entry(key.to_string()).or_insert((0, lp - ln));
        slot.0 += f as u64;
    }
}

fn build(mode: ActionMode, scope: ShiftScope, freqs: FreqMap) -> PhraseShift {
    let mut total = 0.0;
    let mut entries: Vec<ShiftEntry> = freqs
        .into_iter()
        .map(|(phrase, (frequency, log_ratio))| {
            let contribution = frequency as f64 * log_ratio;
            total += contribution;
            ShiftEntry {
                phrase,
                contribution,
                frequency,
                log_ratio,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.contribution
            .abs()
            .total_cmp(&a.contribution.abs())
            .then_with(|| a.phrase.cmp(&b.phrase))
    });
    PhraseShift {
        mode,
        scope,
        entries,
        total,
    }
}

pub fn shift_single(model: &BayesModel, doc: &Document) -> PhraseShift {
    let mut freqs = FreqMap::new();
    accumulate(model, doc, &mut freqs);
    build(model.mode, ShiftScope::Single, freqs)
}

/// Shift of the frequency-summed document.
pub fn shift_aggregate<'a, I>(model: &BayesModel, docs: I) -> Result<PhraseShift>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut freqs = FreqMap::new();
    let mut n = 0;
    for d in docs {
        accumulate(model, d, &mut freqs);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySelection(
            "phrase shift needs at least one document".into(),
        ));
    }
    Ok(build(model.mode, ShiftScope::Aggregate { documents: n }, freqs))
}

impl PhraseShift {
    fn documents(&self) -> usize {
        match self.scope {
            ShiftScope::Single => 1,
            ShiftScope::Aggregate { documents } => documents,
        }
    }

    /// Aggregate over the union of the documents behind `self` and `other`.
    pub fn merge(&self, other: &PhraseShift) -> Result<PhraseShift> {
        if self.mode != other.mode {
            return Err(Error::InvalidInput(format!(
                "cannot merge shifts for {} and {}",
                self.mode, other.mode
            )));
        }
        let mut freqs = FreqMap::new();
        for e in self.entries.iter().chain(&other.entries) {
            let slot = freqs.entry(e.phrase.clone()).or_insert((0, e.log_ratio));
            slot.0 += e.frequency;
        }
        let documents = self.documents() + other.documents();
        Ok(build(self.mode, ShiftScope::Aggregate { documents }, freqs))
    }

    /// The first `k` entries and whether anything was cut.
    pub fn top_k(&self, k: usize) -> (&[ShiftEntry], bool) {
        let k = k.min(self.entries.len());
        (&self.entries[..k], k < self.entries.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::train_mode;
    use crate::segment::Phrase;
    use std::collections::HashMap;

    fn doc(pairs: &[(&str, u32)]) -> Document {
        Document::from_counts(pairs.iter().map(|&(p, f)| (Phrase::parse(p).unwrap(), f)))
    }

    fn model(entries: &[(&str, f64, f64)]) -> BayesModel {
        BayesModel {
            mode: ActionMode::CollectiveForce,
            alpha: 1.0,
            log_prior_pos: 0.5f64.log10(),
            log_prior_neg: 0.5f64.log10(),
            loglik: entries
                .iter()
                .map(|&(p, a, b)| (Phrase::parse(p).unwrap(), (a.log10(), b.log10())))
                .collect::<HashMap<_, _>>(),
            unseen_pos: 0.001f64.log10(),
            unseen_neg: 0.002f64.log10(),
            threshold: 0.5,
            vocab_size: entries.len(),
            docs_pos: 1,
            docs_neg: 1,
        }
    }

    #[test]
    fn hand_arithmetic() {
        let m = model(&[("w", 0.1, 0.01), ("same", 0.2, 0.2)]);
        let s = shift_single(&m, &doc(&[("w", 2), ("same", 4)]));
        assert_eq!(s.entries[0].phrase, "w");
        assert!((s.entries[0].contribution - 2.0).abs() < 1e-12);
        assert_eq!(s.entries[1].contribution, 0.0);
    }

    #[test]
    fn oov_pooled_and_identity_holds() {
        let m = model(&[("w", 0.1, 0.01)]);
        let d = doc(&[("w", 1), ("x", 2), ("y", 1)]);
        let s = shift_single(&m, &d);
        let oov = s.entries.iter().find(|e| e.phrase == OOV_KEY).unwrap();
        assert_eq!(oov.frequency, 3);
        let expected = m.log_odds(&d) - (m.log_prior_pos - m.log_prior_neg);
        assert!((s.total - expected).abs() < 1e-12);
    }

    #[test]
    fn aggregate_of_one_equals_single() {
        let a = doc(&[("riot", 2), ("police", 1)]);
        let b = doc(&[("lunch", 1)]);
        let m = train_mode([(&a, true), (&b, false)], ActionMode::Force, 1.0).unwrap();
        let single = shift_single(&m, &a);
        let agg = shift_aggregate(&m, [&a]).unwrap();
        assert_eq!(agg.entries, single.entries);
        assert_eq!(agg.total, single.total);
        assert!(shift_aggregate(&m, std::iter::empty()).is_err());
    }

    #[test]
    fn disjoint_docs_union_entries() {
        let m = model(&[("a", 0.3, 0.1), ("b", 0.1, 0.4)]);
        let agg = shift_aggregate(&m, [&doc(&[("a", 1)]), &doc(&[("b", 1)])]).unwrap();
        let sa = shift_single(&m, &doc(&[("a", 1)]));
        let sb = shift_single(&m, &doc(&[("b", 1)]));
        assert_eq!(agg.entries.len(), 2);
        for e in &agg.entries {
            let src = if e.phrase == "a" { &sa } else { &sb };
            assert_eq!(e.contribution, src.entries[0].contribution);
        }
        assert_eq!(agg.scope, ShiftScope::Aggregate { documents: 2 });
    }

    #[test]
    fn top_k_truncation() {
        let m = model(&[("a", 0.3, 0.1), ("b", 0.1, 0.4)]);
        let s = shift_single(&m, &doc(&[("a", 1), ("b", 1)]));
        assert!(s.top_k(1).1);
        assert_eq!(s.top_k(5).0.len(), 2);
        assert!(!s.top_k(5).1);
    }
}
