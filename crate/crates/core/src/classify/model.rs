use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ActionMode;
use crate::segment::{Document, Phrase};
use crate::{Error, Result};

pub const MODEL_SCHEMA: &str = "actionlens.model/v1";
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Largest log10 posterior-odds magnitude used when exponentiating.
const MAX_LOG_ODDS: f64 = 350.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Positive,
    Negative,
}

/// Multinomial naive Bayes model for one mode, in log10 space.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesModel {
    pub mode: ActionMode,
    pub alpha: f64,
    pub log_prior_pos: f64,
    pub log_prior_neg: f64,
    /// Phrase -> (log10 likelihood | positive, log10 likelihood | negative).
    pub loglik: HashMap<Phrase, (f64, f64)>,
    pub unseen_pos: f64,
    pub unseen_neg: f64,
    pub threshold: f64,
    pub vocab_size: usize,
    pub docs_pos: u64,
    pub docs_neg: u64,
}

/// Trains one mode's classifier with additive smoothing:
/// `L(w|c) = (count(w, c) + alpha) / (tokens(c) + alpha * V)`, where token
/// counts are phrase occurrences and `V` is the vocabulary of both classes.
pub fn train_mode<'a, I>(docs: I, mode: ActionMode, alpha: f64) -> Result<BayesModel>
where
    I: IntoIterator<Item = (&'a Document, bool)>,
{
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be > 0, got {alpha}")));
    }
    let mut counts: HashMap<&Phrase, (u64, u64)> = HashMap::new();
    let (mut docs_pos, mut docs_neg) = (0u64, 0u64);
    let (mut tokens_pos, mut tokens_neg) = (0u64, 0u64);
    for (doc, positive) in docs {
        if positive {
            docs_pos += 1;
        } else {
            docs_neg += 1;
        }
        for (p, f) in doc.iter() {
            let slot = counts.entry(p).or_insert((0, 0));
            if positive {
                slot.0 += f as u64;
                tokens_pos += f as u64;
            } else {
                slot.1 += f as u64;
                tokens_neg += f as u64;
            }
        }
    }
    if docs_pos == 0 || docs_neg == 0 {
        return Err(Error::DegenerateTrainingSet(format!(
            "{mode}: {docs_pos} positive and {docs_neg} negative documents"
        )));
    }

    if counts.is_empty() {
        return Err(Error::DegenerateTrainingSet(format!("{mode}: no phrases in the corpus")));
    }
    let v = counts.len() as f64;
    let denom_pos = tokens_pos as f64 + alpha * v;
    let denom_neg = tokens_neg as f64 + alpha * v;
    let ll = |c: u64, denom: f64| ((c as f64 + alpha) / denom).log10();
    let loglik = counts
        .iter()
        .map(|(&p, &(cp, cn))| (p.clone(), (ll(cp, denom_pos), ll(cn, denom_neg))))
        .collect();
    let n = (docs_pos + docs_neg) as f64;

    Ok(BayesModel {
        mode,
        alpha,
        log_prior_pos: (docs_pos as f64 / n).log10(),
        log_prior_neg: (docs_neg as f64 / n).log10(),
        loglik,
        unseen_pos: ll(0, denom_pos),
        unseen_neg: ll(0, denom_neg),
        threshold: DEFAULT_THRESHOLD,
        vocab_size: counts.len(),
        docs_pos,
        docs_neg,
    })
}

impl BayesModel {
    /// Log10 likelihood pair for a phrase, falling back to the unseen values.
    pub fn likelihoods(&self, phrase: &str) -> ((f64, f64), bool) {
        match self.loglik.get(phrase) {
            Some(&pair) => (pair, true),
            None => ((self.unseen_pos, self.unseen_neg), false),
        }
    }

    pub fn log_prior(&self, class: Class) -> f64 {
        match class {
            Class::Positive => self.log_prior_pos,
            Class::Negative => self.log_prior_neg,
        }
    }

    /// `log_prior_c + sum_i f(w_i) * log10 L(w_i | c)`.
    pub fn class_score(&self, doc: &Document, class: Class) -> f64 {
        let mut score = self.log_prior(class);
        for (p, f) in doc.iter() {
            let ((lp, ln), _) = self.likelihoods(p.as_str());
            score += f as f64
                * match class {
                    Class::Positive => lp,
                    Class::Negative => ln,
                };
        }
        score
    }

    /// Negated likelihood sum, the entropic framing of a class score.
    pub fn entropic_score(&self, doc: &Document, class: Class) -> f64 {
        -(self.class_score(doc, class) - self.log_prior(class))
    }

    /// Base-10 posterior log-odds of the positive class.
    pub fn log_odds(&self, doc: &Document) -> f64 {
        self.class_score(doc, Class::Positive) - self.class_score(doc, Class::Negative)
    }

    pub fn posterior(&self, doc: &Document) -> f64 {
        posterior_from_log_odds(self.log_odds(doc))
    }

    pub fn is_positive(&self, posterior: f64) -> bool {
        posterior >= self.threshold
    }

    pub fn check_invariants(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(format!("model {}: {what}", self.mode)));
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} outside [0, 1]", self.threshold));
        }
        let prior_sum = 10f64.powf(self.log_prior_pos) + 10f64.powf(self.log_prior_neg);
        if (prior_sum - 1.0).abs() > 1e-12 {
            return bad(format!("priors sum to {prior_sum}"));
        }
        let ok = |x: f64| x.is_finite() && x <= 0.0;
        if !ok(self.unseen_pos) || !ok(self.unseen_neg) {
            return bad("unseen log-likelihoods must be finite and <= 0".into());
        }
        if let Some((p, _)) = self.loglik.iter().find(|(_, &(a, b))| !ok(a) || !ok(b)) {
            return bad(format!("log-likelihoods of {p} must be finite and <= 0"));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return bad("alpha must be > 0".into());
        }
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        let mut loglik: Vec<(String, String, String)> = self
            .loglik
            .iter()
            .map(|(p, &(a, b))| (p.as_str().to_string(), fmt17(a), fmt17(b)))
            .collect();
        loglik.sort();
        ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            mode: self.mode,
            alpha: fmt17(self.alpha),
            log_prior_pos: fmt17(self.log_prior_pos),
            log_prior_neg: fmt17(self.log_prior_neg),
            unseen_pos: fmt17(self.unseen_pos),
            unseen_neg: fmt17(self.unseen_neg),
            threshold: fmt17(self.threshold),
            vocab_size: self.vocab_size,
            docs_pos: self.docs_pos,
            docs_neg: self.docs_neg,
            loglik,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.schema != MODEL_SCHEMA {
            return Err(Error::SchemaMismatch {
                expected: MODEL_SCHEMA.into(),
                found: file.schema,
            });
        }
        let mut loglik = HashMap::with_capacity(file.loglik.len());
        for (p, a, b) in file.loglik {
            let phrase = Phrase::parse(&p)?;
            if loglik.insert(phrase, (parse17(&a)?, parse17(&b)?)).is_some() {
                return Err(Error::InvalidInput(format!("duplicate phrase {p:?} in model")));
            }
        }
        let model = BayesModel {
            mode: file.mode,
            alpha: parse17(&file.alpha)?,
            log_prior_pos: parse17(&file.log_prior_pos)?,
            log_prior_neg: parse17(&file.log_prior_neg)?,
            loglik,
            unseen_pos: parse17(&file.unseen_pos)?,
            unseen_neg: parse17(&file.unseen_neg)?,
            threshold: parse17(&file.threshold)?,
            vocab_size: file.vocab_size,
            docs_pos: file.docs_pos,
            docs_neg: file.docs_neg,
        };
        model.check_invariants()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_file())
            .map_err(|e| Error::json("model", e))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        BayesModel::from_file(file)
    }
}

/// `1 / (1 + 10^-log_odds)`, with the exponent clamped so extreme evidence
/// saturates to 0 or 1 instead of producing NaN.
pub fn posterior_from_log_odds(log_odds: f64) -> f64 {
    let d = (-log_odds).clamp(-MAX_LOG_ODDS, MAX_LOG_ODDS);
    1.0 / (1.0 + 10f64.powf(d))
}

/// On-disk model. Reals are decimal strings with 17 significant digits so
/// a reload is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub mode: ActionMode,
    pub alpha: String,
    pub log_prior_pos: String,
    pub log_prior_neg: String,
    pub unseen_pos: String,
    pub unseen_neg: String,
    pub threshold: String,
    pub vocab_size: usize,
    pub docs_pos: u64,
    pub docs_neg: u64,
    pub loglik: Vec<(String, String, String)>,
}

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse17(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::InvalidInput(format!("not a decimal real: {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(pairs: &[(&str, u32)]) -> Document {
        Document::from_counts(pairs.iter().map(|&(p, f)| (Phrase::parse(p).unwrap(), f)))
    }

    #[test]
    fn smoothing_hand_arithmetic() {
        let a = doc(&[("a", 1)]);
        let b = doc(&[("b", 1)]);
        let m = train_mode([(&a, true), (&b, false)], ActionMode::All, 1.0).unwrap();
        assert_eq!(m.vocab_size, 2);
        let (lp, ln) = m.loglik[&Phrase::parse("a").unwrap()];
        assert!((10f64.powf(lp) - 2.0 / 3.0).abs() < 1e-15);
        assert!((10f64.powf(ln) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.log_prior_pos, m.log_prior_neg);
        assert_eq!(m.threshold, 0.5);
        m.check_invariants().unwrap();
    }

    #[test]
    fn degenerate_training_set() {
        let a = doc(&[("a", 1)]);
        let err = train_mode([(&a, true)], ActionMode::All, 1.0).unwrap_err();
        assert_eq!(err.kind(), "degenerate-training-set");
        assert!(train_mode([(&a, true), (&a, false)], ActionMode::All, 0.0).is_err());
    }

    fn hand_model(lp: f64, ln: f64, prior: f64) -> BayesModel {
        BayesModel {
            mode: ActionMode::All,
            alpha: 1.0,
            log_prior_pos: prior,
            log_prior_neg: prior,
            loglik: HashMap::from([(Phrase::parse("a").unwrap(), (lp, ln))]),
            unseen_pos: -3.0,
            unseen_neg: -3.0,
            threshold: 0.5,
            vocab_size: 1,
            docs_pos: 1,
            docs_neg: 1,
        }
    }

    #[test]
    fn class_score_examples() {
        let m = hand_model(-1.0, -1.0, -0.3);
        assert_eq!(m.class_score(&Document::new(), Class::Positive), -0.3);
        let s = m.class_score(&doc(&[("a", 2)]), Class::Positive);
        assert!((s - (-2.3)).abs() < 1e-15);
        assert!((m.entropic_score(&doc(&[("a", 2)]), Class::Positive) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn posterior_examples() {
        let half = 0.5f64.log10();
        let m = hand_model(0.75f64.log10(), 0.25f64.log10(), half);
        assert!((m.posterior(&doc(&[("a", 1)])) - 0.75).abs() < 1e-15);
        assert_eq!(m.posterior(&Document::new()), 0.5);
    }

    #[test]
    fn posterior_saturates_without_nan() {
        assert_eq!(posterior_from_log_odds(1e6), 1.0);
        assert_eq!(posterior_from_log_odds(-1e6), 0.0);
        assert_eq!(posterior_from_log_odds(f64::INFINITY), 1.0);
        assert_eq!(posterior_from_log_odds(0.0), 0.5);
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let a = doc(&[("tear gas", 3), ("x", 1)]);
        let b = doc(&[("y", 2), ("x", 1)]);
        let c = doc(&[("z", 1)]);
        let mut m = train_mode([(&a, true), (&b, false), (&c, false)], ActionMode::Force, 0.7)
            .unwrap();
        m.threshold = 0.1 + 0.2;
        let back = BayesModel::from_file(m.to_file()).unwrap();
        assert_eq!(back, m);
        let mut wrong = m.to_file();
        wrong.schema = "actionlens.model/v0".into();
        assert_eq!(BayesModel::from_file(wrong).unwrap_err().kind(), "schema-mismatch");
    }
}
