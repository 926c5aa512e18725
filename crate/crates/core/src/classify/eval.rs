//! Threshold fitting, stratified k-fold cross-validation and out-of-domain
//! holdout evaluation.
//!
//! Thresholds are always tuned on training data only: the training portion
//! is itself split into `inner_k` stratified folds, each document is scored
//! by a model that did not see it, and the F1-optimal cutoff over those
//! out-of-fold posteriors becomes the threshold of the model trained on the
//! whole training portion.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{train_mode, BayesModel, DEFAULT_ALPHA};
use super::tune::{tune_threshold, Confusion, Metrics};
use super::ActionMode;
use crate::segment::Document;
use crate::{Error, Result};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_INNER_K: usize = 5;

/// A coded training document.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDoc {
    pub id: String,
    pub doc: Document,
    /// Atomic modes only.
    pub labels: BTreeSet<ActionMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub k: usize,
    pub inner_k: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: DEFAULT_K,
            inner_k: DEFAULT_INNER_K,
            alpha: DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

/// splitmix64 step, used to derive independent per-mode and per-fold seeds.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mode_salt(mode: ActionMode) -> u64 {
    ActionMode::ALL_MODES.iter().position(|&m| m == mode).unwrap() as u64 + 1
}

/// Fold index per item. Positives and negatives are shuffled separately and
/// dealt round-robin, so per-fold positive counts differ by at most one.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; labels.len()];
    for (r, &i) in pos.iter().enumerate() {
        fold[i] = r % k;
    }
    let offset = pos.len() % k;
    for (r, &i) in neg.iter().enumerate() {
        fold[i] = (offset + r) % k;
    }
    fold
}

/// Posterior of every document under a model that was not trained on it.
pub fn out_of_fold_posteriors(
    docs: &[&Document],
    labels: &[bool],
    mode: ActionMode,
    k: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let folds = stratified_folds(labels, k, seed);
    let mut posteriors = vec![0.0; docs.len()];
    for f in 0..k {
        let train = (0..docs.len())
            .filter(|&i| folds[i] != f)
            .map(|i| (docs[i], labels[i]));
        let model = train_mode(train, mode, alpha)?;
        for i in (0..docs.len()).filter(|&i| folds[i] == f) {
            posteriors[i] = model.posterior(docs[i]);
        }
    }
    Ok(posteriors)
}

/// Trains on all of `docs` and sets the threshold tuned on cross-fitted
/// posteriors.
pub fn fit_mode(
    docs: &[&Document],
    labels: &[bool],
    mode: ActionMode,
    inner_k: usize,
    alpha: f64,
    seed: u64,
) -> Result<BayesModel> {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    let k = inner_k.min(n_pos).min(n_neg);
    if k < 2 {
        return Err(Error::DegenerateTrainingSet(format!(
            "{mode}: threshold tuning needs >= 2 positive and >= 2 negative documents, \
             got {n_pos} and {n_neg}"
        )));
    }
    let oof = out_of_fold_posteriors(docs, labels, mode, k, alpha, seed)?;
    let scores: Vec<(f64, bool)> = oof.into_iter().zip(labels.iter().copied()).collect();
    let tuned = tune_threshold(&scores)?;
    let mut model = train_mode(docs.iter().copied().zip(labels.iter().copied()), mode, alpha)?;
    model.threshold = tuned.threshold;
    Ok(model)
}

/// Convenience wrapper over [`fit_mode`] for coded documents.
pub fn fit_labeled(corpus: &[LabeledDoc], mode: ActionMode, cfg: &EvalConfig) -> Result<BayesModel> {
    let docs: Vec<&Document> = corpus.iter().map(|d| &d.doc).collect();
    let labels: Vec<bool> = corpus.iter().map(|d| mode.is_positive(&d.labels)).collect();
    fit_mode(&docs, &labels, mode, cfg.inner_k, cfg.alpha, mix_seed(cfg.seed, mode_salt(mode)))
}

pub fn confusion_on(model: &BayesModel, docs: &[&Document], labels: &[bool]) -> Confusion {
    Confusion::from_predictions(
        docs.iter()
            .zip(labels)
            .map(|(d, &l)| (model.is_positive(model.posterior(d)), l)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    CrossValidation { k: usize, inner_k: usize, seed: u64 },
    Holdout { inner_k: usize, seed: u64, train_documents: usize, train_abundance: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub documents: usize,
    pub positives: u64,
    pub threshold: f64,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

/// Evaluation of one mode: pooled precision/recall/F1 in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: ActionMode,
    pub protocol: Protocol,
    /// Positive documents in the evaluated data.
    pub abundance: u64,
    pub documents: usize,
    /// Threshold of the deployable model (trained on all training data).
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub confusion: Confusion,
    pub folds: Vec<FoldReport>,
}

pub fn cross_validate(corpus: &[LabeledDoc], mode: ActionMode, cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.k < 2 {
        return Err(Error::InvalidInput(format!("k must be >= 2, got {}", cfg.k)));
    }
    let docs: Vec<&Document> = corpus.iter().map(|d| &d.doc).collect();
    let labels: Vec<bool> = corpus.iter().map(|d| mode.is_positive(&d.labels)).collect();
    let abundance = labels.iter().filter(|&&l| l).count();
    if abundance < cfg.k {
        return Err(Error::DegenerateTrainingSet(format!(
            "{mode}: {abundance} positives is fewer than k = {}",
            cfg.k
        )));
    }
    let mode_seed = mix_seed(cfg.seed, mode_salt(mode));
    let folds = stratified_folds(&labels, cfg.k, mode_seed);

    let mut pooled = Confusion::default();
    let mut reports = Vec::with_capacity(cfg.k);
    for f in 0..cfg.k {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..docs.len()).partition(|&i| folds[i] != f);
        let pick_docs = |idx: &[usize]| idx.iter().map(|&i| docs[i]).collect::<Vec<_>>();
        let pick_labels = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
        let (test_docs, test_labels) = (pick_docs(&test), pick_labels(&test));
        let model = fit_mode(
            &pick_docs(&train),
            &pick_labels(&train),
            mode,
            cfg.inner_k,
            cfg.alpha,
            mix_seed(mode_seed, f as u64 + 1),
        )?;
        let confusion = confusion_on(&model, &test_docs, &test_labels);
        pooled.merge(&confusion);
        reports.push(FoldReport {
            fold: f,
            documents: test.len(),
            positives: test_labels.iter().filter(|&&l| l).count() as u64,
            threshold: model.threshold,
            confusion,
            metrics: confusion.metrics(),
        });
    }
    let deployable = fit_mode(&docs, &labels, mode, cfg.inner_k, cfg.alpha, mode_seed)?;
    let m = pooled.metrics();
    Ok(EvalReport {
        mode,
        protocol: Protocol::CrossValidation {
            k: cfg.k,
            inner_k: cfg.inner_k,
            seed: cfg.seed,
        },
        abundance: abundance as u64,
        documents: docs.len(),
        threshold: deployable.threshold,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        precision_defined: m.precision_defined,
        recall_defined: m.recall_defined,
        confusion: pooled,
        folds: reports,
    })
}

/// Trains (and tunes) on `train`, measures on `test`. The two corpora must
/// not share document ids.
pub fn holdout_evaluate(
    train: &[LabeledDoc],
    test: &[LabeledDoc],
    mode: ActionMode,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let train_ids: HashSet<&str> = train.iter().map(|d| d.id.as_str()).collect();
    if let Some(d) = test.iter().find(|d| train_ids.contains(d.id.as_str())) {
        return Err(Error::InvalidInput(format!(
            "holdout corpora overlap: id {:?} is in both",
            d.id
        )));
    }
    let model = fit_labeled(train, mode, cfg)?;
    let docs: Vec<&Document> = test.iter().map(|d| &d.doc).collect();
    let labels: Vec<bool> = test.iter().map(|d| mode.is_positive(&d.labels)).collect();
    let confusion = confusion_on(&model, &docs, &labels);
    let m = confusion.metrics();
    Ok(EvalReport {
        mode,
        protocol: Protocol::Holdout {
            inner_k: cfg.inner_k,
            seed: cfg.seed,
            train_documents: train.len(),
            train_abundance: model.docs_pos,
        },
        abundance: labels.iter().filter(|&&l| l).count() as u64,
        documents: test.len(),
        threshold: model.threshold,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        precision_defined: m.precision_defined,
        recall_defined: m.recall_defined,
        confusion,
        folds: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::Phrase;

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<bool> = (0..103).map(|i| i % 7 == 0).collect();
        let folds = stratified_folds(&labels, 10, 42);
        assert_eq!(folds, stratified_folds(&labels, 10, 42));
        assert_ne!(folds, stratified_folds(&labels, 10, 43));
        let per_fold = |want: bool| {
            let mut c = vec![0usize; 10];
            for (i, &f) in folds.iter().enumerate() {
                if labels[i] == want {
                    c[f] += 1;
                }
            }
            c
        };
        let pos = per_fold(true);
        assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1);
        let sizes: Vec<usize> = per_fold(true).iter().zip(per_fold(false)).map(|(a, b)| a + b).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    fn ld(id: usize, word: &str, labels: &[ActionMode]) -> LabeledDoc {
        LabeledDoc {
            id: id.to_string(),
            doc: Document::from_counts([(Phrase::parse(word).unwrap(), 1)]),
            labels: labels.iter().copied().collect(),
        }
    }

    #[test]
    fn insufficient_positives() {
        let corpus: Vec<_> = (0..30)
            .map(|i| ld(i, "w", if i < 5 { &[ActionMode::SingularForce] } else { &[] }))
            .collect();
        let err = cross_validate(&corpus, ActionMode::SingularForce, &EvalConfig::default()).unwrap_err();
        assert_eq!(err.kind(), "degenerate-training-set");
        let cfg = EvalConfig { k: 1, ..Default::default() };
        assert!(cross_validate(&corpus, ActionMode::SingularForce, &cfg).is_err());
    }

    #[test]
    fn holdout_rejects_overlap_and_flags_empty_positives() {
        let train: Vec<_> = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    ld(i, "riot", &[ActionMode::CollectiveForce])
                } else {
                    ld(i, "lunch", &[])
                }
            })
            .collect();
        let cfg = EvalConfig::default();
        assert!(holdout_evaluate(&train, &train[..1], ActionMode::All, &cfg).is_err());
        let test: Vec<_> = (100..110).map(|i| ld(i, "lunch", &[])).collect();
        let r = holdout_evaluate(&train, &test, ActionMode::All, &cfg).unwrap();
        assert_eq!(r.abundance, 0);
        assert!(!r.recall_defined);
        assert_eq!(r.recall, 0.0);
    }
}
