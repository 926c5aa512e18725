//! Phrase-featured binary naive Bayes classifiers, one per mode of action.
//!
//! All arithmetic is in log10. A model scores a document per class as
//! `log_prior_c + sum_i f(w_i) * log10 L(w_i | c)` and turns the difference
//! between the two classes into a posterior. The nine classifiers (four
//! atomic modes plus their five unions) are trained independently on their
//! own label projections and carry their own F1-tuned thresholds.

mod bundle;
pub mod eval;
mod mode;
mod model;
pub mod tune;

pub use bundle::{Classification, ModelBundle, BUNDLE_SCHEMA};
pub use eval::{
    cross_validate, fit_labeled, fit_mode, holdout_evaluate, stratified_folds, EvalConfig,
    EvalReport, FoldReport, LabeledDoc, Protocol, DEFAULT_INNER_K, DEFAULT_K,
};
pub use mode::{collapse_labels, ActionMode};
pub use model::{
    fmt17, posterior_from_log_odds, train_mode, BayesModel, Class, ModelFile, DEFAULT_ALPHA,
    DEFAULT_THRESHOLD, MODEL_SCHEMA,
};
pub use tune::{tune_threshold, Confusion, Metrics, TunedThreshold};
