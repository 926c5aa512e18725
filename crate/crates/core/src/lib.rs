//! Streaming detection of social action in geo-tagged short messages.
//!
//! Messages are classified into four modes of action (singular or
//! collective, peaceful or forceful) by phrase-featured binary naive Bayes
//! classifiers, one per mode plus the collapsed modes built from them. The
//! crate then turns classified streams into diagnostic products:
//!
//! - hourly presence series (sum of posteriors per hour) in [`analytics`]
//! - density clusters with per-mode positive fractions in [`geo`]
//! - phrase shifts explaining a classification in [`explain`]
//! - county-level activity tables in [`analytics`]
//!
//! The [`pipeline`] module binds these stages to files on disk and backs the
//! `actionlens` binary; [`service`] serves the resulting exports read-only.
//!
//! Every capability has a runnable example under `examples/`:
//!
//! ```bash
//! cargo run -p actionlens --example train_and_classify
//! ```

#![forbid(unsafe_code)]

pub mod analytics;
pub mod classify;
pub mod error;
pub mod explain;
pub mod export;
pub mod geo;
pub mod ingest;
pub mod pipeline;
pub mod segment;
pub mod service;
pub mod stream;
pub mod synth;

pub use classify::{ActionMode, BayesModel, ModelBundle};
pub use error::{Error, Result};
pub use ingest::{EventWindow, Tweet};
pub use segment::{Document, MweLexicon, Phrase};

/// UTC instant with second precision.
pub type Timestamp = chrono::DateTime<chrono::Utc>;
