//! File-level pipeline stages, one function per CLI subcommand.
//!
//! Every stage is a pure function of its input files and parameters.
//! JSON exports carry a `schema` tag and a [`Provenance`] block holding the
//! parameters and the sha256 of every input, so identical inputs always
//! produce byte-identical outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Duration;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytics::{
    ceil_hour, county_activity, floor_hour, hourly_presence, load_boundaries, ts_serde,
    write_counties_csv, write_series_csv, CountyStat, TimeBin,
};
use crate::classify::{
    cross_validate, holdout_evaluate, ActionMode, EvalConfig, EvalReport, LabeledDoc, ModelBundle,
};
use crate::explain::{shift_aggregate, ShiftEntry, ShiftScope};
use crate::export::{
    write_json, Provenance, CLASSIFY_META_SCHEMA, CLUSTERS_SCHEMA, COUNTIES_SCHEMA, EVAL_SCHEMA,
    SERIES_SCHEMA, SHIFT_SCHEMA,
};
use crate::geo::{cluster_window, Cluster, GeoTweet};
use crate::ingest::{normalize_text, protest_filter, read_event_windows, Tally, Tweet, TweetReader};
use crate::segment::{document_from_text, induce_lexicon, tokenize, LexiconParams, MweLexicon};
use crate::stream::{read_classified, ClassifiedTweet};
use crate::{Error, Result, Timestamp};

/// Optional JSON object of parameter defaults (`--config`). Keys match the
/// long flag names with `-` replaced by `_`.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile(serde_json::Map<String, Value>);

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match serde_json::from_str(&text).map_err(|e| Error::json("config file", e))? {
            Value::Object(m) => Ok(ConfigFile(m)),
            _ => Err(Error::InvalidInput("config file must hold a JSON object".into())),
        }
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                serde_json::from_value(v.clone()).map_err(|e| Error::json(format!("config `{key}`"), e))
            })
            .transpose()
    }

    /// Command-line value, else config value, else default.
    pub fn pick<T: DeserializeOwned>(&self, cli: Option<T>, key: &str, default: T) -> Result<T> {
        match cli {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }
}

/// Half-open `[from, to)` interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    #[serde(with = "ts_serde")]
    pub from: Timestamp,
    #[serde(with = "ts_serde")]
    pub to: Timestamp,
}

impl Span {
    pub fn new(from: Timestamp, to: Timestamp) -> Result<Self> {
        if to < from {
            return Err(Error::InvalidInput("span ends before it starts".into()));
        }
        Ok(Span { from, to })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        t >= self.from && t < self.to
    }

    /// Hour-aligned span covering every record, or the explicit bounds.
    fn resolve(from: Option<Timestamp>, to: Option<Timestamp>, records: &[ClassifiedTweet]) -> Result<Span> {
        let min = records.iter().map(|r| r.tweet.timestamp).min();
        let max = records.iter().map(|r| r.tweet.timestamp).max();
        let from = from.or(min.map(floor_hour));
        let to = to.or(max.map(|t| floor_hour(t) + Duration::hours(1)));
        match (from, to) {
            (Some(f), Some(t)) => Span::new(f, t),
            _ => Err(Error::EmptySelection(
                "no records to derive a time span from; pass --from/--to".into(),
            )),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Reads and validates an input stream, tallying rejections.
pub fn read_tweets(path: &Path) -> Result<(Vec<Tweet>, Tally)> {
    let mut tally = Tally::default();
    let mut tweets = Vec::new();
    for parsed in TweetReader::new(open(path)?) {
        let parsed = parsed?;
        tally.record(&parsed.outcome);
        if let Ok(t) = parsed.outcome {
            tweets.push(t);
        }
    }
    Ok((tweets, tally))
}

pub fn load_lexicon(path: &Path) -> Result<MweLexicon> {
    MweLexicon::read(open(path)?)
}

fn load_classified(path: &Path) -> Result<Vec<ClassifiedTweet>> {
    read_classified(open(path)?)
}

/// Coded documents from a training corpus; records without labels are counted and skipped.
pub fn labeled_corpus(tweets: &[Tweet], lexicon: &MweLexicon) -> (Vec<LabeledDoc>, usize) {
    let mut unlabeled = 0;
    let docs = tweets
        .iter()
        .filter_map(|t| match &t.labels {
            Some(labels) => Some(LabeledDoc {
                id: t.id.clone(),
                doc: document_from_text(&t.text, lexicon),
                labels: labels.clone(),
            }),
            None => {
                unlabeled += 1;
                None
            }
        })
        .collect();
    (docs, unlabeled)
}

// ---- lexicon ----

#[derive(Debug, Clone)]
pub struct LexiconArgs {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub params: LexiconParams,
}

pub fn cmd_lexicon(a: &LexiconArgs) -> Result<Value> {
    let (tweets, tally) = read_tweets(&a.corpus)?;
    let normalized: Vec<String> = tweets.iter().map(|t| normalize_text(&t.text)).collect();
    let lexicon = induce_lexicon(normalized.iter().map(|s| tokenize(s)), a.params)?;
    let prov = Provenance::new(
        "lexicon",
        json!({
            "min_count": a.params.min_count,
            "min_score": a.params.min_score,
            "max_len": a.params.max_len,
        }),
    )
    .with_input("corpus", &a.corpus)?;
    let header = vec![
        "actionlens lexicon v1".to_string(),
        format!("provenance {}", serde_json::to_string(&prov).expect("provenance serializes")),
    ];
    let mut out = create(&a.out)?;
    lexicon.write(&mut out, &header).map_err(|e| Error::io(&a.out, e))?;
    out.flush().map_err(|e| Error::io(&a.out, e))?;
    Ok(json!({ "entries": lexicon.len(), "input": tally }))
}

// ---- train ----

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub corpus: PathBuf,
    pub lexicon: PathBuf,
    pub out_dir: PathBuf,
    pub alpha: f64,
    pub inner_k: usize,
    pub seed: u64,
}

pub fn cmd_train(a: &TrainArgs) -> Result<Value> {
    let lexicon = load_lexicon(&a.lexicon)?;
    let (tweets, tally) = read_tweets(&a.corpus)?;
    let (corpus, unlabeled) = labeled_corpus(&tweets, &lexicon);
    let cfg = EvalConfig {
        inner_k: a.inner_k,
        alpha: a.alpha,
        seed: a.seed,
        ..EvalConfig::default()
    };
    let bundle = ModelBundle::train(&corpus, lexicon, &ActionMode::ALL_MODES, &cfg)?;
    let prov = Provenance::new(
        "train",
        json!({ "alpha": a.alpha, "inner_k": a.inner_k, "seed": a.seed }),
    )
    .with_input("corpus", &a.corpus)?
    .with_input("lexicon", &a.lexicon)?;
    bundle.save(&a.out_dir, prov.to_value())?;
    Ok(json!({
        "documents": corpus.len(),
        "unlabeled": unlabeled,
        "input": tally,
        "thresholds": bundle.thresholds(),
    }))
}

// ---- eval ----

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub corpus: PathBuf,
    pub lexicon: PathBuf,
    /// Out-of-domain test corpus; when set, `corpus` is the training side.
    pub holdout: Option<PathBuf>,
    pub modes: Vec<ActionMode>,
    pub config: EvalConfig,
    pub out: PathBuf,
    /// Flat table; a per-fold appendix goes next to it as `<stem>.folds.csv`.
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub mode: ActionMode,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalExport {
    pub schema: &'static str,
    pub reports: Vec<EvalReport>,
    pub skipped: Vec<Skipped>,
    pub provenance: Provenance,
}

pub const EVAL_COLUMNS: [&str; 6] = ["Action", "Abundance", "Threshold", "P", "R", "F1"];

/// Table with one row per evaluated mode.
pub fn write_eval_table<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVAL_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.mode.title().to_string(),
            r.abundance.to_string(),
            format!("{:.2}", r.threshold),
            format!("{:.2}", r.precision),
            format!("{:.2}", r.recall),
            format!("{:.2}", r.f1),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_fold_appendix<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Action", "Fold", "Documents", "Positives", "Threshold", "P", "R", "F1"])?;
    for r in reports {
        for f in &r.folds {
            w.write_record([
                r.mode.title().to_string(),
                f.fold.to_string(),
                f.documents.to_string(),
                f.positives.to_string(),
                format!("{:.4}", f.threshold),
                format!("{:.2}", f.metrics.precision),
                format!("{:.2}", f.metrics.recall),
                format!("{:.2}", f.metrics.f1),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn cmd_eval(a: &EvalArgs) -> Result<EvalExport> {
    let lexicon = load_lexicon(&a.lexicon)?;
    let (tweets, _) = read_tweets(&a.corpus)?;
    let (corpus, _) = labeled_corpus(&tweets, &lexicon);
    let test = match &a.holdout {
        Some(p) => Some(labeled_corpus(&read_tweets(p)?.0, &lexicon).0),
        None => None,
    };
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &mode in &a.modes {
        let r = match &test {
            Some(test) => holdout_evaluate(&corpus, test, mode, &a.config),
            None => cross_validate(&corpus, mode, &a.config),
        };
        match r {
            Ok(r) => reports.push(r),
            Err(e @ Error::DegenerateTrainingSet(_)) => skipped.push(Skipped {
                mode,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    let mut prov = Provenance::new(
        "eval",
        json!({
            "k": a.config.k,
            "inner_k": a.config.inner_k,
            "alpha": a.config.alpha,
            "seed": a.config.seed,
            "modes": a.modes,
            "protocol": if a.holdout.is_some() { "holdout" } else { "cross_validation" },
        }),
    )
    .with_input("corpus", &a.corpus)?
    .with_input("lexicon", &a.lexicon)?;
    if let Some(h) = &a.holdout {
        prov = prov.with_input("holdout", h)?;
    }
    let export = EvalExport {
        schema: EVAL_SCHEMA,
        reports,
        skipped,
        provenance: prov,
    };
    write_json(&a.out, &export)?;
    if let Some(table) = &a.table {
        write_eval_table(&export.reports, create(table)?)?;
        write_fold_appendix(&export.reports, create(&table.with_extension("folds.csv"))?)?;
    }
    Ok(export)
}

// ---- classify ----

#[derive(Debug, Clone)]
pub struct ClassifyArgs {
    pub input: PathBuf,
    pub bundle: PathBuf,
    /// Event windows; when set only tweets inside some window are classified.
    pub windows: Option<PathBuf>,
    /// Per-mode threshold overrides.
    pub thresholds: BTreeMap<ActionMode, f64>,
    pub out: PathBuf,
}

/// Path of the provenance sidecar written next to a classified stream.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<Value> {
    let mut bundle = ModelBundle::load(&a.bundle)?;
    for (&mode, &t) in &a.thresholds {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("threshold for {mode} outside [0, 1]: {t}")));
        }
        bundle
            .models
            .get_mut(&mode)
            .ok_or_else(|| Error::MissingModel(mode.to_string()))?
            .threshold = t;
    }
    let windows = match &a.windows {
        Some(p) => Some(read_event_windows(open(p)?)?),
        None => None,
    };

    let mut tally = Tally::default();
    let mut accepted = Vec::new();
    for parsed in TweetReader::new(open(&a.input)?) {
        let parsed = parsed?;
        tally.record(&parsed.outcome);
        if let Ok(t) = parsed.outcome {
            accepted.push(t);
        }
    }
    let selected: Vec<Tweet> = match &windows {
        Some(w) => protest_filter(accepted, w)?.map(|f| f.tweet).collect(),
        None => accepted,
    };

    let mut out = create(&a.out)?;
    for tweet in &selected {
        let classification = bundle.classify_text(&tweet.text);
        let rec = ClassifiedTweet {
            tweet: tweet.clone(),
            classification,
        };
        writeln!(out, "{}", rec.to_line()).map_err(|e| Error::io(&a.out, e))?;
    }
    out.flush().map_err(|e| Error::io(&a.out, e))?;

    let mut prov = Provenance::new(
        "classify",
        json!({ "threshold_overrides": a.thresholds, "thresholds": bundle.thresholds() }),
    )
    .with_input("tweets", &a.input)?
    .with_input("bundle", &a.bundle)?;
    if let Some(w) = &a.windows {
        prov = prov.with_input("windows", w)?;
    }
    let meta = json!({
        "schema": CLASSIFY_META_SCHEMA,
        "input": tally,
        "classified": selected.len(),
        "provenance": prov,
    });
    write_json(&meta_path(&a.out), &meta)?;
    Ok(meta)
}

// ---- explain ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Tweets classified positive for the mode.
    Positive,
    All,
}

#[derive(Debug, Clone)]
pub struct ExplainArgs {
    pub classified: PathBuf,
    pub bundle: PathBuf,
    pub mode: ActionMode,
    pub from: Timestamp,
    /// Defaults to one hour after `from`.
    pub to: Option<Timestamp>,
    pub selection: Selection,
    pub top_k: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftExport {
    pub schema: String,
    pub mode: ActionMode,
    pub selection: Selection,
    pub window: Span,
    pub scope: ShiftScope,
    pub entries: Vec<ShiftEntry>,
    /// Sum over all entries, including any cut by truncation.
    pub total: f64,
    pub total_entries: usize,
    pub truncated: bool,
    pub provenance: Provenance,
}

pub fn cmd_explain(a: &ExplainArgs) -> Result<ShiftExport> {
    let bundle = ModelBundle::load(&a.bundle)?;
    let model = bundle.model(a.mode)?;
    let window = Span::new(a.from, a.to.unwrap_or(a.from + Duration::hours(1)))?;
    let records = load_classified(&a.classified)?;
    let docs: Vec<_> = records
        .iter()
        .filter(|r| window.contains(r.tweet.timestamp))
        .filter(|r| a.selection == Selection::All || r.classification.positives.contains(&a.mode))
        .map(|r| bundle.document(&r.tweet.text))
        .collect();
    let shift = shift_aggregate(model, &docs).map_err(|_| {
        Error::EmptySelection(format!(
            "no {} tweets for {} in the window",
            if a.selection == Selection::All { "classified" } else { "positive" },
            a.mode
        ))
    })?;
    let (entries, truncated) = shift.top_k(a.top_k);
    let export = ShiftExport {
        schema: SHIFT_SCHEMA.to_string(),
        mode: a.mode,
        selection: a.selection,
        window,
        scope: shift.scope,
        entries: entries.to_vec(),
        total: shift.total,
        total_entries: shift.entries.len(),
        truncated,
        provenance: Provenance::new(
            "explain",
            json!({ "mode": a.mode, "selection": a.selection, "top_k": a.top_k, "window": window }),
        )
        .with_input("classified", &a.classified)?
        .with_input("bundle", &a.bundle)?,
    };
    write_json(&a.out, &export)?;
    Ok(export)
}

// ---- cluster ----

#[derive(Debug, Clone)]
pub struct ClusterArgs {
    pub classified: PathBuf,
    pub bundle: PathBuf,
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub window: Duration,
    pub eps_m: f64,
    pub min_pts: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterWindow {
    #[serde(with = "ts_serde")]
    pub start: Timestamp,
    #[serde(with = "ts_serde")]
    pub end: Timestamp,
    pub eps_m: f64,
    pub min_pts: usize,
    pub tweet_count: usize,
    pub noise_count: usize,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterExport {
    pub schema: String,
    pub eps_m: f64,
    pub min_pts: usize,
    pub windows: Vec<ClusterWindow>,
    pub provenance: Provenance,
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<ClusterExport> {
    if a.window <= Duration::zero() {
        return Err(Error::InvalidInput("cluster window must be positive".into()));
    }
    let bundle = ModelBundle::load(&a.bundle)?;
    let thresholds = bundle.thresholds();
    let records = load_classified(&a.classified)?;
    let span = Span::resolve(a.from, a.to, &records)?;

    let mut windows = Vec::new();
    let mut start = span.from;
    while start < span.to {
        let end = (start + a.window).min(span.to);
        let members: Vec<GeoTweet> = records
            .iter()
            .filter(|r| r.tweet.timestamp >= start && r.tweet.timestamp < end)
            .map(ClassifiedTweet::geo)
            .collect();
        let clusters = cluster_window(&members, a.eps_m, a.min_pts, &thresholds)?;
        let clustered: usize = clusters.iter().map(|c| c.count).sum();
        windows.push(ClusterWindow {
            start,
            end,
            eps_m: a.eps_m,
            min_pts: a.min_pts,
            tweet_count: members.len(),
            noise_count: members.len() - clustered,
            clusters,
        });
        start = end;
    }
    let export = ClusterExport {
        schema: CLUSTERS_SCHEMA.to_string(),
        eps_m: a.eps_m,
        min_pts: a.min_pts,
        windows,
        provenance: Provenance::new(
            "cluster",
            json!({
                "span": span,
                "window_secs": a.window.num_seconds(),
                "eps_m": a.eps_m,
                "min_pts": a.min_pts,
            }),
        )
        .with_input("classified", &a.classified)?
        .with_input("bundle", &a.bundle)?,
    };
    write_json(&a.out, &export)?;
    Ok(export)
}

// ---- series ----

#[derive(Debug, Clone)]
pub struct SeriesArgs {
    pub classified: PathBuf,
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub modes: Vec<ActionMode>,
    pub out: PathBuf,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesExport {
    pub schema: String,
    pub span: Span,
    pub modes: Vec<ActionMode>,
    pub bins: Vec<TimeBin>,
    pub provenance: Provenance,
}

pub fn cmd_series(a: &SeriesArgs) -> Result<SeriesExport> {
    let records = load_classified(&a.classified)?;
    let span = Span::resolve(a.from, a.to, &records)?;
    let bins = hourly_presence(&records, &a.modes, span.from, span.to)?;
    let span = Span::new(floor_hour(span.from), ceil_hour(span.to))?;
    let export = SeriesExport {
        schema: SERIES_SCHEMA.to_string(),
        span,
        modes: a.modes.clone(),
        bins,
        provenance: Provenance::new("series", json!({ "span": span, "modes": a.modes }))
            .with_input("classified", &a.classified)?,
    };
    write_json(&a.out, &export)?;
    if let Some(csv) = &a.csv {
        write_series_csv(&export.bins, create(csv)?)?;
    }
    Ok(export)
}

// ---- counties ----

#[derive(Debug, Clone)]
pub struct CountiesArgs {
    pub classified: PathBuf,
    pub boundaries: PathBuf,
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub out: PathBuf,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountiesExport {
    pub schema: String,
    pub range: Span,
    pub counties: Vec<CountyStat>,
    pub unassigned: CountyStat,
    pub out_of_range: u64,
    pub provenance: Provenance,
}

pub fn cmd_counties(a: &CountiesArgs) -> Result<CountiesExport> {
    let counties = load_boundaries(&a.boundaries)?;
    let records = load_classified(&a.classified)?;
    let range = Span::resolve(a.from, a.to, &records)?;
    let table = county_activity(&records, &counties, range.from, range.to)?;
    if let Some(csv) = &a.csv {
        write_counties_csv(&table, create(csv)?)?;
    }
    let export = CountiesExport {
        schema: COUNTIES_SCHEMA.to_string(),
        range,
        counties: table.counties,
        unassigned: table.unassigned,
        out_of_range: table.out_of_range,
        provenance: Provenance::new("counties", json!({ "range": range }))
            .with_input("classified", &a.classified)?
            .with_input("boundaries", &a.boundaries)?,
    };
    write_json(&a.out, &export)?;
    Ok(export)
}

/// Modes parsed from a comma-separated list; empty means all nine.
pub fn parse_modes(list: Option<&str>) -> Result<Vec<ActionMode>> {
    match list {
        None | Some("") => Ok(ActionMode::ALL_MODES.to_vec()),
        Some(s) => {
            let set: BTreeSet<ActionMode> =
                s.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?;
            Ok(set.into_iter().collect())
        }
    }
}

/// Reads every non-blank line of a file; used by tests and examples.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .map(|l| l.map_err(|e| Error::io(path, e)))
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .collect()
}
