use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::Duration;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use actionlens::classify::{ActionMode, EvalConfig, DEFAULT_ALPHA, DEFAULT_INNER_K, DEFAULT_K};
use actionlens::explain::DEFAULT_TOP_K;
use actionlens::geo::{DEFAULT_EPS_M, DEFAULT_MIN_PTS};
use actionlens::ingest::parse_timestamp;
use actionlens::pipeline::*;
use actionlens::segment::LexiconParams;
use actionlens::{Error, Result, Timestamp};

#[derive(Parser)]
#[command(name = "actionlens", version, about = "Action-mode classification and diagnostics for geo-tagged tweets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice (fold shuffling).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON object of parameter defaults, keyed by flag name with `_` for `-`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (directory for `train`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn ts(s: &str) -> std::result::Result<Timestamp, String> {
    parse_timestamp(s).ok_or_else(|| format!("not an RFC 3339 timestamp: {s}"))
}

#[derive(Subcommand)]
enum Command {
    /// Induce a multiword-expression lexicon from a tweet stream.
    Lexicon {
        corpus: PathBuf,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        min_score: Option<f64>,
    },
    /// Train one model per action mode and write a bundle directory.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        inner_k: Option<usize>,
    },
    /// Cross-validated (or holdout) precision, recall and F1 per mode.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        /// Out-of-domain test stream; switches to holdout evaluation.
        #[arg(long)]
        holdout: Option<PathBuf>,
        /// Comma-separated modes; all nine by default.
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        inner_k: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Also write the flat CSV table here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Attach per-mode posteriors to every tweet of a stream.
    Classify {
        input: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        /// Event windows; only tweets inside some window are kept.
        #[arg(long)]
        windows: Option<PathBuf>,
        /// Threshold override as `mode=value`; repeatable.
        #[arg(long = "threshold", value_name = "MODE=T")]
        thresholds: Vec<String>,
    },
    /// Phrase shift of a window's documents for one mode.
    Explain {
        classified: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        mode: ActionMode,
        #[arg(long, value_parser = ts)]
        from: Timestamp,
        #[arg(long, value_parser = ts)]
        to: Option<Timestamp>,
        /// Include every tweet in the window, not only positives.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Hourly DBSCAN clusters of geo-tagged tweets.
    Cluster {
        classified: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_parser = ts)]
        from: Option<Timestamp>,
        #[arg(long, value_parser = ts)]
        to: Option<Timestamp>,
        #[arg(long)]
        window_minutes: Option<i64>,
        #[arg(long)]
        eps_m: Option<f64>,
        #[arg(long)]
        min_pts: Option<usize>,
    },
    /// Hourly per-mode presence.
    Series {
        classified: PathBuf,
        #[arg(long, value_parser = ts)]
        from: Option<Timestamp>,
        #[arg(long, value_parser = ts)]
        to: Option<Timestamp>,
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Political-activity rates per county.
    Counties {
        classified: PathBuf,
        #[arg(long)]
        boundaries: PathBuf,
        #[arg(long, value_parser = ts)]
        from: Option<Timestamp>,
        #[arg(long, value_parser = ts)]
        to: Option<Timestamp>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Read-only HTTP service over a directory of exports.
    Serve {
        dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

fn required_out(c: &Common) -> Result<PathBuf> {
    c.out
        .clone()
        .ok_or_else(|| Error::InvalidInput("--out is required for this command".into()))
}

fn parse_overrides(list: &[String]) -> Result<std::collections::BTreeMap<ActionMode, f64>> {
    list.iter()
        .map(|s| {
            let (m, t) = s
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("threshold override must be MODE=T: {s}")))?;
            let t = t
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad threshold value: {t}")))?;
            Ok((m.parse()?, t))
        })
        .collect()
}

fn run(cli: Cli) -> Result<Value> {
    let cfg = match &cli.common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let seed = cfg.pick(cli.common.seed, "seed", 0)?;
    match cli.command {
        Command::Lexicon {
            corpus,
            max_len,
            min_count,
            min_score,
        } => {
            let d = LexiconParams::default();
            let params = LexiconParams {
                max_len: cfg.pick(max_len, "max_len", d.max_len)?,
                min_count: cfg.pick(min_count, "min_count", d.min_count)?,
                min_score: cfg.pick(min_score, "min_score", d.min_score)?,
            };
            cmd_lexicon(&LexiconArgs {
                corpus,
                out: required_out(&cli.common)?,
                params,
            })
        }
        Command::Train {
            corpus,
            lexicon,
            alpha,
            inner_k,
        } => cmd_train(&TrainArgs {
            corpus,
            lexicon,
            out_dir: required_out(&cli.common)?,
            alpha: cfg.pick(alpha, "alpha", DEFAULT_ALPHA)?,
            inner_k: cfg.pick(inner_k, "inner_k", DEFAULT_INNER_K)?,
            seed,
        }),
        Command::Eval {
            corpus,
            lexicon,
            holdout,
            modes,
            k,
            inner_k,
            alpha,
            table,
        } => {
            let modes = cfg.pick(modes, "modes", String::new())?;
            let export = cmd_eval(&EvalArgs {
                corpus,
                lexicon,
                holdout,
                modes: parse_modes(Some(&modes).filter(|m| !m.is_empty()).map(|s| s.as_str()))?,
                config: EvalConfig {
                    k: cfg.pick(k, "k", DEFAULT_K)?,
                    inner_k: cfg.pick(inner_k, "inner_k", DEFAULT_INNER_K)?,
                    alpha: cfg.pick(alpha, "alpha", DEFAULT_ALPHA)?,
                    seed,
                },
                out: required_out(&cli.common)?,
                table,
            })?;
            Ok(json!({ "reports": export.reports.len(), "skipped": export.skipped }))
        }
        Command::Classify {
            input,
            bundle,
            windows,
            thresholds,
        } => cmd_classify(&ClassifyArgs {
            input,
            bundle,
            windows,
            thresholds: parse_overrides(&thresholds)?,
            out: required_out(&cli.common)?,
        }),
        Command::Explain {
            classified,
            bundle,
            mode,
            from,
            to,
            all,
            top_k,
        } => {
            let export = cmd_explain(&ExplainArgs {
                classified,
                bundle,
                mode,
                from,
                to,
                selection: if all { Selection::All } else { Selection::Positive },
                top_k: cfg.pick(top_k, "top_k", DEFAULT_TOP_K)?,
                out: required_out(&cli.common)?,
            })?;
            Ok(json!({ "entries": export.total_entries, "total": export.total }))
        }
        Command::Cluster {
            classified,
            bundle,
            from,
            to,
            window_minutes,
            eps_m,
            min_pts,
        } => {
            let export = cmd_cluster(&ClusterArgs {
                classified,
                bundle,
                from,
                to,
                window: Duration::minutes(cfg.pick(window_minutes, "window_minutes", 60)?),
                eps_m: cfg.pick(eps_m, "eps_m", DEFAULT_EPS_M)?,
                min_pts: cfg.pick(min_pts, "min_pts", DEFAULT_MIN_PTS)?,
                out: required_out(&cli.common)?,
            })?;
            let clusters: usize = export.windows.iter().map(|w| w.clusters.len()).sum();
            Ok(json!({ "windows": export.windows.len(), "clusters": clusters }))
        }
        Command::Series {
            classified,
            from,
            to,
            modes,
            csv,
        } => {
            let export = cmd_series(&SeriesArgs {
                classified,
                from,
                to,
                modes: parse_modes(modes.as_deref())?,
                out: required_out(&cli.common)?,
                csv,
            })?;
            Ok(json!({ "bins": export.bins.len() }))
        }
        Command::Counties {
            classified,
            boundaries,
            from,
            to,
            csv,
        } => {
            let export = cmd_counties(&CountiesArgs {
                classified,
                boundaries,
                from,
                to,
                out: required_out(&cli.common)?,
                csv,
            })?;
            Ok(json!({ "counties": export.counties.len(), "unassigned": export.unassigned.tweet_count }))
        }
        Command::Serve { dir, bind } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Io { path: "tokio runtime".into(), source: e })?;
            eprintln!("serving {} on http://{bind}", dir.display());
            rt.block_on(actionlens::service::serve(&dir, bind))?;
            Ok(Value::Null)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            if !summary.is_null() {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::FAILURE
        }
    }
}
