use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{fit_labeled, EvalConfig, LabeledDoc};
use super::{ActionMode, BayesModel};
use crate::segment::{document_from_text, Document, MweLexicon};
use crate::{Error, Result};

pub const BUNDLE_SCHEMA: &str = "actionlens.bundle/v1";
const LEXICON_FILE: &str = "lexicon.txt";

/// The per-mode models plus the lexicon their features were segmented with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub models: BTreeMap<ActionMode, BayesModel>,
    pub lexicon: MweLexicon,
}

/// Per-mode posteriors of one document and the modes at or above threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub posteriors: BTreeMap<ActionMode, f64>,
    pub positives: BTreeSet<ActionMode>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleFile {
    schema: String,
    lexicon: String,
    models: BTreeMap<ActionMode, String>,
    provenance: serde_json::Value,
}

impl ModelBundle {
    /// Fits every mode in `modes` on the coded corpus. Modes train in parallel.
    pub fn train(
        corpus: &[LabeledDoc],
        lexicon: MweLexicon,
        modes: &[ActionMode],
        cfg: &EvalConfig,
    ) -> Result<Self> {
        let fitted: Vec<Result<BayesModel>> = std::thread::scope(|s| {
            let handles: Vec<_> = modes
                .iter()
                .map(|&m| s.spawn(move || fit_labeled(corpus, m, cfg)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training thread panicked"))
                .collect()
        });
        let mut models = BTreeMap::new();
        for (m, r) in modes.iter().zip(fitted) {
            models.insert(*m, r?);
        }
        Ok(ModelBundle { models, lexicon })
    }

    pub fn model(&self, mode: ActionMode) -> Result<&BayesModel> {
        self.models
            .get(&mode)
            .ok_or_else(|| Error::MissingModel(mode.to_string()))
    }

    pub fn thresholds(&self) -> BTreeMap<ActionMode, f64> {
        self.models.iter().map(|(&m, model)| (m, model.threshold)).collect()
    }

    pub fn document(&self, text: &str) -> Document {
        document_from_text(text, &self.lexicon)
    }

    pub fn classify_document(&self, doc: &Document) -> Classification {
        let mut posteriors = BTreeMap::new();
        let mut positives = BTreeSet::new();
        for (&mode, model) in &self.models {
            let p = model.posterior(doc);
            if model.is_positive(p) {
                positives.insert(mode);
            }
            posteriors.insert(mode, p);
        }
        Classification {
            posteriors,
            positives,
        }
    }

    pub fn classify_text(&self, text: &str) -> Classification {
        self.classify_document(&self.document(text))
    }

    /// Writes `bundle.json`, `models/<mode>.json` and `lexicon.txt` under `dir`.
    pub fn save(&self, dir: &Path, provenance: serde_json::Value) -> Result<()> {
        let models_dir = dir.join("models");
        std::fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;
        let mut index = BTreeMap::new();
        for (&mode, model) in &self.models {
            let rel = format!("models/{}.json", mode.name());
            model.save(&dir.join(&rel))?;
            index.insert(mode, rel);
        }
        let lex_path = dir.join(LEXICON_FILE);
        let f = File::create(&lex_path).map_err(|e| Error::io(&lex_path, e))?;
        self.lexicon
            .write(std::io::BufWriter::new(f), &["actionlens lexicon v1".to_string()])
            .map_err(|e| Error::io(&lex_path, e))?;
        let file = BundleFile {
            schema: BUNDLE_SCHEMA.to_string(),
            lexicon: LEXICON_FILE.to_string(),
            models: index,
            provenance,
        };
        let path = dir.join("bundle.json");
        let json = serde_json::to_string_pretty(&file).map_err(|e| Error::json("bundle", e))?;
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Loads a bundle from its `bundle.json`; referenced files resolve
    /// relative to it.
    pub fn load(bundle_path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(bundle_path).map_err(|e| Error::io(bundle_path, e))?;
        let file: BundleFile = serde_json::from_str(&text)
            .map_err(|e| Error::json(bundle_path.display().to_string(), e))?;
        if file.schema != BUNDLE_SCHEMA {
            return Err(Error::SchemaMismatch {
                expected: BUNDLE_SCHEMA.into(),
                found: file.schema,
            });
        }
        let base = bundle_path.parent().unwrap_or(Path::new("."));
        let lex_path = base.join(&file.lexicon);
        let f = File::open(&lex_path).map_err(|e| Error::io(&lex_path, e))?;
        let lexicon = MweLexicon::read(BufReader::new(f))?;
        let mut models = BTreeMap::new();
        for (mode, rel) in file.models {
            let model = BayesModel::load(&base.join(rel))?;
            if model.mode != mode {
                return Err(Error::InvalidInput(format!(
                    "bundle lists {mode} but the model file is for {}",
                    model.mode
                )));
            }
            models.insert(mode, model);
        }
        if models.is_empty() {
            return Err(Error::InvalidInput("bundle contains no models".into()));
        }
        Ok(ModelBundle { models, lexicon })
    }
}
