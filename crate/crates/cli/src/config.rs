//! Experiment files: one TOML document describing the dataset, the
//! embeddings and a feature x learner grid.
//!
//! ```toml
//! seed = 1
//! output = "results"
//! folds = 10
//!
//! [dataset.generate]
//! n_terms = 20
//!
//! [embeddings.train]
//! dim = 50
//! epochs = 15
//!
//! [grid]
//! features = ["unigrams", "we-avg", "unigrams+we-avg"]
//! learners = ["nb", "svm", "knn1", "knn3", "knn5", "lstm", "majority"]
//! ```
//!
//! Relative paths are resolved against the directory of the file. Any
//! nested section without its own `seed` gets one derived from the
//! top-level seed and the section name.

use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wsd_core::classifiers::SvmParams;
use wsd_core::corpus::PseudoWordConfig;
use wsd_core::embeddings::CbowConfig;
use wsd_core::eval::{Learner, DEFAULT_FOLDS};
use wsd_core::lstm::{AutoencoderConfig, LstmConfig};
use wsd_core::seeds;
use wsd_core::textproc::{FeatureFamily, TextFeatureConfig};

use crate::usage;

/// Feature label used for LSTM cells, which read embedding sequences directly.
pub const SEQUENCE_FEATURES: &str = "we-seq";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub dataset: DatasetSection,
    pub embeddings: Option<EmbeddingSection>,
    pub grid: GridSection,
    #[serde(default)]
    pub text: TextFeatureConfig,
    /// Extra `word<TAB>tag` entries for the lookup POS tagger.
    pub pos_lexicon: Option<PathBuf>,
    #[serde(default)]
    pub svm: SvmParams,
    pub lstm: Option<toml::Table>,
    pub pretrain: Option<toml::Table>,
}

fn default_seed() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("wsd-out")
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<PathBuf>,
    pub generate: Option<toml::Table>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    /// Pretrained model: binary, or the text format when the extension is `.txt`.
    pub path: Option<PathBuf>,
    /// CBOW settings for training a model as part of the run.
    pub train: Option<toml::Table>,
    /// Training corpus; defaults to the generator's background citations.
    pub corpus: Option<PathBuf>,
    /// Leave the evaluation citations out of embedding training.
    #[serde(default = "default_true")]
    pub exclude_dataset: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub features: Vec<String>,
    pub learners: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetSource {
    Path(PathBuf),
    Generate(PseudoWordConfig),
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingSource {
    Path(PathBuf),
    Train {
        cbow: CbowConfig,
        corpus: Option<PathBuf>,
        exclude_dataset: bool,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub features: Vec<FeatureFamily>,
    pub learner: Learner,
}

impl Cell {
    pub fn feature_label(&self) -> String {
        if self.features.is_empty() {
            SEQUENCE_FEATURES.to_string()
        } else {
            self.features.iter().map(|f| f.name()).collect::<Vec<_>>().join("+")
        }
    }

    /// File stem for this cell's artifacts.
    pub fn name(&self) -> String {
        format!("{}__{}", self.feature_label(), self.learner.name())
    }
}

/// Fully explicit experiment: every default filled in and every seed fixed.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedExperiment {
    pub seed: u64,
    pub output: PathBuf,
    pub folds: usize,
    pub fold_seed: u64,
    pub dataset: DatasetSource,
    pub embeddings: Option<EmbeddingSource>,
    pub text: TextFeatureConfig,
    pub pos_lexicon: Option<PathBuf>,
    pub cells: Vec<Cell>,
}

/// Seeds are kept below 2^63 so they survive a TOML round trip.
fn derived_seed(seed: u64, label: &str) -> u64 {
    seeds::derive(seed, label) >> 1
}

/// Deserialize a section, inserting a derived `seed` when it has none.
fn seeded<T: DeserializeOwned>(table: Option<&toml::Table>, seed: u64, label: &str) -> Result<T> {
    let mut t = table.cloned().unwrap_or_default();
    t.entry("seed")
        .or_insert_with(|| toml::Value::Integer(derived_seed(seed, label) as i64));
    toml::Value::Table(t)
        .try_into()
        .map_err(|e| usage(format!("[{label}]: {e}")))
}

pub fn parse_families(spec: &str) -> Result<Vec<FeatureFamily>> {
    let mut out = Vec::new();
    for part in spec.split('+').map(str::trim).filter(|p| !p.is_empty()) {
        let fam: FeatureFamily = part.parse().map_err(usage)?;
        if !out.contains(&fam) {
            out.push(fam);
        }
    }
    if out.is_empty() {
        return Err(usage(format!("feature set `{spec}` names no family")));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        crate::files::read_toml(path)
    }

    fn parse_learner(&self, name: &str) -> Result<Learner> {
        let lstm = || seeded::<LstmConfig>(self.lstm.as_ref(), self.seed, "lstm");
        Ok(match name {
            "majority" => Learner::Majority,
            "nb" => Learner::NaiveBayes,
            "svm" => Learner::Svm(self.svm.clone()),
            "lstm" => Learner::Lstm {
                cfg: lstm()?,
                pretrain: None,
            },
            "lstm-pretrained" => Learner::Lstm {
                cfg: lstm()?,
                pretrain: Some(seeded::<AutoencoderConfig>(self.pretrain.as_ref(), self.seed, "pretrain")?),
            },
            other => match other.strip_prefix("knn").and_then(|k| k.parse::<usize>().ok()) {
                Some(k) if k >= 1 => Learner::Knn { k },
                _ => {
                    return Err(usage(format!(
                        "unknown learner `{other}` (expected nb, svm, knnN, lstm, lstm-pretrained or majority)"
                    )))
                }
            },
        })
    }

    /// Validate and fill in defaults; `base` anchors relative paths.
    pub fn resolve(&self, base: &Path) -> Result<ResolvedExperiment> {
        let abs = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        if self.folds < 2 {
            return Err(usage("folds must be at least 2"));
        }
        let dataset = match (&self.dataset.path, &self.dataset.generate) {
            (Some(p), None) => DatasetSource::Path(abs(p)),
            (None, Some(g)) => DatasetSource::Generate(seeded(Some(g), self.seed, "dataset")?),
            (None, None) => return Err(usage("[dataset] needs `path` or a [dataset.generate] table")),
            (Some(_), Some(_)) => return Err(usage("[dataset] takes either `path` or `generate`, not both")),
        };
        let embeddings = match &self.embeddings {
            None => None,
            Some(e) => Some(match (&e.path, &e.train) {
                (Some(p), None) => EmbeddingSource::Path(abs(p)),
                (None, Some(t)) => {
                    let cbow: CbowConfig = seeded(Some(t), self.seed, "embeddings")?;
                    if e.corpus.is_none() && matches!(dataset, DatasetSource::Path(_)) {
                        return Err(usage("[embeddings] training needs a `corpus` unless the dataset is generated"));
                    }
                    EmbeddingSource::Train {
                        cbow,
                        corpus: e.corpus.as_deref().map(abs),
                        exclude_dataset: e.exclude_dataset,
                    }
                }
                _ => return Err(usage("[embeddings] takes exactly one of `path` or a [embeddings.train] table")),
            }),
        };

        if self.grid.features.is_empty() {
            return Err(usage("[grid] features must list at least one feature set"));
        }
        if self.grid.learners.is_empty() {
            return Err(usage("[grid] learners must list at least one learner"));
        }
        let feature_sets = self
            .grid
            .features
            .iter()
            .map(|f| parse_families(f))
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::new();
        for name in &self.grid.learners {
            let learner = self.parse_learner(name)?;
            if matches!(learner, Learner::Lstm { .. }) {
                if embeddings.is_none() {
                    return Err(usage(format!("learner `{name}` requires an [embeddings] section")));
                }
                cells.push(Cell {
                    features: Vec::new(),
                    learner,
                });
                continue;
            }
            for fams in &feature_sets {
                cells.push(Cell {
                    features: fams.clone(),
                    learner: learner.clone(),
                });
            }
        }
        if embeddings.is_none() && feature_sets.iter().flatten().any(|f| f.is_embedding()) {
            return Err(usage("embedding features require an [embeddings] section"));
        }
        let mut names: Vec<String> = cells.iter().map(Cell::name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(usage(format!("grid cell `{}` appears twice", w[0])));
        }

        Ok(ResolvedExperiment {
            seed: self.seed,
            output: abs(&self.output),
            folds: self.folds,
            fold_seed: derived_seed(self.seed, "folds"),
            dataset,
            embeddings,
            text: self.text,
            pos_lexicon: self.pos_lexicon.as_deref().map(abs),
            cells,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ExperimentConfig {
        toml::from_str(s).unwrap()
    }

    const BASE: &str = r#"
        seed = 5
        [dataset.generate]
        n_terms = 3
        [embeddings.train]
        dim = 8
        [grid]
        features = ["unigrams", "we-avg+unigrams"]
        learners = ["nb", "lstm"]
    "#;

    #[test]
    fn grid_expands_and_seeds_are_derived() {
        let r = parse(BASE).resolve(Path::new("/x")).unwrap();
        let names: Vec<String> = r.cells.iter().map(Cell::name).collect();
        assert_eq!(names, ["unigrams__nb", "we-avg+unigrams__nb", "we-seq__lstm"]);
        let DatasetSource::Generate(g) = &r.dataset else { panic!() };
        assert_eq!(g.n_terms, 3);
        assert_eq!(g.seed, derived_seed(5, "dataset"));
        let Some(EmbeddingSource::Train { cbow, .. }) = &r.embeddings else { panic!() };
        assert_eq!(cbow.seed, derived_seed(5, "embeddings"));
        assert_eq!(cbow.dim, 8);
        assert_eq!(r.output, Path::new("/x/wsd-out"));
    }

    #[test]
    fn explicit_nested_seed_wins() {
        let r = parse(&BASE.replace("n_terms = 3", "n_terms = 3\nseed = 42")).resolve(Path::new(".")).unwrap();
        let DatasetSource::Generate(g) = &r.dataset else { panic!() };
        assert_eq!(g.seed, 42);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let no_emb = BASE.replace("[embeddings.train]\n        dim = 8", "");
        assert!(parse(&no_emb).resolve(Path::new(".")).is_err());
        let bad_learner = BASE.replace("\"nb\"", "\"tree\"");
        assert!(parse(&bad_learner).resolve(Path::new(".")).is_err());
        let empty = BASE.replace("[\"unigrams\", \"we-avg+unigrams\"]", "[]");
        assert!(parse(&empty).resolve(Path::new(".")).is_err());
        let dup = BASE.replace("\"we-avg+unigrams\"", "\"unigrams+unigrams\"");
        assert!(parse(&dup).resolve(Path::new(".")).is_err());
        assert!(toml::from_str::<ExperimentConfig>("typo = 1\n[dataset]\n[grid]\nfeatures=[]\nlearners=[]").is_err());
    }
}
