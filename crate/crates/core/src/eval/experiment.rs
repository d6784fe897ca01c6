use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{EvalReport, Prediction};
use super::FoldPlan;
use crate::classifiers::{
    knn_predict, knn_train, nb_predict, nb_train, svm_predict, svm_train_with, FeatureSpace, SvmParams,
    TrainingMatrix,
};
use crate::corpus::{Citation, Dataset, Instance};
use crate::embeddings::{aggregate_avg, aggregate_sum, instance_context, EmbeddingModel};
use crate::lstm::{lstm_predict, pretrain_autoencoder, train_lstm_classifier, AutoencoderConfig, LstmConfig};
use crate::textproc::{
    combine, extract_bigrams, extract_collocations, extract_concepts, extract_pos_window, extract_semtypes,
    extract_unigrams, tokenize_citation, FeatureFamily, PosTagger, SparseFeatures, TextFeatureConfig, TokenStream,
};
use crate::{seeds, Error, Result};

/// Which features to extract and the resources they need.
#[derive(Clone, Default)]
pub struct FeatureSpec {
    pub families: Vec<FeatureFamily>,
    pub text: TextFeatureConfig,
    pub embeddings: Option<Arc<EmbeddingModel>>,
    pub tagger: Option<Arc<dyn PosTagger>>,
}

impl fmt::Debug for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureSpec")
            .field("families", &self.families)
            .field("text", &self.text)
            .field("embedding_dim", &self.embeddings.as_ref().map(|m| m.dim()))
            .field("tagger", &self.tagger.is_some())
            .finish()
    }
}

impl FeatureSpec {
    pub fn label(&self) -> String {
        self.families.iter().map(|f| f.name()).collect::<Vec<_>>().join("+")
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "families": self.families,
            "text": self.text,
            "embeddings": self.embeddings.as_ref().map(|m| json!({ "meta": m.meta(), "vocab": m.len() })),
            "tagger": self.tagger.is_some(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Learner {
    /// Most frequent training sense.
    Majority,
    NaiveBayes,
    Svm(SvmParams),
    Knn { k: usize },
    Lstm {
        #[serde(default)]
        cfg: LstmConfig,
        #[serde(default)]
        pretrain: Option<AutoencoderConfig>,
    },
}

impl Learner {
    pub fn name(&self) -> String {
        match self {
            Learner::Majority => "majority".into(),
            Learner::NaiveBayes => "nb".into(),
            Learner::Svm(_) => "svm".into(),
            Learner::Knn { k } => format!("knn{k}"),
            Learner::Lstm { pretrain: None, .. } => "lstm".into(),
            Learner::Lstm { pretrain: Some(_), .. } => "lstm-pretrained".into(),
        }
    }
}

/// Instrumentation called once per (term, fold) before training.
pub trait FoldObserver: Sync {
    fn on_fold(&self, term: &str, fold: usize, train: &[usize], test: &[usize], space: &FeatureSpace);
}

fn embedding_model(spec: &FeatureSpec) -> Result<&EmbeddingModel> {
    spec.embeddings
        .as_deref()
        .ok_or_else(|| Error::pre("embedding features requested without an embedding model"))
}

/// All requested feature families for one instance, merged.
pub fn instance_features(spec: &FeatureSpec, c: &Citation, ts: &TokenStream, inst: &Instance) -> Result<SparseFeatures> {
    let mut parts = Vec::with_capacity(spec.families.len());
    for fam in &spec.families {
        let f = match fam {
            FeatureFamily::Unigrams => extract_unigrams(ts, inst, &spec.text)?,
            FeatureFamily::Bigrams => extract_bigrams(ts, inst, &spec.text)?,
            FeatureFamily::Pos => extract_pos_window(ts, c, inst, spec.tagger.as_deref())?,
            FeatureFamily::Collocations => extract_collocations(ts, inst)?,
            FeatureFamily::Concepts => extract_concepts(c, spec.text.strict_annotations)?,
            FeatureFamily::Semtypes => extract_semtypes(c, spec.text.strict_annotations)?,
            FeatureFamily::WeSum | FeatureFamily::WeAvg => {
                let m = embedding_model(spec)?;
                let ctx = instance_context(ts, inst.position);
                let agg = if *fam == FeatureFamily::WeSum {
                    aggregate_sum(m, &ctx)
                } else {
                    aggregate_avg(m, &ctx)
                };
                agg.vector
                    .0
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (format!("{}:{i:03}", fam.name()), v))
                    .collect()
            }
        };
        parts.push(f);
    }
    Ok(combine(&parts))
}

/// Embedding rows of the in-vocabulary context words, optionally limited to a window.
fn lstm_sequence(m: &EmbeddingModel, ts: &TokenStream, target: usize, window: Option<usize>) -> Vec<Vec<f64>> {
    let (lo, hi) = match window {
        Some(w) => (target.saturating_sub(w), (target + w + 1).min(ts.len())),
        None => (0, ts.len()),
    };
    let seq: Vec<Vec<f64>> = (lo..hi)
        .filter(|&i| i != target)
        .filter_map(|i| m.row(&ts.tokens[i].surface))
        .map(|r| r.iter().map(|&v| f64::from(v)).collect())
        .collect();
    if seq.is_empty() {
        vec![vec![0.0; m.dim()]]
    } else {
        seq
    }
}

enum Inputs {
    Sparse(Vec<SparseFeatures>),
    Sequences(Vec<Vec<Vec<f64>>>),
}

struct TermOutcome {
    predictions: Vec<Prediction>,
    dims: Vec<usize>,
}

fn in_fold(term: &str, fold: usize) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::InFold {
        term: term.to_string(),
        fold,
        source: Box::new(e),
    }
}

/// Train on all folds but one and predict the held-out fold, for every
/// term and fold. Terms run in parallel on the current rayon pool; the
/// result does not depend on the number of threads.
pub fn run_experiment(
    d: &Dataset,
    spec: &FeatureSpec,
    learner: &Learner,
    folds: &FoldPlan,
    observer: Option<&dyn FoldObserver>,
) -> Result<EvalReport> {
    if spec.families.is_empty() && !matches!(learner, Learner::Lstm { .. } | Learner::Majority) {
        return Err(Error::pre("at least one feature family is required"));
    }
    if matches!(learner, Learner::Lstm { .. }) {
        embedding_model(spec)?;
    }
    if folds.assignment.len() != d.instances().len() {
        return Err(Error::Dimension {
            expected: d.instances().len(),
            got: folds.assignment.len(),
        });
    }
    let by_term: Vec<(&str, Vec<usize>)> = d.instances_by_term().into_iter().collect();
    let outcomes: Vec<Result<TermOutcome>> = by_term
        .par_iter()
        .map(|(term, idx)| run_term(d, spec, learner, folds, observer, term, idx))
        .collect();
    let mut predictions = Vec::with_capacity(d.instances().len());
    let mut dims = BTreeMap::new();
    for ((term, _), o) in by_term.iter().zip(outcomes) {
        let o = o?;
        predictions.extend(o.predictions);
        dims.insert(term.to_string(), o.dims);
    }
    let config = json!({
        "features": spec.describe(),
        "learner": learner,
        "folds": { "k": folds.k, "seed": folds.seed },
    });
    let report = EvalReport::from_predictions(spec.label(), learner.name(), folds.seed, config, predictions, d.inventory(), &dims)?;
    log::info!(
        "{} / {}: macro {:.4}, micro {:.4}",
        report.features,
        report.learner,
        report.macro_accuracy,
        report.micro_accuracy
    );
    Ok(report)
}

fn run_term(
    d: &Dataset,
    spec: &FeatureSpec,
    learner: &Learner,
    folds: &FoldPlan,
    observer: Option<&dyn FoldObserver>,
    term: &str,
    idx: &[usize],
) -> Result<TermOutcome> {
    let senses = d.inventory().senses(term).expect("validated term");
    let labels: Vec<usize> = idx
        .iter()
        .map(|&i| d.inventory().sense_index(term, &d.instances()[i].sense).expect("validated sense"))
        .collect();

    let mut streams: HashMap<&str, TokenStream> = HashMap::new();
    for &i in idx {
        let c = &d.instances()[i].citation_id;
        streams.entry(c.as_str()).or_insert_with(|| tokenize_citation(d.citation(c).expect("validated")));
    }
    let inputs = match learner {
        Learner::Lstm { cfg, .. } => {
            let m = embedding_model(spec)?;
            Inputs::Sequences(
                idx.iter()
                    .map(|&i| {
                        let inst = &d.instances()[i];
                        lstm_sequence(m, &streams[inst.citation_id.as_str()], inst.position, cfg.window)
                    })
                    .collect(),
            )
        }
        _ => {
            let mut rows = Vec::with_capacity(idx.len());
            for &i in idx {
                let inst = &d.instances()[i];
                let c = d.citation(&inst.citation_id).expect("validated");
                let f = instance_features(spec, c, &streams[c.id.as_str()], inst).map_err(in_fold(term, folds.fold_of(i)))?;
                rows.push(f);
            }
            Inputs::Sparse(rows)
        }
    };

    let mut predictions = Vec::with_capacity(idx.len());
    let mut dims = Vec::with_capacity(folds.k);
    for fold in 0..folds.k {
        let train: Vec<usize> = (0..idx.len()).filter(|&j| folds.fold_of(idx[j]) != fold).collect();
        let test: Vec<usize> = (0..idx.len()).filter(|&j| folds.fold_of(idx[j]) == fold).collect();
        if test.is_empty() {
            continue;
        }
        let wrap = in_fold(term, fold);
        let predicted = predict_fold(learner, &inputs, &labels, &train, &test, term, fold, folds.seed, observer, idx, &mut dims)
            .map_err(wrap)?;
        for (&j, p) in test.iter().zip(predicted) {
            let inst = &d.instances()[idx[j]];
            predictions.push(Prediction {
                instance: inst.key(),
                term: term.to_string(),
                fold,
                gold: inst.sense.clone(),
                predicted: senses[p].clone(),
            });
        }
    }
    Ok(TermOutcome { predictions, dims })
}

#[allow(clippy::too_many_arguments)]
fn predict_fold(
    learner: &Learner,
    inputs: &Inputs,
    labels: &[usize],
    train: &[usize],
    test: &[usize],
    term: &str,
    fold: usize,
    seed: u64,
    observer: Option<&dyn FoldObserver>,
    idx: &[usize],
    dims: &mut Vec<usize>,
) -> Result<Vec<usize>> {
    let global = |js: &[usize]| js.iter().map(|&j| idx[j]).collect::<Vec<usize>>();
    // classes present in the training folds, mapped to 0..m
    let mut present: Vec<usize> = train.iter().map(|&j| labels[j]).collect();
    present.sort_unstable();
    present.dedup();
    let local: Vec<usize> = train
        .iter()
        .map(|&j| present.binary_search(&labels[j]).expect("present"))
        .collect();
    let majority = {
        let mut counts = vec![0usize; present.len()];
        local.iter().for_each(|&l| counts[l] += 1);
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate() {
            if n > counts[best] {
                best = c;
            }
        }
        present[best]
    };
    let single_class = present.len() < 2;

    match inputs {
        Inputs::Sequences(seqs) => {
            if let Some(obs) = observer {
                obs.on_fold(term, fold, &global(train), &global(test), &FeatureSpace::default());
            }
            dims.push(seqs[0][0].len());
            if single_class {
                return Ok(vec![majority; test.len()]);
            }
            let Learner::Lstm { cfg, pretrain } = learner else {
                unreachable!("sequences are only built for the LSTM")
            };
            let train_seqs: Vec<Vec<Vec<f64>>> = train.iter().map(|&j| seqs[j].clone()).collect();
            let fold_seed = seeds::derive(cfg.seed ^ seed, &format!("{term}/{fold}"));
            let init = match pretrain {
                Some(ae) => {
                    let ae = AutoencoderConfig {
                        seed: fold_seed,
                        ..ae.clone()
                    };
                    Some(pretrain_autoencoder(&train_seqs, seqs[0][0].len(), &ae)?.0)
                }
                None => None,
            };
            let cfg = LstmConfig {
                seed: fold_seed,
                ..cfg.clone()
            };
            let (p, _) = train_lstm_classifier(&train_seqs, &local, present.len(), &cfg, init.as_ref())?;
            test.iter()
                .map(|&j| lstm_predict(&p, &seqs[j]).map(|c| present[c]))
                .collect()
        }
        Inputs::Sparse(rows) => {
            let space = FeatureSpace::fit(train.iter().map(|&j| &rows[j]));
            if let Some(obs) = observer {
                obs.on_fold(term, fold, &global(train), &global(test), &space);
            }
            log::debug!("{term} fold {fold}: {} features", space.dim());
            dims.push(space.dim());
            if single_class || matches!(learner, Learner::Majority) {
                return Ok(vec![majority; test.len()]);
            }
            let train_rows: Vec<&SparseFeatures> = train.iter().map(|&j| &rows[j]).collect();
            let tm = TrainingMatrix::from_sparse(&space, &train_rows, local, present.len())?;
            let queries = test.iter().map(|&j| space.project(&rows[j]));
            let out: Result<Vec<usize>> = match learner {
                Learner::NaiveBayes => {
                    let m = nb_train(&tm)?;
                    queries.map(|q| nb_predict(&m, &q).map(|p| p.class)).collect()
                }
                Learner::Svm(params) => {
                    let m = svm_train_with(&tm, params)?;
                    queries.map(|q| svm_predict(&m, &q)).collect()
                }
                Learner::Knn { k } => {
                    let k_eff = (*k).min(tm.len());
                    if k_eff < *k {
                        log::warn!("{term} fold {fold}: k = {k} exceeds {} training rows", tm.len());
                    }
                    let m = knn_train(&tm, k_eff)?;
                    queries.map(|q| knn_predict(&m, &q)).collect()
                }
                Learner::Majority | Learner::Lstm { .. } => unreachable!("handled above"),
            };
            Ok(out?.into_iter().map(|c| present[c]).collect())
        }
    }
}
