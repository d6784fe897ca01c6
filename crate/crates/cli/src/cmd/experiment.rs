use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::json;
use wsd_core::corpus::{generate_pseudoword_dataset, load_jsonl};
use wsd_core::embeddings::{train_cbow, write_binary, CorpusDoc};
use wsd_core::eval::{make_folds_k, report_csv, run_experiment, summary_markdown, FeatureSpec};
use wsd_core::textproc::FeatureFamily;
use wsd_core::{Citation, Dataset, EmbeddingModel, EvalReport};

use super::{load_embeddings, tagger};
use crate::config::{Cell, DatasetSource, EmbeddingSource, ExperimentConfig, ResolvedExperiment};
use crate::files::{read_corpus, write_atomic, write_json, write_string};
use crate::RunArgs;

fn load_dataset(src: &DatasetSource) -> Result<(Dataset, Vec<Citation>)> {
    match src {
        DatasetSource::Path(p) => Ok((
            load_jsonl(p).with_context(|| format!("loading {}", p.display()))?,
            Vec::new(),
        )),
        DatasetSource::Generate(cfg) => {
            let g = generate_pseudoword_dataset(cfg)?;
            Ok((g.dataset, g.background))
        }
    }
}

fn prepare_embeddings(
    src: &EmbeddingSource,
    d: &Dataset,
    background: &[Citation],
    out: &Path,
) -> Result<(EmbeddingModel, serde_json::Value)> {
    match src {
        EmbeddingSource::Path(p) => Ok((load_embeddings(p)?, json!({ "path": p }))),
        EmbeddingSource::Train {
            cbow,
            corpus,
            exclude_dataset,
        } => {
            let docs = match corpus {
                Some(p) => read_corpus(p)?,
                None => background.iter().map(CorpusDoc::from_citation).collect(),
            };
            let exclude: HashSet<String> = if *exclude_dataset {
                d.citations().iter().map(|c| c.id.clone()).collect()
            } else {
                HashSet::new()
            };
            let t = Instant::now();
            let (m, stats) = train_cbow(&docs, cbow, &exclude)?;
            println!(
                "embeddings: {} documents used, {} excluded, {} tokens per epoch, vocabulary {}, {:.1}s",
                stats.docs_used,
                stats.docs_excluded,
                stats.tokens_per_epoch,
                m.len(),
                t.elapsed().as_secs_f64()
            );
            write_atomic(&out.join("embeddings.bin"), |w| Ok(write_binary(&m, w)?))?;
            Ok((m, json!({ "trained": stats })))
        }
    }
}

fn run_cell(
    cell: &Cell,
    d: &Dataset,
    exp: &ResolvedExperiment,
    embeddings: Option<&Arc<EmbeddingModel>>,
    folds: &wsd_core::FoldPlan,
    experiment_json: &serde_json::Value,
) -> Result<EvalReport> {
    let spec = FeatureSpec {
        families: cell.features.clone(),
        text: exp.text,
        embeddings: embeddings.cloned(),
        tagger: if cell.features.contains(&FeatureFamily::Pos) {
            Some(tagger(exp.pos_lexicon.as_deref())?)
        } else {
            None
        },
    };
    let t = Instant::now();
    let mut r = run_experiment(d, &spec, &cell.learner, folds, None).with_context(|| format!("cell {}", cell.name()))?;
    let core_config = r.config.clone();
    r.features = cell.feature_label();
    r.set_config(json!({
        "experiment": experiment_json,
        "cell": { "name": cell.name(), "features": cell.features, "learner": cell.learner },
        "run": core_config,
    }));
    if let Some(t0) = r.terms.first().and_then(|t| t.feature_dims.first()) {
        log::info!("{}: {} features in the first training fold of `{}`", cell.name(), t0, r.terms[0].term);
    }
    println!(
        "{:<28} {:<16} macro {:.4} micro {:.4} ({:.1}s)",
        r.features,
        r.learner,
        r.macro_accuracy,
        r.micro_accuracy,
        t.elapsed().as_secs_f64()
    );
    let dir = exp.output.join("cells");
    let provenance = serde_json::to_string_pretty(&r.config)?;
    write_json(&dir.join(format!("{}.json", cell.name())), &r)?;
    write_string(&dir.join(format!("{}.csv", cell.name())), &report_csv(&r, &provenance))?;
    Ok(r)
}

pub fn run(a: &RunArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let mut exp = cfg.resolve(base)?;
    if let Some(out) = &a.out {
        exp.output = out.clone();
    }
    let workers = a.workers.unwrap_or(1).max(1);
    std::fs::create_dir_all(&exp.output).with_context(|| format!("creating {}", exp.output.display()))?;
    let experiment_json = serde_json::to_value(&exp)?;
    write_json(&exp.output.join("experiment.json"), &experiment_json)?;

    let (d, background) = load_dataset(&exp.dataset)?;
    let embeddings = match &exp.embeddings {
        Some(src) => {
            let (m, info) = prepare_embeddings(src, &d, &background, &exp.output)?;
            write_json(&exp.output.join("embeddings.json"), &json!({ "meta": m.meta(), "source": info }))?;
            Some(Arc::new(m))
        }
        None => None,
    };
    let folds = make_folds_k(&d, exp.folds, exp.fold_seed);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building the worker pool")?;
    let results: Vec<Result<EvalReport>> = pool.install(|| {
        exp.cells
            .par_iter()
            .map(|cell| run_cell(cell, &d, &exp, embeddings.as_ref(), &folds, &experiment_json))
            .collect()
    });
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;

    let provenance = serde_json::to_string_pretty(&experiment_json)?;
    let refs: Vec<&EvalReport> = reports.iter().collect();
    write_string(&exp.output.join("summary.md"), &summary_markdown(&refs, &provenance))?;
    println!("{} cells written to {}", reports.len(), exp.output.display());
    Ok(())
}
