use std::collections::HashSet;

use anyhow::{Context, Result};
use serde_json::json;
use wsd_core::corpus::load_jsonl;
use wsd_core::embeddings::{train_cbow, write_binary, write_text, CbowConfig};

use crate::files::{read_corpus, read_id_list, read_toml, write_atomic, write_json};
use crate::EmbedTrainArgs;

pub fn run(a: &EmbedTrainArgs) -> Result<()> {
    let mut cfg: CbowConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => CbowConfig::default(),
    };
    let overrides = [
        (a.dim, &mut cfg.dim),
        (a.window, &mut cfg.window),
        (a.epochs, &mut cfg.epochs),
        (a.negatives, &mut cfg.negatives),
        (a.threads, &mut cfg.threads),
    ];
    for (v, slot) in overrides {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(v) = a.min_count {
        cfg.min_count = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }

    let docs = read_corpus(&a.corpus)?;
    let mut exclude = HashSet::new();
    if let Some(p) = &a.exclude {
        exclude.extend(read_id_list(p)?);
    }
    if let Some(p) = &a.exclude_dataset {
        let d = load_jsonl(p).with_context(|| format!("loading {}", p.display()))?;
        exclude.extend(d.citations().iter().map(|c| c.id.clone()));
    }
    let (model, stats) = train_cbow(&docs, &cfg, &exclude)?;

    write_atomic(&a.out, |w| Ok(write_binary(&model, w)?))?;
    if let Some(t) = &a.text_out {
        write_atomic(t, |w| Ok(write_text(&model, w)?))?;
    }
    let mut meta_path = a.out.clone().into_os_string();
    meta_path.push(".json");
    write_json(
        std::path::Path::new(&meta_path),
        &json!({
            "config": cfg,
            "corpus": a.corpus,
            "exclude": a.exclude,
            "exclude_dataset": a.exclude_dataset,
            "vocabulary": model.len(),
            "stats": stats,
        }),
    )?;
    println!(
        "documents used {}, excluded {}; {} training tokens per epoch; vocabulary {}; dim {}",
        stats.docs_used,
        stats.docs_excluded,
        stats.tokens_per_epoch,
        model.len(),
        model.dim()
    );
    if let (Some(first), Some(last)) = (stats.epoch_losses.first(), stats.epoch_losses.last()) {
        println!("loss {first:.4} -> {last:.4} over {} epochs", stats.epoch_losses.len());
    }
    Ok(())
}
