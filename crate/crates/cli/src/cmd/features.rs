use std::collections::HashMap;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::json;
use wsd_core::corpus::load_jsonl;
use wsd_core::eval::{instance_features, FeatureSpec};
use wsd_core::textproc::{tokenize_citation, write_feature_line, FeatureFamily, TextFeatureConfig, TokenStream};

use super::{load_embeddings, tagger};
use crate::config::parse_families;
use crate::files::write_atomic;
use crate::{usage, ExtractArgs};

pub fn run(a: &ExtractArgs) -> Result<()> {
    let families = parse_families(&a.features)?;
    let needs_embeddings = families.iter().any(|f| f.is_embedding());
    let embeddings = match (&a.embeddings, needs_embeddings) {
        (Some(p), _) => Some(Arc::new(load_embeddings(p)?)),
        (None, true) => return Err(usage("embedding features need --embeddings")),
        (None, false) => None,
    };
    let d = load_jsonl(&a.dataset).with_context(|| format!("loading {}", a.dataset.display()))?;
    let spec = FeatureSpec {
        families: families.clone(),
        text: TextFeatureConfig {
            binary: a.binary,
            exclude_target: !a.include_target,
            strict_annotations: !a.lenient,
        },
        embeddings,
        tagger: if families.contains(&FeatureFamily::Pos) {
            Some(tagger(a.pos_lexicon.as_deref())?)
        } else {
            None
        },
    };
    let provenance = serde_json::to_string_pretty(&json!({
        "dataset": a.dataset,
        "features": spec.families,
        "text": spec.text,
        "embeddings": a.embeddings,
        "embedding_meta": spec.embeddings.as_ref().map(|m| m.meta().clone()),
        "pos_lexicon": a.pos_lexicon,
    }))?;

    let mut streams: HashMap<&str, TokenStream> = HashMap::new();
    let mut lines = Vec::with_capacity(d.instances().len());
    for inst in d.instances() {
        let c = d.citation(&inst.citation_id).expect("validated dataset");
        let ts = streams.entry(c.id.as_str()).or_insert_with(|| tokenize_citation(c));
        let f = instance_features(&spec, c, ts, inst).with_context(|| format!("instance {}", inst.key()))?;
        lines.push(write_feature_line(&inst.key(), &inst.sense, &f));
    }
    write_atomic(&a.out, |w| {
        for l in provenance.lines() {
            writeln!(w, "# {l}")?;
        }
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    println!("{} instances written to {}", lines.len(), a.out.display());
    Ok(())
}
