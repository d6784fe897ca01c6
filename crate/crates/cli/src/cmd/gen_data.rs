use anyhow::{Context, Result};
use serde_json::json;
use wsd_core::corpus::{generate_pseudoword_dataset, save_jsonl, PseudoWordConfig};

use crate::files::{read_toml, write_citations_jsonl, write_json};
use crate::GenDataArgs;

pub fn run(a: &GenDataArgs) -> Result<()> {
    let mut cfg: PseudoWordConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => PseudoWordConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.terms {
        cfg.n_terms = v;
    }
    if let Some(v) = a.senses {
        cfg.senses_per_term = v;
    }
    if let Some(v) = a.instances {
        cfg.instances_per_sense = v;
    }
    let g = generate_pseudoword_dataset(&cfg)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_jsonl(&g.dataset, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(bg) = &a.background {
        write_citations_jsonl(bg, &g.background)?;
    }
    let sidecar = a.out.with_extension("gen.json");
    write_json(
        &sidecar,
        &json!({ "generator": cfg, "background": a.background, "warnings": g.warnings }),
    )?;
    println!(
        "{} terms, {} instances, {} citations, {} background documents",
        g.dataset.inventory().entries.len(),
        g.dataset.instances().len(),
        g.dataset.citations().len(),
        g.background.len()
    );
    for w in &g.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
