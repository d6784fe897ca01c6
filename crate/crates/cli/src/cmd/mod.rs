use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use wsd_core::embeddings::{read_binary, read_text};
use wsd_core::textproc::{LookupTagger, PosTagger};
use wsd_core::EmbeddingModel;

use crate::files::read_pos_lexicon;

pub mod compare;
pub mod embed;
pub mod experiment;
pub mod features;
pub mod gen_data;
pub mod report;

/// Binary model, or the text format for `.txt` files.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingModel> {
    let f = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let m = if path.extension().is_some_and(|e| e == "txt") {
        read_text(f)
    } else {
        read_binary(f)
    };
    m.with_context(|| format!("loading embeddings from {}", path.display()))
}

pub fn tagger(lexicon: Option<&Path>) -> Result<Arc<dyn PosTagger>> {
    Ok(Arc::new(match lexicon {
        Some(p) => LookupTagger::with_entries(read_pos_lexicon(p)?),
        None => LookupTagger::default(),
    }))
}
