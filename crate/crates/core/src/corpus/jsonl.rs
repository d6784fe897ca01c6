use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Citation, Dataset, DatasetAdapter, Instance, SenseInventory, WordType};
use crate::textproc::TOKENIZER_FINGERPRINT;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
const MANIFEST_NAME: &str = "dataset.json";

/// One line of a dataset file, distinguished by its `kind` field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Citation(Citation),
    Instance(Instance),
    Inventory {
        term: String,
        senses: Vec<String>,
        word_type: WordType,
    },
}

/// Sidecar written next to dataset files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tokenizer: String,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            tokenizer: TOKENIZER_FINGERPRINT.to_string(),
        }
    }
}

fn manifest_path(path: &Path) -> PathBuf {
    path.with_file_name(MANIFEST_NAME)
}

/// Read and validate a JSONL dataset. A `dataset.json` manifest beside the
/// file, when present, must match the current schema and tokenizer.
pub fn load_jsonl(path: &Path) -> Result<Dataset> {
    let mpath = manifest_path(path);
    if mpath.exists() {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&mpath)?)
            .map_err(|e| Error::InvalidDataset(format!("{}: {e}", mpath.display())))?;
        if manifest != Manifest::default() {
            return Err(Error::InvalidDataset(format!(
                "manifest mismatch: file has schema {} / tokenizer `{}`, expected {} / `{}`",
                manifest.schema_version, manifest.tokenizer, SCHEMA_VERSION, TOKENIZER_FINGERPRINT
            )));
        }
    }

    let reader = BufReader::new(File::open(path)?);
    let mut citations = Vec::new();
    let mut instances = Vec::new();
    let mut inventory = SenseInventory::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        match record {
            Record::Citation(c) => citations.push(c),
            Record::Instance(inst) => instances.push(inst),
            Record::Inventory {
                term,
                senses,
                word_type,
            } => inventory.insert(term, senses, word_type).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?,
        }
    }
    Dataset::new(citations, instances, inventory)
}

/// Write inventory, citations and instances as JSONL plus the manifest.
pub fn save_jsonl(d: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut emit = |r: &Record| -> Result<()> {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        Ok(())
    };
    for (term, entry) in &d.inventory().entries {
        emit(&Record::Inventory {
            term: term.clone(),
            senses: entry.senses.clone(),
            word_type: entry.word_type,
        })?;
    }
    for c in d.citations() {
        emit(&Record::Citation(c.clone()))?;
    }
    for inst in d.instances() {
        emit(&Record::Instance(inst.clone()))?;
    }
    w.flush()?;
    let manifest = serde_json::to_string_pretty(&Manifest::default()).map_err(std::io::Error::from)?;
    fs::write(manifest_path(path), manifest)?;
    Ok(())
}

/// The native JSONL layout as a [`DatasetAdapter`].
#[derive(Clone, Copy, Debug, Default)]
pub struct JsonlAdapter;

impl DatasetAdapter for JsonlAdapter {
    fn name(&self) -> &str {
        "jsonl"
    }

    fn load(&self, path: &Path) -> Result<Dataset> {
        load_jsonl(path)
    }
}
