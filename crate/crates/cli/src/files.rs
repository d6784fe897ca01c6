use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use wsd_core::corpus::Record;
use wsd_core::embeddings::CorpusDoc;
use wsd_core::textproc::tokenize;
use wsd_core::Citation;

use crate::usage;

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Write via a temporary sibling and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = tmp_path(path);
    let result = (|| -> Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.flush()?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

pub fn write_string(path: &Path, s: &str) -> Result<()> {
    write_atomic(path, |w| Ok(w.write_all(s.as_bytes())?))
}

pub fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v)?;
        Ok(w.write_all(b"\n")?)
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

/// Parse a TOML file; syntax and schema errors are usage errors.
pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    toml::from_str(&s).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Citations stored as JSONL records; other record kinds are skipped.
pub fn read_citations_jsonl(path: &Path) -> Result<Vec<Citation>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| wsd_core::Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        if let Record::Citation(c) = rec {
            out.push(c);
        }
    }
    Ok(out)
}

pub fn write_citations_jsonl(path: &Path, citations: &[Citation]) -> Result<()> {
    write_atomic(path, |w| {
        for c in citations {
            serde_json::to_writer(&mut *w, &Record::Citation(c.clone()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Training documents: JSONL citation records, or plain text with one
/// document per line (ids `line-N`, counting from 1).
pub fn read_corpus(path: &Path) -> Result<Vec<CorpusDoc>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        return Ok(read_citations_jsonl(path)?.iter().map(CorpusDoc::from_citation).collect());
    }
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(CorpusDoc {
            id: format!("line-{}", n + 1),
            tokens: tokenize(&line).tokens.into_iter().map(|t| t.surface).collect(),
        });
    }
    Ok(out)
}

/// Non-empty, non-comment lines of a file.
pub fn read_id_list(path: &Path) -> Result<HashSet<String>> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// `word<TAB>tag` lines.
pub fn read_pos_lexicon(path: &Path) -> Result<Vec<(String, String)>> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in s.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (w, t) = line
            .split_once('\t')
            .ok_or_else(|| wsd_core::Error::Parse {
                line: n + 1,
                message: "expected `word<TAB>tag`".into(),
            })?;
        out.push((w.trim().to_string(), t.trim().to_string()));
    }
    Ok(out)
}
