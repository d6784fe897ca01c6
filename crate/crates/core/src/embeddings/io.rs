//! Model files.
//!
//! Binary layout (little-endian): magic `WSDEMB\0\0`, u32 version, u32 dim,
//! u64 vocabulary size, u32 window, u32 negatives, u32 epochs, u64
//! min_count, u64 seed, then per word: u32 byte length, UTF-8 bytes, u64
//! count and `dim` f32 values.
//!
//! The text layout is the common `|V| dim` header followed by one
//! `word v1 ... vd` line per word.

use std::io::{BufRead, Read, Write};

use super::{EmbeddingMeta, EmbeddingModel, VocabEntry};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"WSDEMB\0\0";
pub const VERSION: u32 = 1;

pub fn write_binary<W: Write>(m: &EmbeddingModel, mut w: W) -> Result<()> {
    let meta = m.meta();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(meta.dim as u32).to_le_bytes())?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    w.write_all(&(meta.window as u32).to_le_bytes())?;
    w.write_all(&(meta.negatives as u32).to_le_bytes())?;
    w.write_all(&(meta.epochs as u32).to_le_bytes())?;
    w.write_all(&meta.min_count.to_le_bytes())?;
    w.write_all(&meta.seed.to_le_bytes())?;
    for (i, e) in m.vocab().iter().enumerate() {
        w.write_all(&(e.word.len() as u32).to_le_bytes())?;
        w.write_all(e.word.as_bytes())?;
        w.write_all(&e.count.to_le_bytes())?;
        for v in &m.vectors()[i * meta.dim..(i + 1) * meta.dim] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated model file: {e}")))?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<EmbeddingModel> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u64(&mut r)? as usize;
    let meta = EmbeddingMeta {
        dim,
        window: read_u32(&mut r)? as usize,
        negatives: read_u32(&mut r)? as usize,
        epochs: read_u32(&mut r)? as usize,
        min_count: read_u64(&mut r)?,
        seed: read_u64(&mut r)?,
    };
    let mut vocab = Vec::with_capacity(n.min(1 << 20));
    let mut vectors = Vec::with_capacity((n * dim).min(1 << 24));
    for _ in 0..n {
        let len = read_u32(&mut r)? as usize;
        let mut word = vec![0u8; len];
        r.read_exact(&mut word)
            .map_err(|e| Error::Format(format!("truncated word: {e}")))?;
        let word = String::from_utf8(word).map_err(|_| Error::Format("word is not UTF-8".into()))?;
        let count = read_u64(&mut r)?;
        for _ in 0..dim {
            vectors.push(f32::from_le_bytes(read_array(&mut r)?));
        }
        vocab.push(VocabEntry { word, count });
    }
    EmbeddingModel::from_parts(vocab, vectors, meta)
}

pub fn write_text<W: Write>(m: &EmbeddingModel, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", m.len(), m.dim())?;
    for (i, e) in m.vocab().iter().enumerate() {
        write!(w, "{}", e.word)?;
        for v in &m.vectors()[i * m.dim()..(i + 1) * m.dim()] {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Read the text layout. Counts are not part of it and load as zero.
pub fn read_text<R: BufRead>(r: R) -> Result<EmbeddingModel> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let mut parts = header.split_whitespace();
    let parse_usize = |s: Option<&str>| -> Result<usize> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header `{header}`")))
    };
    let n = parse_usize(parts.next())?;
    let dim = parse_usize(parts.next())?;
    let mut vocab = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate().take(n) {
        let line = line?;
        let mut parts = line.split(' ');
        let word = parts.next().unwrap_or_default().to_string();
        let before = vectors.len();
        for p in parts.filter(|p| !p.is_empty()) {
            vectors.push(p.parse::<f32>().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("bad value `{p}`"),
            })?);
        }
        if vectors.len() - before != dim {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("expected {dim} values"),
            });
        }
        vocab.push(VocabEntry { word, count: 0 });
    }
    if vocab.len() != n {
        return Err(Error::Format(format!("header promises {n} words, found {}", vocab.len())));
    }
    let meta = EmbeddingMeta {
        dim,
        window: 0,
        negatives: 0,
        epochs: 0,
        min_count: 0,
        seed: 0,
    };
    EmbeddingModel::from_parts(vocab, vectors, meta)
}
