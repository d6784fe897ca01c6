//! CBOW word embeddings and context aggregation.

mod aggregate;
pub mod cbow;
mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate_avg, aggregate_sum, instance_context, Aggregate};
pub use cbow::{train_cbow, CbowConfig, CorpusDoc, TrainStats};
pub use io::{read_binary, read_text, write_binary, write_text, MAGIC, VERSION};

/// A dense real vector (embedding row or aggregate).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(pub Vec<f64>);

impl DenseVector {
    pub fn zeros(d: usize) -> Self {
        DenseVector(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn cosine(&self, other: &DenseVector) -> f64 {
        let n = self.norm() * other.norm();
        if n == 0.0 {
            0.0
        } else {
            self.dot(other) / n
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub word: String,
    pub count: u64,
}

/// Training metadata carried with a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub seed: u64,
}

/// Vocabulary (descending frequency) with one `dim`-sized row per word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    meta: EmbeddingMeta,
}

impl EmbeddingModel {
    pub fn from_parts(vocab: Vec<VocabEntry>, vectors: Vec<f32>, meta: EmbeddingMeta) -> crate::Result<Self> {
        if vectors.len() != vocab.len() * meta.dim {
            return Err(crate::Error::Dimension {
                expected: vocab.len() * meta.dim,
                got: vectors.len(),
            });
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::NonFinite("embedding vectors".into()));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, e) in vocab.iter().enumerate() {
            if index.insert(e.word.clone(), i).is_some() {
                return Err(crate::Error::Format(format!("duplicate vocabulary word `{}`", e.word)));
            }
        }
        Ok(EmbeddingModel {
            vocab,
            index,
            vectors,
            meta,
        })
    }

    pub fn dim(&self) -> usize {
        self.meta.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[VocabEntry] {
        &self.vocab
    }

    pub fn meta(&self) -> &EmbeddingMeta {
        &self.meta
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Stored row of `word`, `None` when out of vocabulary.
    pub fn row(&self, word: &str) -> Option<&[f32]> {
        let i = self.word_index(word)?;
        Some(&self.vectors[i * self.meta.dim..(i + 1) * self.meta.dim])
    }

    pub fn lookup(&self, word: &str) -> Option<DenseVector> {
        self.row(word).map(|r| DenseVector(r.iter().map(|&v| f64::from(v)).collect()))
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }
}
