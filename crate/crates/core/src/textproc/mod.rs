//! Tokenization, stemming and the sparse context-feature families.

mod feature_file;
mod features;
pub mod porter;
mod pos;
mod tokenize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use feature_file::{parse_feature_line, write_feature_line, FeatureLine};
pub use features::{
    combine, extract_bigrams, extract_collocations, extract_concepts, extract_pos_window, extract_semtypes,
    extract_unigrams, FeatureFamily, TextFeatureConfig, COLLOCATION_SLOTS, NULL_TOKEN,
};
pub use pos::{LookupTagger, PosTagger};
pub use tokenize::{tokenize, tokenize_citation, Token, TokenStream, TOKENIZER_FINGERPRINT};

/// Named sparse features. Keys carry a family prefix (`uni:`, `bi:`,
/// `pos:`, `col:`, `cui:`, `st:`, `we:`) so families never collide.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseFeatures {
    pub entries: BTreeMap<String, f64>,
}

impl SparseFeatures {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: impl Into<String>, value: f64) {
        *self.entries.entry(key.into()).or_insert(0.0) += value;
    }

    pub fn set(&mut self, key: impl Into<String>, value: f64) {
        self.entries.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

impl FromIterator<(String, f64)> for SparseFeatures {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut out = SparseFeatures::new();
        for (k, v) in iter {
            out.add(k, v);
        }
        out
    }
}
