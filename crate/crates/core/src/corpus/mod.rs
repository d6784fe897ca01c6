//! Citations, ambiguous-word instances and sense inventories.

mod jsonl;
mod pseudo;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::textproc::tokenize_citation;
use crate::{Error, Result};

pub use jsonl::{load_jsonl, save_jsonl, JsonlAdapter, Manifest, Record, SCHEMA_VERSION};
pub use pseudo::{generate_pseudoword_dataset, Generated, PseudoWordConfig, TopicParams};

/// A labelled token span `[start, end)` over the citation's token stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl Annotation {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Annotation {
            start,
            end,
            label: label.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosAnnotation {
    pub index: usize,
    pub tag: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<Annotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semtypes: Option<Vec<Annotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<PosAnnotation>>,
}

impl Citation {
    pub fn new(id: impl Into<String>, title: impl Into<String>, abstract_text: impl Into<String>) -> Self {
        Citation {
            id: id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            concepts: None,
            semtypes: None,
            pos: None,
        }
    }
}

/// One occurrence of an ambiguous term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub citation_id: String,
    pub term: String,
    /// Token index of the ambiguous word in the citation's token stream.
    pub position: usize,
    pub sense: String,
}

impl Instance {
    pub fn new(citation_id: impl Into<String>, term: impl Into<String>, position: usize, sense: impl Into<String>) -> Self {
        Instance {
            citation_id: citation_id.into(),
            term: term.into(),
            position,
            sense: sense.into(),
        }
    }

    /// Identifier used in feature files and prediction logs.
    pub fn key(&self) -> String {
        format!("{}:{}:{}", self.citation_id, self.term, self.position)
    }
}

/// Ambiguous word type: term, abbreviation, or both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WordType {
    T,
    A,
    AT,
}

impl fmt::Display for WordType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WordType::T => "T",
            WordType::A => "A",
            WordType::AT => "AT",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseEntry {
    pub senses: Vec<String>,
    pub word_type: WordType,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseInventory {
    pub entries: BTreeMap<String, SenseEntry>,
}

impl SenseInventory {
    pub fn insert(&mut self, term: impl Into<String>, senses: Vec<String>, word_type: WordType) -> Result<()> {
        let term = term.into();
        if senses.len() < 2 {
            return Err(Error::InvalidDataset(format!("term `{term}` needs at least two senses")));
        }
        let distinct: HashSet<&String> = senses.iter().collect();
        if distinct.len() != senses.len() {
            return Err(Error::InvalidDataset(format!("term `{term}` has duplicate sense ids")));
        }
        if self.entries.contains_key(&term) {
            return Err(Error::InvalidDataset(format!("term `{term}` listed twice in the inventory")));
        }
        self.entries.insert(term, SenseEntry { senses, word_type });
        Ok(())
    }

    pub fn senses(&self, term: &str) -> Option<&[String]> {
        self.entries.get(term).map(|e| e.senses.as_slice())
    }

    /// Index of `sense` within the term's ordered sense list.
    pub fn sense_index(&self, term: &str, sense: &str) -> Option<usize> {
        self.senses(term)?.iter().position(|s| s == sense)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// A validated collection of citations, instances and their inventory.
/// Immutable after construction.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    citations: Vec<Citation>,
    instances: Vec<Instance>,
    inventory: SenseInventory,
    by_id: HashMap<String, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.citations == other.citations && self.instances == other.instances && self.inventory == other.inventory
    }
}

impl Dataset {
    /// Build and validate a dataset.
    pub fn new(citations: Vec<Citation>, instances: Vec<Instance>, inventory: SenseInventory) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(citations.len());
        let mut token_counts = Vec::with_capacity(citations.len());
        for (i, c) in citations.iter().enumerate() {
            if c.id.is_empty() {
                return Err(Error::InvalidDataset(format!("citation #{i} has an empty id")));
            }
            if by_id.insert(c.id.clone(), i).is_some() {
                return Err(Error::InvalidDataset(format!("duplicate citation id `{}`", c.id)));
            }
            let n = tokenize_citation(c).len();
            for (layer, anns) in [("concepts", &c.concepts), ("semtypes", &c.semtypes)] {
                for a in anns.iter().flatten() {
                    if a.start >= a.end || a.end > n {
                        return Err(Error::InvalidDataset(format!(
                            "citation `{}`: {layer} span ({}, {}) outside {n} tokens",
                            c.id, a.start, a.end
                        )));
                    }
                }
            }
            for p in c.pos.iter().flatten() {
                if p.index >= n {
                    return Err(Error::InvalidDataset(format!(
                        "citation `{}`: POS index {} outside {n} tokens",
                        c.id, p.index
                    )));
                }
            }
            token_counts.push(n);
        }

        let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
        for inst in &instances {
            let &ci = by_id
                .get(&inst.citation_id)
                .ok_or_else(|| Error::DanglingCitation(inst.citation_id.clone()))?;
            if inventory.sense_index(&inst.term, &inst.sense).is_none() {
                return Err(Error::UnknownSense {
                    term: inst.term.clone(),
                    sense: inst.sense.clone(),
                });
            }
            if inst.position >= token_counts[ci] {
                return Err(Error::InvalidDataset(format!(
                    "instance of `{}` in `{}` at position {} beyond {} tokens",
                    inst.term, inst.citation_id, inst.position, token_counts[ci]
                )));
            }
            *seen.entry((&inst.term, &inst.sense)).or_default() += 1;
        }
        for (term, entry) in &inventory.entries {
            for sense in &entry.senses {
                if !seen.contains_key(&(term.as_str(), sense.as_str())) {
                    return Err(Error::InvalidDataset(format!("sense `{sense}` of term `{term}` has no instances")));
                }
            }
        }

        Ok(Dataset {
            citations,
            instances,
            inventory,
            by_id,
        })
    }

    pub fn citations(&self) -> &[Citation] {
        &self.citations
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn inventory(&self) -> &SenseInventory {
        &self.inventory
    }

    pub fn citation(&self, id: &str) -> Option<&Citation> {
        self.by_id.get(id).map(|&i| &self.citations[i])
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Instance indices per term, in dataset order.
    pub fn instances_by_term(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, inst) in self.instances.iter().enumerate() {
            out.entry(inst.term.as_str()).or_default().push(i);
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_jsonl(path)
    }
}

/// Source of datasets in some external layout, converted into [`Dataset`].
pub trait DatasetAdapter {
    fn name(&self) -> &str;
    fn load(&self, path: &Path) -> Result<Dataset>;
}

/// Terms grouped by their number of senses.
pub fn group_by_senses(d: &Dataset) -> BTreeMap<usize, Vec<String>> {
    let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (term, entry) in &d.inventory.entries {
        out.entry(entry.senses.len()).or_default().push(term.clone());
    }
    out
}

/// Terms grouped by word type.
pub fn group_by_type(d: &Dataset) -> BTreeMap<WordType, Vec<String>> {
    let mut out: BTreeMap<WordType, Vec<String>> = BTreeMap::new();
    for (term, entry) in &d.inventory.entries {
        out.entry(entry.word_type).or_default().push(term.clone());
    }
    out
}
