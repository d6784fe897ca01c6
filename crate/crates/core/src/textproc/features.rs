use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PosTagger, SparseFeatures, TokenStream};
use crate::corpus::{Annotation, Citation, Instance};
use crate::{Error, Result};

/// Placeholder for window positions outside the target's sentence.
pub const NULL_TOKEN: &str = "NULL";

/// Local collocation slots `(i, j)`: the ordered words from offset `i` to
/// offset `j` around the target, the target itself skipped.
pub const COLLOCATION_SLOTS: [(i32, i32); 11] = [
    (-2, -2),
    (-1, -1),
    (1, 1),
    (2, 2),
    (-2, -1),
    (-1, 1),
    (1, 2),
    (-3, -1),
    (-2, 1),
    (-1, 2),
    (1, 3),
];

const POS_OFFSETS: [i32; 6] = [-3, -2, -1, 1, 2, 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureFamily {
    Unigrams,
    Bigrams,
    Pos,
    Collocations,
    Concepts,
    Semtypes,
    WeSum,
    WeAvg,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 8] = [
        FeatureFamily::Unigrams,
        FeatureFamily::Bigrams,
        FeatureFamily::Pos,
        FeatureFamily::Collocations,
        FeatureFamily::Concepts,
        FeatureFamily::Semtypes,
        FeatureFamily::WeSum,
        FeatureFamily::WeAvg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureFamily::Unigrams => "unigrams",
            FeatureFamily::Bigrams => "bigrams",
            FeatureFamily::Pos => "pos",
            FeatureFamily::Collocations => "collocations",
            FeatureFamily::Concepts => "concepts",
            FeatureFamily::Semtypes => "semtypes",
            FeatureFamily::WeSum => "we-sum",
            FeatureFamily::WeAvg => "we-avg",
        }
    }

    pub fn is_embedding(self) -> bool {
        matches!(self, FeatureFamily::WeSum | FeatureFamily::WeAvg)
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FeatureFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FeatureFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature family `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextFeatureConfig {
    /// Emit 1.0 indicators instead of counts for unigram/bigram features.
    pub binary: bool,
    /// Leave the target occurrence out of the bag features.
    pub exclude_target: bool,
    /// Missing concept/semantic-type layers are an error rather than empty.
    pub strict_annotations: bool,
}

impl Default for TextFeatureConfig {
    fn default() -> Self {
        TextFeatureConfig {
            binary: false,
            exclude_target: true,
            strict_annotations: true,
        }
    }
}

fn check_position(ts: &TokenStream, inst: &Instance) -> Result<()> {
    if inst.position >= ts.len() {
        return Err(Error::pre(format!(
            "instance position {} out of range for citation `{}` with {} tokens",
            inst.position,
            inst.citation_id,
            ts.len()
        )));
    }
    Ok(())
}

fn bag_value(features: &mut SparseFeatures, key: String, binary: bool) {
    if binary {
        features.set(key, 1.0);
    } else {
        features.add(key, 1.0);
    }
}

/// Stem counts over the whole citation.
pub fn extract_unigrams(ts: &TokenStream, inst: &Instance, cfg: &TextFeatureConfig) -> Result<SparseFeatures> {
    check_position(ts, inst)?;
    let mut out = SparseFeatures::new();
    for (i, tok) in ts.tokens.iter().enumerate() {
        if cfg.exclude_target && i == inst.position {
            continue;
        }
        bag_value(&mut out, format!("uni:{}", tok.stem), cfg.binary);
    }
    Ok(out)
}

/// Adjacent stem pairs within a sentence, together with the unigrams.
pub fn extract_bigrams(ts: &TokenStream, inst: &Instance, cfg: &TextFeatureConfig) -> Result<SparseFeatures> {
    let mut out = extract_unigrams(ts, inst, cfg)?;
    for (i, pair) in ts.tokens.windows(2).enumerate() {
        if pair[0].sentence != pair[1].sentence {
            continue;
        }
        if cfg.exclude_target && (i == inst.position || i + 1 == inst.position) {
            continue;
        }
        bag_value(&mut out, format!("bi:{}_{}", pair[0].stem, pair[1].stem), cfg.binary);
    }
    Ok(out)
}

fn fmt_offset(o: i32) -> String {
    if o > 0 {
        format!("+{o}")
    } else {
        o.to_string()
    }
}

/// Token index at `offset` from the target when it is in the target's sentence.
fn in_sentence(ts: &TokenStream, target: usize, offset: i32) -> Option<usize> {
    let idx = target as i64 + i64::from(offset);
    if idx < 0 || idx >= ts.len() as i64 {
        return None;
    }
    let idx = idx as usize;
    (ts.tokens[idx].sentence == ts.tokens[target].sentence).then_some(idx)
}

/// POS tags of the three words either side of the target, `NULL` outside
/// its sentence. Citation annotations take precedence over `tagger`.
pub fn extract_pos_window(
    ts: &TokenStream,
    citation: &Citation,
    inst: &Instance,
    tagger: Option<&dyn PosTagger>,
) -> Result<SparseFeatures> {
    check_position(ts, inst)?;
    let annotated: Option<HashMap<usize, &str>> = citation
        .pos
        .as_ref()
        .map(|tags| tags.iter().map(|t| (t.index, t.tag.as_str())).collect());
    if annotated.is_none() && tagger.is_none() {
        return Err(Error::NoPos(citation.id.clone()));
    }

    let mut out = SparseFeatures::new();
    for offset in POS_OFFSETS {
        let tag = match in_sentence(ts, inst.position, offset) {
            None => NULL_TOKEN.to_string(),
            Some(idx) => match (&annotated, tagger) {
                (Some(map), _) if map.contains_key(&idx) => map[&idx].to_string(),
                (_, Some(t)) => t.tag(&ts.tokens[idx].surface),
                _ => "UNK".to_string(),
            },
        };
        out.set(format!("pos:{}:{}", fmt_offset(offset), tag), 1.0);
    }
    Ok(out)
}

/// The eleven local collocation features, one per slot.
pub fn extract_collocations(ts: &TokenStream, inst: &Instance) -> Result<SparseFeatures> {
    check_position(ts, inst)?;
    let mut out = SparseFeatures::new();
    for (i, j) in COLLOCATION_SLOTS {
        let words: Vec<&str> = (i..=j)
            .filter(|&o| o != 0)
            .map(|o| match in_sentence(ts, inst.position, o) {
                Some(idx) => ts.tokens[idx].surface.as_str(),
                None => NULL_TOKEN,
            })
            .collect();
        out.set(format!("col:{},{}:{}", fmt_offset(i), fmt_offset(j), words.join("_")), 1.0);
    }
    Ok(out)
}

fn label_counts(
    layer: Option<&Vec<Annotation>>,
    prefix: &str,
    name: &'static str,
    citation: &Citation,
    strict: bool,
) -> Result<SparseFeatures> {
    let Some(anns) = layer else {
        if strict {
            return Err(Error::MissingLayer {
                layer: name,
                citation: citation.id.clone(),
            });
        }
        return Ok(SparseFeatures::new());
    };
    Ok(anns.iter().map(|a| (format!("{prefix}{}", a.label), 1.0)).collect())
}

/// Bag of concept identifiers annotated on the citation.
pub fn extract_concepts(c: &Citation, strict: bool) -> Result<SparseFeatures> {
    label_counts(c.concepts.as_ref(), "cui:", "concepts", c, strict)
}

/// Bag of semantic-type codes annotated on the citation.
pub fn extract_semtypes(c: &Citation, strict: bool) -> Result<SparseFeatures> {
    label_counts(c.semtypes.as_ref(), "st:", "semtypes", c, strict)
}

/// Key-wise union; values of repeated keys are summed.
pub fn combine(feature_sets: &[SparseFeatures]) -> SparseFeatures {
    let mut out = SparseFeatures::new();
    for set in feature_sets {
        for (k, v) in set.iter() {
            out.add(k, v);
        }
    }
    out
}
