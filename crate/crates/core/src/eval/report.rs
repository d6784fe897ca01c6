use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::ci95;
use crate::corpus::{SenseInventory, WordType};
use crate::{Error, Result};

/// One held-out prediction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub instance: String,
    pub term: String,
    pub fold: usize,
    pub gold: String,
    pub predicted: String,
}

impl Prediction {
    pub fn is_correct(&self) -> bool {
        self.gold == self.predicted
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermResult {
    pub term: String,
    pub n_senses: usize,
    pub word_type: WordType,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// Feature-space dimensionality of each fold's training set.
    pub feature_dims: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    /// `senses` or `type`.
    pub by: String,
    pub key: String,
    pub n_terms: usize,
    pub macro_accuracy: f64,
    pub micro_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub features: String,
    pub learner: String,
    pub seed: u64,
    /// Resolved configuration the numbers were produced with.
    pub config: serde_json::Value,
    pub fingerprint: String,
    pub terms: Vec<TermResult>,
    pub macro_accuracy: f64,
    pub micro_accuracy: f64,
    /// Interval over per-term accuracies; absent for fewer than two terms.
    pub ci95: Option<(f64, f64)>,
    pub groups: Vec<GroupResult>,
    pub predictions: Vec<Prediction>,
}

fn fnv_hex(s: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn macro_micro(rows: &[&TermResult]) -> (f64, f64) {
    let n = rows.len().max(1) as f64;
    let macro_acc = rows.iter().map(|t| t.accuracy).sum::<f64>() / n;
    let correct: usize = rows.iter().map(|t| t.correct).sum();
    let total: usize = rows.iter().map(|t| t.total).sum();
    let micro = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
    (macro_acc, micro)
}

impl EvalReport {
    /// Aggregate raw predictions into per-term, macro, micro and group figures.
    pub fn from_predictions(
        features: impl Into<String>,
        learner: impl Into<String>,
        seed: u64,
        config: serde_json::Value,
        mut predictions: Vec<Prediction>,
        inventory: &SenseInventory,
        feature_dims: &BTreeMap<String, Vec<usize>>,
    ) -> Result<Self> {
        predictions.sort_by(|a, b| a.term.cmp(&b.term).then(a.fold.cmp(&b.fold)).then(a.instance.cmp(&b.instance)));
        let mut per_term: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for p in &predictions {
            let e = per_term.entry(p.term.as_str()).or_default();
            e.1 += 1;
            if p.is_correct() {
                e.0 += 1;
            }
        }
        let mut terms = Vec::with_capacity(per_term.len());
        for (term, (correct, total)) in per_term {
            let entry = inventory
                .entries
                .get(term)
                .ok_or_else(|| Error::InvalidDataset(format!("prediction for unknown term `{term}`")))?;
            terms.push(TermResult {
                term: term.to_string(),
                n_senses: entry.senses.len(),
                word_type: entry.word_type,
                correct,
                total,
                accuracy: correct as f64 / total as f64,
                feature_dims: feature_dims.get(term).cloned().unwrap_or_default(),
            });
        }
        let all: Vec<&TermResult> = terms.iter().collect();
        let (macro_accuracy, micro_accuracy) = macro_micro(&all);
        let accs: Vec<f64> = terms.iter().map(|t| t.accuracy).collect();
        let ci95 = if accs.len() >= 2 { Some(ci95(&accs)?) } else { None };

        let mut groups = Vec::new();
        let mut by_senses: BTreeMap<usize, Vec<&TermResult>> = BTreeMap::new();
        let mut by_type: BTreeMap<WordType, Vec<&TermResult>> = BTreeMap::new();
        for t in &terms {
            by_senses.entry(t.n_senses).or_default().push(t);
            by_type.entry(t.word_type).or_default().push(t);
        }
        for (k, rows) in by_senses {
            let (ma, mi) = macro_micro(&rows);
            groups.push(GroupResult {
                by: "senses".into(),
                key: k.to_string(),
                n_terms: rows.len(),
                macro_accuracy: ma,
                micro_accuracy: mi,
            });
        }
        for (k, rows) in by_type {
            let (ma, mi) = macro_micro(&rows);
            groups.push(GroupResult {
                by: "type".into(),
                key: format!("{k:?}"),
                n_terms: rows.len(),
                macro_accuracy: ma,
                micro_accuracy: mi,
            });
        }

        let fingerprint = fnv_hex(&config.to_string());
        let report = EvalReport {
            features: features.into(),
            learner: learner.into(),
            seed,
            config,
            fingerprint,
            terms,
            macro_accuracy,
            micro_accuracy,
            ci95,
            groups,
            predictions,
        };
        report.verify()?;
        Ok(report)
    }

    /// Check the aggregate figures against an independent recount of the raw predictions.
    pub fn verify(&self) -> Result<()> {
        let (macro_acc, micro_acc) = recount(&self.predictions);
        let ok = (macro_acc - self.macro_accuracy).abs() <= 1e-12
            && (micro_acc - self.micro_accuracy).abs() <= 1e-12
            && (0.0..=1.0).contains(&self.micro_accuracy);
        if ok {
            Ok(())
        } else {
            Err(Error::Numeric(format!(
                "report accounting mismatch: macro {} vs recount {macro_acc}, micro {} vs recount {micro_acc}",
                self.macro_accuracy, self.micro_accuracy
            )))
        }
    }

    /// Replace the recorded configuration and refresh the fingerprint.
    pub fn set_config(&mut self, config: serde_json::Value) {
        self.fingerprint = fnv_hex(&config.to_string());
        self.config = config;
    }

    pub fn term(&self, term: &str) -> Option<&TermResult> {
        self.terms.iter().find(|t| t.term == term)
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.accuracy).collect()
    }
}

/// Macro and micro accuracy straight from raw predictions.
pub fn recount(predictions: &[Prediction]) -> (f64, f64) {
    let mut terms: Vec<&str> = predictions.iter().map(|p| p.term.as_str()).collect();
    terms.sort_unstable();
    terms.dedup();
    let mut macro_sum = 0.0;
    for term in &terms {
        let mine: Vec<&Prediction> = predictions.iter().filter(|p| p.term == *term).collect();
        macro_sum += mine.iter().filter(|p| p.gold == p.predicted).count() as f64 / mine.len() as f64;
    }
    let correct = predictions.iter().filter(|p| p.gold == p.predicted).count();
    let micro = if predictions.is_empty() {
        0.0
    } else {
        correct as f64 / predictions.len() as f64
    };
    (macro_sum / terms.len().max(1) as f64, micro)
}
