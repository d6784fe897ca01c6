use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{adagrad_update, backward, forward, loss_multimargin, AdaGradConfig, AdaGradState, LstmParams, MarginNorm};
use crate::{seeds, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstmConfig {
    pub epochs: usize,
    pub seed: u64,
    pub init_range: f64,
    pub adagrad: AdaGradConfig,
    pub margin: MarginNorm,
    /// Tokens kept on each side of the target; `None` feeds the whole citation.
    pub window: Option<usize>,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            epochs: 30,
            seed: 1,
            init_range: 0.08,
            adagrad: AdaGradConfig::default(),
            margin: MarginNorm::Mean,
            window: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LstmTrainStats {
    /// Mean hinge loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Highest-scoring class, lowest index on ties.
pub fn lstm_predict(p: &LstmParams, ctx: &[Vec<f64>]) -> Result<usize> {
    let (scores, _) = forward(p, ctx)?;
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    Ok(best)
}

/// Per-example AdaGrad on the multi-class hinge loss, one pass per epoch in
/// a seeded shuffled order. `init` supplies pretrained cell weights; the
/// output layer is always freshly initialised.
pub fn train_lstm_classifier(
    seqs: &[Vec<Vec<f64>>],
    labels: &[usize],
    n_classes: usize,
    cfg: &LstmConfig,
    init: Option<&LstmParams>,
) -> Result<(LstmParams, LstmTrainStats)> {
    if seqs.len() != labels.len() {
        return Err(Error::Dimension {
            expected: seqs.len(),
            got: labels.len(),
        });
    }
    if n_classes < 2 {
        return Err(Error::pre("LSTM training needs at least two classes"));
    }
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(Error::pre(format!("label {l} outside 0..{n_classes}")));
        }
        counts[l] += 1;
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::pre(format!("class {c} has no training sequences")));
    }
    if let Some(i) = seqs.iter().position(|s| s.is_empty()) {
        return Err(Error::pre(format!("training sequence {i} is empty")));
    }
    let d = seqs[0][0].len();

    let mut p = LstmParams::uniform(d, n_classes, cfg.init_range, &mut seeds::rng(cfg.seed, "lstm-init"));
    if let Some(pre) = init {
        p.copy_cell_from(pre)?;
    }
    let mut opt = AdaGradState::new(&p, cfg.adagrad.clone());
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    let mut rng = seeds::rng(cfg.seed, "lstm-shuffle");
    let mut stats = LstmTrainStats::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (scores, cache) = forward(&p, &seqs[i])?;
            let (loss, ds) = loss_multimargin(&scores, labels[i], cfg.margin)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("LSTM loss in epoch {epoch}")));
            }
            total += loss;
            if loss > 0.0 {
                let g = backward(&p, &cache, &ds)?;
                adagrad_update(&mut p, &g, &mut opt)?;
            }
        }
        if !p.is_finite() {
            return Err(Error::NonFinite(format!("LSTM parameters after epoch {epoch}")));
        }
        stats.epoch_losses.push(total / seqs.len() as f64);
    }
    Ok((p, stats))
}
