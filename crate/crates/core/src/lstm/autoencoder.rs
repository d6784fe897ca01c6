//! Sequence-to-sequence autoencoder pretraining.
//!
//! The encoder reads `x_1..x_T`; its final state initialises a decoder that
//! sees `0, x_1, .., x_{T-1}` (teacher forcing) and emits `W_out h_t + b_out`
//! as the reconstruction of `x_t`. The loss is the mean squared error over
//! all steps and components. Only the encoder cell is kept.

use ndarray::Array1;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{adagrad_update, backward_sequence, run_sequence, AdaGradConfig, AdaGradState, LstmParams, LstmState};
use crate::{seeds, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    pub epochs: usize,
    pub seed: u64,
    pub init_range: f64,
    pub adagrad: AdaGradConfig,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            epochs: 10,
            seed: 1,
            init_range: 0.08,
            adagrad: AdaGradConfig {
                learning_rate: 0.05,
                decay: 0.0,
                eps: 1e-10,
            },
        }
    }
}

fn decoder_inputs(seq: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    std::iter::once(vec![0.0; d]).chain(seq[..seq.len() - 1].iter().cloned()).collect()
}

/// Reconstruction loss of one sequence, with gradients for encoder and decoder when requested.
fn example(
    enc: &LstmParams,
    dec: &LstmParams,
    seq: &[Vec<f64>],
    grads: Option<(&mut LstmParams, &mut LstmParams)>,
) -> Result<f64> {
    let d = enc.dim();
    let t = seq.len();
    let enc_cache = run_sequence(enc, &LstmState::zeros(d), seq)?;
    let dec_cache = run_sequence(dec, &enc_cache.final_state(), &decoder_inputs(seq, d))?;
    let norm = (t * d) as f64;
    let mut loss = 0.0;
    let mut dys = Vec::with_capacity(t);
    for (step, x) in seq.iter().enumerate() {
        let y = dec.w_out.dot(dec_cache.hidden(step)) + &dec.b_out;
        let diff = &y - &Array1::from(x.clone());
        loss += diff.mapv(|v| v * v).sum() / norm;
        dys.push(diff * (2.0 / norm));
    }
    if let Some((ge, gd)) = grads {
        let mut dh = Vec::with_capacity(t);
        for (step, dy) in dys.iter().enumerate() {
            super::add_outer(&mut gd.w_out, dy, dec_cache.hidden(step));
            gd.b_out += dy;
            dh.push(dec.w_out.t().dot(dy));
        }
        let (dh0, dc0) = backward_sequence(dec, &dec_cache, &dh, Array1::zeros(d), Array1::zeros(d), gd);
        let none = vec![Array1::zeros(d); t];
        backward_sequence(enc, &enc_cache, &none, dh0, dc0, ge);
    }
    Ok(loss)
}

/// Mean squared reconstruction error of `seq` under the given encoder/decoder pair.
pub fn autoencoder_loss(enc: &LstmParams, dec: &LstmParams, seq: &[Vec<f64>]) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::pre("autoencoder sequence is empty"));
    }
    if dec.n_classes() != enc.dim() || dec.dim() != enc.dim() {
        return Err(Error::Dimension {
            expected: enc.dim(),
            got: dec.n_classes(),
        });
    }
    example(enc, dec, seq, None)
}

/// Train encoder and decoder on unlabeled sequences. Returns the encoder
/// (with an empty output layer), the decoder and the mean loss per epoch.
pub fn pretrain_autoencoder(
    seqs: &[Vec<Vec<f64>>],
    dim: usize,
    cfg: &AutoencoderConfig,
) -> Result<(LstmParams, LstmParams, Vec<f64>)> {
    let mut rng = seeds::rng(cfg.seed, "autoencoder-init");
    let mut enc = LstmParams::uniform(dim, 0, cfg.init_range, &mut rng);
    let mut dec = LstmParams::uniform(dim, dim, cfg.init_range, &mut rng);
    let mut opt_e = AdaGradState::new(&enc, cfg.adagrad.clone());
    let mut opt_d = AdaGradState::new(&dec, cfg.adagrad.clone());
    let usable: Vec<&Vec<Vec<f64>>> = seqs.iter().filter(|s| !s.is_empty()).collect();
    let mut order: Vec<usize> = (0..usable.len()).collect();
    let mut shuffle = seeds::rng(cfg.seed, "autoencoder-shuffle");
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for &i in &order {
            let mut ge = LstmParams::zeros(dim, 0);
            let mut gd = LstmParams::zeros(dim, dim);
            total += example(&enc, &dec, usable[i], Some((&mut ge, &mut gd)))?;
            adagrad_update(&mut enc, &ge, &mut opt_e)?;
            adagrad_update(&mut dec, &gd, &mut opt_d)?;
        }
        if !enc.is_finite() || !dec.is_finite() {
            return Err(Error::NonFinite(format!("autoencoder parameters after epoch {epoch}")));
        }
        losses.push(total / usable.len().max(1) as f64);
    }
    Ok((enc, dec, losses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = seeds::rng(31, "test");
        let d = 3;
        let enc = LstmParams::uniform(d, 0, 0.5, &mut rng);
        let dec = LstmParams::uniform(d, d, 0.5, &mut rng);
        let seq: Vec<Vec<f64>> = (0..4).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut ge = LstmParams::zeros(d, 0);
        let mut gd = LstmParams::zeros(d, d);
        example(&enc, &dec, &seq, Some((&mut ge, &mut gd))).unwrap();
        let h = 1e-4;
        for (which, grads) in [(0, &ge), (1, &gd)] {
            for (fi, (name, analytic)) in grads.fields().iter().enumerate() {
                for idx in 0..analytic.len() {
                    let at = |delta: f64| {
                        let (mut e, mut dd) = (enc.clone(), dec.clone());
                        let target = if which == 0 { &mut e } else { &mut dd };
                        target.fields_mut()[fi].1[idx] += delta;
                        autoencoder_loss(&e, &dd, &seq).unwrap()
                    };
                    let num = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
                    let a = analytic[idx];
                    let rel = (a - num).abs() / a.abs().max(num.abs()).max(1e-8);
                    assert!(rel < 1e-4, "{which}:{name}[{idx}] analytic {a} numeric {num}");
                }
            }
        }
    }

    #[test]
    fn reconstruction_loss_decreases() {
        let mut rng = seeds::rng(12, "test");
        let seqs: Vec<Vec<Vec<f64>>> = (0..100)
            .map(|_| {
                let t = rng.gen_range(2..6);
                (0..t).map(|_| (0..4).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect()
            })
            .collect();
        let cfg = AutoencoderConfig {
            epochs: 5,
            ..AutoencoderConfig::default()
        };
        let (enc, _, losses) = pretrain_autoencoder(&seqs, 4, &cfg).unwrap();
        assert!(losses.last().unwrap() < losses.first().unwrap(), "{losses:?}");
        assert_eq!(enc.n_classes(), 0);
    }

    #[test]
    fn copies_single_step_sequences() {
        let mut rng = seeds::rng(13, "test");
        let seqs: Vec<Vec<Vec<f64>>> =
            (0..100).map(|_| vec![(0..2).map(|_| rng.gen_range(-0.8..0.8)).collect()]).collect();
        let cfg = AutoencoderConfig {
            epochs: 60,
            ..AutoencoderConfig::default()
        };
        let (_, _, losses) = pretrain_autoencoder(&seqs, 2, &cfg).unwrap();
        assert!(*losses.last().unwrap() < 0.1, "{losses:?}");
    }
}
