use serde::{Deserialize, Serialize};

use super::LstmParams;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaGradConfig {
    pub learning_rate: f64,
    /// Step-wise decay: the rate at step `t` is `learning_rate / (1 + t * decay)`.
    pub decay: f64,
    pub eps: f64,
}

impl Default for AdaGradConfig {
    fn default() -> Self {
        AdaGradConfig {
            learning_rate: 0.01,
            decay: 0.01,
            eps: 1e-10,
        }
    }
}

/// Accumulated squared gradients, one per parameter, plus the step count.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaGradState {
    pub cfg: AdaGradConfig,
    pub accum: LstmParams,
    pub step: u64,
}

impl AdaGradState {
    pub fn new(like: &LstmParams, cfg: AdaGradConfig) -> Self {
        AdaGradState {
            cfg,
            accum: LstmParams::zeros(like.dim(), like.n_classes()),
            step: 0,
        }
    }

    /// Learning rate applied by the next update.
    pub fn current_rate(&self) -> f64 {
        self.cfg.learning_rate / (1.0 + self.step as f64 * self.cfg.decay)
    }
}

/// `accum += g^2; theta -= lr_t * g / (sqrt(accum) + eps)`.
pub fn adagrad_update(p: &mut LstmParams, g: &LstmParams, a: &mut AdaGradState) -> Result<()> {
    if !p.same_shape(g) || !p.same_shape(&a.accum) {
        return Err(Error::Dimension {
            expected: p.num_parameters(),
            got: g.num_parameters(),
        });
    }
    let lr = a.current_rate();
    let eps = a.cfg.eps;
    for (((_, theta), (_, grad)), (_, acc)) in p.fields_mut().into_iter().zip(g.fields()).zip(a.accum.fields_mut()) {
        for ((t, &gv), s) in theta.iter_mut().zip(grad).zip(acc.iter_mut()) {
            if gv != 0.0 {
                *s += gv * gv;
                *t -= lr * gv / (s.sqrt() + eps);
            }
        }
    }
    a.step += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut p = LstmParams::zeros(2, 2);
        p.b_i.fill(0.3);
        let before = p.clone();
        let mut a = AdaGradState::new(&p, AdaGradConfig::default());
        adagrad_update(&mut p, &LstmParams::zeros(2, 2), &mut a).unwrap();
        assert_eq!(p, before);
        assert_eq!(a.accum, LstmParams::zeros(2, 2));
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = LstmParams::zeros(1, 2);
        let mut g = LstmParams::zeros(1, 2);
        g.b_c[0] = 3.0;
        let cfg = AdaGradConfig {
            decay: 0.0,
            ..AdaGradConfig::default()
        };
        let mut a = AdaGradState::new(&p, cfg);
        adagrad_update(&mut p, &g, &mut a).unwrap();
        let expected = -0.01 * 3.0 / (3.0 + 1e-10);
        assert_eq!(p.b_c[0], expected);
        assert!((p.b_c[0] + 0.01).abs() < 1e-12);
        assert_eq!(a.accum.b_c[0], 9.0);
    }

    #[test]
    fn rate_decays_with_steps() {
        let p = LstmParams::zeros(1, 2);
        let mut a = AdaGradState::new(&p, AdaGradConfig::default());
        assert_eq!(a.current_rate(), 0.01);
        a.step = 100;
        assert_eq!(a.current_rate(), 0.01 / 2.0);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = LstmParams::zeros(2, 2);
        let mut a = AdaGradState::new(&p, AdaGradConfig::default());
        assert!(adagrad_update(&mut p, &LstmParams::zeros(2, 3), &mut a).is_err());
    }
}
