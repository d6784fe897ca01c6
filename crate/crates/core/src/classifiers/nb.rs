use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_query, TrainingMatrix};
use crate::{Error, Result};

/// Gaussian naive Bayes: class priors plus per-class, per-feature mean and
/// variance. Variances are floored at `1e-9 * (largest feature variance + 1e-9)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub var_floor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NbPrediction {
    pub class: usize,
    /// Normalised log posteriors, one per class.
    pub log_posteriors: Vec<f64>,
}

pub fn nb_train(tm: &TrainingMatrix) -> Result<NbModel> {
    if tm.is_empty() {
        return Err(Error::pre("naive Bayes needs at least one training row"));
    }
    let counts = tm.class_counts();
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::pre(format!("class {c} has no training rows")));
    }
    let (k, d, n) = (tm.n_classes(), tm.dim(), tm.len() as f64);

    let mut global_mean = vec![0.0; d];
    let mut means = vec![vec![0.0; d]; k];
    for (r, &l) in tm.rows().iter().zip(tm.labels()) {
        for j in 0..d {
            means[l][j] += r[j];
            global_mean[j] += r[j];
        }
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= c as f64);
    }
    global_mean.iter_mut().for_each(|v| *v /= n);

    let mut global_var = vec![0.0; d];
    let mut variances = vec![vec![0.0; d]; k];
    for (r, &l) in tm.rows().iter().zip(tm.labels()) {
        for j in 0..d {
            variances[l][j] += (r[j] - means[l][j]).powi(2);
            global_var[j] += (r[j] - global_mean[j]).powi(2);
        }
    }
    let max_var = global_var.iter().map(|v| v / n).fold(0.0, f64::max);
    let var_floor = 1e-9 * (max_var + 1e-9);
    for (v, &c) in variances.iter_mut().zip(&counts) {
        v.iter_mut().for_each(|x| *x = (*x / c as f64).max(var_floor));
    }

    Ok(NbModel {
        priors: counts.iter().map(|&c| c as f64 / n).collect(),
        means,
        variances,
        var_floor,
    })
}

pub fn nb_predict(m: &NbModel, x: &[f64]) -> Result<NbPrediction> {
    check_query(m.means.first().map_or(0, Vec::len), x)?;
    let joint: Vec<f64> = (0..m.priors.len())
        .map(|c| {
            let ll: f64 = x
                .iter()
                .zip(m.means[c].iter().zip(&m.variances[c]))
                .map(|(&xi, (&mu, &var))| -0.5 * (2.0 * PI * var).ln() - (xi - mu).powi(2) / (2.0 * var))
                .sum();
            m.priors[c].ln() + ll
        })
        .collect();
    let mut class = 0;
    for (c, &s) in joint.iter().enumerate() {
        if s > joint[class] {
            class = c;
        }
    }
    let max = joint[class];
    let lse = max + joint.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    Ok(NbPrediction {
        class,
        log_posteriors: joint.iter().map(|s| s - lse).collect(),
    })
}
