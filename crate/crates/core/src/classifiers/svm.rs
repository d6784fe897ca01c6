//! Linear soft-margin SVM trained by sequential minimal optimization.
//!
//! Each class pair gets its own binary machine (one-vs-one). The dual
//!
//! ```text
//! max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! is solved two multipliers at a time, always picking the maximally
//! violating pair, until the KKT gap drops below `tol`.

use serde::{Deserialize, Serialize};

use super::{check_query, Normalization, Scaler, TrainingMatrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    /// Iteration cap per binary problem; 0 picks `max(100_000, 100 n)`.
    pub max_iter: usize,
    pub normalization: Normalization,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-3,
            max_iter: 0,
            normalization: Normalization::MinMax,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sparse view of a row for fast dot products against dense rows.
fn nonzeros(x: &[f64]) -> Vec<(usize, f64)> {
    x.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect()
}

fn gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let sparse: Vec<Vec<(usize, f64)>> = x.iter().map(|r| nonzeros(r)).collect();
    let n = x.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = sparse[i].iter().map(|&(f, a)| a * x[j][f]).sum();
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Dual objective `sum a - 1/2 a' Q a` for labels `y` in {-1, +1}.
pub fn dual_objective(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let k = gram(x);
    let mut quad = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Solve one binary dual. `y` holds +1/-1 labels; the decision function is
/// `sum_i alpha_i y_i <x_i, x> + b`.
pub fn smo_solve(x: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    let n = x.len();
    let k = gram(x);
    let mut alpha = vec![0.0; n];
    // err[i] = f(x_i) - y_i without the bias
    let mut err: Vec<f64> = y.iter().map(|&v| -v).collect();
    let max_iter = if max_iter == 0 { 100_000.max(100 * n) } else { max_iter };
    let eps = 1e-12 * c.max(1.0);

    let in_le = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let in_ge = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);

    let mut iterations = 0;
    let mut converged = false;
    let (mut b_low, mut b_up) = (f64::NEG_INFINITY, f64::INFINITY);
    while iterations < max_iter {
        let (mut i_low, mut i_up) = (usize::MAX, usize::MAX);
        b_low = f64::NEG_INFINITY;
        b_up = f64::INFINITY;
        for i in 0..n {
            if in_le(alpha[i], y[i]) && err[i] > b_low {
                b_low = err[i];
                i_low = i;
            }
            if in_ge(alpha[i], y[i]) && err[i] < b_up {
                b_up = err[i];
                i_up = i;
            }
        }
        if i_low == usize::MAX || i_up == usize::MAX || b_low - b_up <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (i1, i2) = (i_low, i_up);
        let (y1, y2) = (y[i1], y[i2]);
        let (a1, a2) = (alpha[i1], alpha[i2]);
        let (lo, hi) = if y1 != y2 {
            ((a2 - a1).max(0.0), (c + a2 - a1).min(c))
        } else {
            ((a1 + a2 - c).max(0.0), (a1 + a2).min(c))
        };
        let eta = k[i1][i1] + k[i2][i2] - 2.0 * k[i1][i2];
        let mut new_a2 = if eta > 1e-12 {
            (a2 + y2 * (err[i1] - err[i2]) / eta).clamp(lo, hi)
        } else if y2 > 0.0 {
            // flat curvature: the objective rises linearly towards this end
            hi
        } else {
            lo
        };
        if new_a2 < eps {
            new_a2 = 0.0;
        } else if new_a2 > c - eps {
            new_a2 = c;
        }
        let mut new_a1 = a1 + y1 * y2 * (a2 - new_a2);
        if new_a1 < eps {
            new_a1 = 0.0;
        } else if new_a1 > c - eps {
            new_a1 = c;
        }
        let (d1, d2) = (new_a1 - a1, new_a2 - a2);
        if d1 == 0.0 && d2 == 0.0 {
            log::warn!("SMO stalled on pair ({i1}, {i2}) with gap {}", b_low - b_up);
            break;
        }
        alpha[i1] = new_a1;
        alpha[i2] = new_a2;
        for (j, e) in err.iter_mut().enumerate() {
            *e += y1 * d1 * k[i1][j] + y2 * d2 * k[i2][j];
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations with KKT gap {}", b_low - b_up);
    }
    let threshold = match (b_low.is_finite(), b_up.is_finite()) {
        (true, true) => (b_low + b_up) / 2.0,
        (true, false) => b_low,
        (false, true) => b_up,
        (false, false) => 0.0,
    };
    SmoSolution {
        alpha,
        b: -threshold,
        iterations,
        converged,
    }
}

/// One-vs-one machine for classes `(positive, negative)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    pub w: Vec<f64>,
    pub b: f64,
    /// `(training row, alpha)` for every nonzero multiplier.
    pub support: Vec<(usize, f64)>,
    /// Set when all rows of the pair coincide: predict this class.
    pub fallback: Option<usize>,
    pub converged: bool,
}

impl BinarySvm {
    /// Signed margin on a normalized vector; positive favours `self.positive`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        if let Some(c) = self.fallback {
            return if c == self.positive { 1.0 } else { -1.0 };
        }
        self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub scaler: Scaler,
    pub n_classes: usize,
    pub pairs: Vec<BinarySvm>,
}

pub fn svm_train(tm: &TrainingMatrix, c: f64, tol: f64) -> Result<SvmModel> {
    svm_train_with(
        tm,
        &SvmParams {
            c,
            tol,
            ..SvmParams::default()
        },
    )
}

pub fn svm_train_with(tm: &TrainingMatrix, params: &SvmParams) -> Result<SvmModel> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(params.c) || !positive(params.tol) {
        return Err(Error::pre("C and tol must be positive"));
    }
    let counts = tm.class_counts();
    let present: Vec<usize> = (0..tm.n_classes()).filter(|&c| counts[c] > 0).collect();
    if present.len() < 2 {
        return Err(Error::pre("SVM training needs at least two classes"));
    }
    let scaler = Scaler::fit(params.normalization, tm.rows(), tm.dim());
    let scaled: Vec<Vec<f64>> = tm.rows().iter().map(|r| scaler.apply(r)).collect();

    let mut pairs = Vec::new();
    for (pi, &p) in present.iter().enumerate() {
        for &q in &present[pi + 1..] {
            let idx: Vec<usize> = (0..tm.len()).filter(|&i| tm.labels()[i] == p || tm.labels()[i] == q).collect();
            let x: Vec<Vec<f64>> = idx.iter().map(|&i| scaled[i].clone()).collect();
            let y: Vec<f64> = idx.iter().map(|&i| if tm.labels()[i] == p { 1.0 } else { -1.0 }).collect();

            if x.iter().all(|r| r == &x[0]) {
                let pos = y.iter().filter(|&&v| v > 0.0).count();
                let fallback = if 2 * pos >= y.len() { p } else { q };
                pairs.push(BinarySvm {
                    positive: p,
                    negative: q,
                    w: vec![0.0; tm.dim()],
                    b: 0.0,
                    support: Vec::new(),
                    fallback: Some(fallback),
                    converged: true,
                });
                continue;
            }

            let sol = smo_solve(&x, &y, params.c, params.tol, params.max_iter);
            let mut w = vec![0.0; tm.dim()];
            let mut support = Vec::new();
            for (local, &a) in sol.alpha.iter().enumerate() {
                if a > 0.0 {
                    for (wj, xj) in w.iter_mut().zip(&x[local]) {
                        *wj += a * y[local] * xj;
                    }
                    support.push((idx[local], a));
                }
            }
            if w.iter().any(|v| !v.is_finite()) || !sol.b.is_finite() {
                return Err(Error::NonFinite("SVM weights".into()));
            }
            pairs.push(BinarySvm {
                positive: p,
                negative: q,
                w,
                b: sol.b,
                support,
                fallback: None,
                converged: sol.converged,
            });
        }
    }
    Ok(SvmModel {
        params: params.clone(),
        scaler,
        n_classes: tm.n_classes(),
        pairs,
    })
}

/// One-vs-one vote; vote ties go to the larger summed signed margin, then
/// to the lower class index.
pub fn svm_predict(m: &SvmModel, x: &[f64]) -> Result<usize> {
    check_query(m.scaler.shift.len(), x)?;
    let z = m.scaler.apply(x);
    let mut votes = vec![0usize; m.n_classes];
    let mut margin = vec![0.0f64; m.n_classes];
    for pair in &m.pairs {
        let f = pair.decision(&z);
        if f >= 0.0 {
            votes[pair.positive] += 1;
        } else {
            votes[pair.negative] += 1;
        }
        margin[pair.positive] += f;
        margin[pair.negative] -= f;
    }
    let mut best = 0;
    for c in 1..m.n_classes {
        if votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]) {
            best = c;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TrainingMatrix {
        TrainingMatrix::new(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![3.0, 3.0], vec![3.0, 2.0]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let tm = toy();
        let m = svm_train(&tm, 1.0, 1e-3).unwrap();
        for (r, &l) in tm.rows().iter().zip(tm.labels()) {
            assert_eq!(svm_predict(&m, r).unwrap(), l);
        }
        let pair = &m.pairs[0];
        let sum: f64 = pair.support.iter().map(|&(i, a)| a * if tm.labels()[i] == 0 { 1.0 } else { -1.0 }).sum();
        assert!(sum.abs() < 1e-9);
        assert!(pair.converged);
    }

    #[test]
    fn duplicating_rows_keeps_predictions() {
        // wide margin relative to C so no multiplier reaches the bound
        let rows = vec![vec![0.0, 0.0], vec![0.1, 0.2], vec![1.0, 1.0], vec![0.9, 0.8]];
        let labels = vec![0, 0, 1, 1];
        let tm = TrainingMatrix::new(rows.clone(), labels.clone(), 2).unwrap();
        let tm2 = TrainingMatrix::new(
            rows.iter().chain(&rows).cloned().collect(),
            labels.iter().chain(&labels).copied().collect(),
            2,
        )
        .unwrap();
        let (a, b) = (svm_train(&tm, 10.0, 1e-6).unwrap(), svm_train(&tm2, 10.0, 1e-6).unwrap());
        for i in 0..=20 {
            for j in 0..=20 {
                let q = [i as f64 / 20.0, j as f64 / 20.0];
                let (fa, fb) = (a.pairs[0].decision(&a.scaler.apply(&q)), b.pairs[0].decision(&b.scaler.apply(&q)));
                assert!((fa - fb).abs() < 1e-4, "{fa} vs {fb}");
                assert_eq!(svm_predict(&a, &q).unwrap(), svm_predict(&b, &q).unwrap());
            }
        }
    }

    #[test]
    fn identical_rows_fall_back_to_majority() {
        let tm = TrainingMatrix::new(vec![vec![1.0, 2.0]; 5], vec![1, 0, 1, 1, 0], 2).unwrap();
        let m = svm_train(&tm, 1.0, 1e-3).unwrap();
        assert_eq!(svm_predict(&m, &[1.0, 2.0]).unwrap(), 1);
        assert_eq!(svm_predict(&m, &[-4.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn three_classes_one_vs_one() {
        let tm = TrainingMatrix::new(
            vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![1.0, 0.0], vec![0.9, 0.1], vec![0.0, 1.0], vec![0.1, 0.9]],
            vec![0, 0, 1, 1, 2, 2],
            3,
        )
        .unwrap();
        let m = svm_train(&tm, 10.0, 1e-3).unwrap();
        assert_eq!(m.pairs.len(), 3);
        for (r, &l) in tm.rows().iter().zip(tm.labels()) {
            assert_eq!(svm_predict(&m, r).unwrap(), l);
        }
    }

    #[test]
    fn errors() {
        let single = TrainingMatrix::new(vec![vec![1.0], vec![2.0]], vec![0, 0], 2).unwrap();
        assert!(svm_train(&single, 1.0, 1e-3).is_err());
        let m = svm_train(&toy(), 1.0, 1e-3).unwrap();
        assert!(svm_predict(&m, &[f64::INFINITY, 0.0]).is_err());
        assert!(svm_predict(&m, &[0.0]).is_err());
    }
}
