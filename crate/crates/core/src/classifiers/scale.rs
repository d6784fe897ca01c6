use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Per-feature min-max scaling onto [0, 1].
    #[default]
    MinMax,
    /// Per-feature standardisation to zero mean and unit variance.
    ZScore,
    None,
}

/// Per-feature affine map `(x - shift) * scale` fitted on training rows.
/// Constant features map to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub kind: Normalization,
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(kind: Normalization, rows: &[Vec<f64>], dim: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let (shift, scale) = match kind {
            Normalization::None => (vec![0.0; dim], vec![1.0; dim]),
            Normalization::MinMax => {
                let mut lo = vec![f64::INFINITY; dim];
                let mut hi = vec![f64::NEG_INFINITY; dim];
                for r in rows {
                    for (j, &v) in r.iter().enumerate() {
                        lo[j] = lo[j].min(v);
                        hi[j] = hi[j].max(v);
                    }
                }
                let scale = lo
                    .iter()
                    .zip(&hi)
                    .map(|(l, h)| if h > l { 1.0 / (h - l) } else { 0.0 })
                    .collect();
                let shift = lo.into_iter().map(|l| if l.is_finite() { l } else { 0.0 }).collect();
                (shift, scale)
            }
            Normalization::ZScore => {
                let mut mean = vec![0.0; dim];
                for r in rows {
                    for (m, v) in mean.iter_mut().zip(r) {
                        *m += v / n;
                    }
                }
                let mut var = vec![0.0; dim];
                for r in rows {
                    for j in 0..dim {
                        var[j] += (r[j] - mean[j]).powi(2) / n;
                    }
                }
                let scale = var.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 }).collect();
                (mean, scale)
            }
        };
        Scaler { kind, shift, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.shift.iter().zip(&self.scale))
            .map(|(v, (s, k))| (v - s) * k)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_max_maps_training_range_to_unit_interval() {
        let rows = vec![vec![1.0, 5.0, 2.0], vec![3.0, 5.0, -2.0]];
        let s = Scaler::fit(Normalization::MinMax, &rows, 3);
        assert_eq!(s.apply(&rows[0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(s.apply(&rows[1]), vec![1.0, 0.0, 0.0]);
        assert_eq!(s.apply(&[2.0, 9.0, 0.0]), vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn z_score() {
        let rows = vec![vec![1.0], vec![3.0]];
        let s = Scaler::fit(Normalization::ZScore, &rows, 1);
        assert_eq!(s.apply(&[1.0]), vec![-1.0]);
        assert_eq!(s.apply(&[3.0]), vec![1.0]);
    }
}
