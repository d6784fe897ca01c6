//! Gaussian naive Bayes, SMO linear SVM and cosine KNN.
//!
//! One classifier is trained per ambiguous word on a [`TrainingMatrix`]
//! whose columns come from a [`FeatureSpace`] fitted on training rows only.

mod container;
mod knn;
mod nb;
mod scale;
mod svm;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::textproc::SparseFeatures;
use crate::{Error, Result};

pub use container::{load_model, save_model, ModelKind, StoredModel};
pub use knn::{knn_predict, knn_train, KnnModel};
pub use nb::{nb_predict, nb_train, NbModel, NbPrediction};
pub use scale::{Normalization, Scaler};
pub use svm::{
    dual_objective, smo_solve, svm_predict, svm_train, svm_train_with, BinarySvm, SmoSolution, SvmModel, SvmParams,
};

/// Column index over feature keys. Keys unseen at fit time are dropped on projection.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    keys: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl FeatureSpace {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a SparseFeatures>) -> Self {
        let mut keys: Vec<String> = Vec::new();
        let mut index = HashMap::new();
        for row in rows {
            for (k, _) in row.iter() {
                if !index.contains_key(k) {
                    index.insert(k.to_string(), 0);
                    keys.push(k.to_string());
                }
            }
        }
        keys.sort();
        Self::from_keys(keys)
    }

    pub fn from_keys(keys: Vec<String>) -> Self {
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        FeatureSpace { keys, index }
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn project(&self, f: &SparseFeatures) -> Vec<f64> {
        let mut out = vec![0.0; self.keys.len()];
        for (k, v) in f.iter() {
            if let Some(&i) = self.index.get(k) {
                out[i] = v;
            }
        }
        out
    }
}

/// Dense training rows with class indices in `0..n_classes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMatrix {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
    dim: usize,
}

impl TrainingMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        let dim = rows.first().map_or(0, Vec::len);
        for r in &rows {
            if r.len() != dim {
                return Err(Error::Dimension { expected: dim, got: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("training row".into()));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::pre(format!("label {bad} outside 0..{n_classes}")));
        }
        Ok(TrainingMatrix {
            rows,
            labels,
            n_classes,
            dim,
        })
    }

    /// Project sparse rows through `space`.
    pub fn from_sparse(space: &FeatureSpace, rows: &[&SparseFeatures], labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let mut tm = Self::new(rows.iter().map(|r| space.project(r)).collect(), labels, n_classes)?;
        tm.dim = space.dim();
        Ok(tm)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Most frequent class, lowest index on ties.
    pub fn majority_class(&self) -> usize {
        let counts = self.class_counts();
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        best
    }
}

fn check_query(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension { expected: dim, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("query vector".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_space_projection_drops_unseen() {
        let a: SparseFeatures = [("uni:b".to_string(), 2.0), ("uni:a".to_string(), 1.0)].into_iter().collect();
        let b: SparseFeatures = [("uni:c".to_string(), 3.0)].into_iter().collect();
        let space = FeatureSpace::fit([&a]);
        assert_eq!(space.keys(), ["uni:a", "uni:b"]);
        assert_eq!(space.project(&b), vec![0.0, 0.0]);
        assert_eq!(space.project(&a), vec![1.0, 2.0]);
    }

    #[test]
    fn matrix_validation() {
        assert!(TrainingMatrix::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0, 1], 2).is_err());
        assert!(TrainingMatrix::new(vec![vec![1.0]], vec![3], 2).is_err());
        assert!(TrainingMatrix::new(vec![vec![f64::NAN]], vec![0], 2).is_err());
        let tm = TrainingMatrix::new(vec![vec![1.0]; 3], vec![1, 0, 1], 2).unwrap();
        assert_eq!(tm.majority_class(), 1);
        let tie = TrainingMatrix::new(vec![vec![1.0]; 2], vec![1, 0], 2).unwrap();
        assert_eq!(tie.majority_class(), 0);
    }
}
