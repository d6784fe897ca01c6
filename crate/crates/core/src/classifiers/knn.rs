use serde::{Deserialize, Serialize};

use super::{check_query, TrainingMatrix};
use crate::{Error, Result};

/// Training vectors scaled to unit length (zero vectors kept and flagged)
/// with their labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub rows: Vec<Vec<f64>>,
    pub zero: Vec<bool>,
    pub labels: Vec<usize>,
}

fn unit(x: &[f64]) -> (Vec<f64>, bool) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        (x.to_vec(), true)
    } else {
        (x.iter().map(|v| v / norm).collect(), false)
    }
}

pub fn knn_train(tm: &TrainingMatrix, k: usize) -> Result<KnnModel> {
    if tm.is_empty() {
        return Err(Error::pre("KNN needs at least one training row"));
    }
    if k == 0 || k > tm.len() {
        return Err(Error::pre(format!("k = {k} must be in 1..={}", tm.len())));
    }
    let (rows, zero) = tm.rows().iter().map(|r| unit(r)).unzip();
    Ok(KnnModel {
        k,
        n_classes: tm.n_classes(),
        rows,
        zero,
        labels: tm.labels().to_vec(),
    })
}

/// Majority label among the `k` most cosine-similar training vectors.
/// Similarity ties keep training order; vote ties go to the class whose
/// best-ranked neighbour is nearest.
pub fn knn_predict(m: &KnnModel, x: &[f64]) -> Result<usize> {
    check_query(m.rows.first().map_or(0, Vec::len), x)?;
    let (q, q_zero) = unit(x);
    let mut ranked: Vec<(usize, f64)> = m
        .rows
        .iter()
        .zip(&m.zero)
        .enumerate()
        .map(|(i, (r, &z))| {
            let sim = if z || q_zero { 0.0 } else { r.iter().zip(&q).map(|(a, b)| a * b).sum() };
            (i, sim)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut votes = vec![0usize; m.n_classes];
    let mut first_rank = vec![usize::MAX; m.n_classes];
    for (rank, &(i, _)) in ranked.iter().take(m.k).enumerate() {
        let l = m.labels[i];
        votes[l] += 1;
        first_rank[l] = first_rank[l].min(rank);
    }
    let mut best = 0;
    for c in 1..m.n_classes {
        if votes[c] > votes[best] || (votes[c] == votes[best] && first_rank[c] < first_rank[best]) {
            best = c;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k1_identity() {
        let tm = TrainingMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], vec![0, 1, 2], 3).unwrap();
        let m = knn_train(&tm, 1).unwrap();
        for (r, &l) in tm.rows().iter().zip(tm.labels()) {
            assert_eq!(knn_predict(&m, r).unwrap(), l);
        }
    }

    #[test]
    fn k3_majority() {
        let tm = TrainingMatrix::new(
            vec![vec![1.0, 0.0], vec![1.0, 0.1], vec![1.0, 0.2], vec![0.0, 1.0], vec![0.1, 1.0]],
            vec![0, 0, 1, 1, 1],
            2,
        )
        .unwrap();
        let m = knn_train(&tm, 3).unwrap();
        // nearest three: labels {0, 0, 1}
        assert_eq!(knn_predict(&m, &[1.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn vote_tie_goes_to_nearest() {
        let tm = TrainingMatrix::new(vec![vec![1.0, 0.3], vec![1.0, 0.0]], vec![1, 0], 2).unwrap();
        let m = knn_train(&tm, 2).unwrap();
        assert_eq!(knn_predict(&m, &[1.0, 0.0]).unwrap(), 0);
        assert_eq!(knn_predict(&m, &[1.0, 0.3]).unwrap(), 1);
    }

    #[test]
    fn similarity_tie_keeps_training_order() {
        let tm = TrainingMatrix::new(vec![vec![2.0, 0.0], vec![1.0, 0.0]], vec![1, 0], 2).unwrap();
        let m = knn_train(&tm, 1).unwrap();
        assert_eq!(knn_predict(&m, &[3.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn errors() {
        let tm = TrainingMatrix::new(vec![vec![1.0]], vec![0], 1).unwrap();
        assert!(knn_train(&tm, 2).is_err());
        assert!(knn_train(&TrainingMatrix::new(vec![], vec![], 2).unwrap(), 1).is_err());
        let m = knn_train(&tm, 1).unwrap();
        assert!(knn_predict(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invariant_to_rescaling_one_stored_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let labels: Vec<usize> = (0..30).map(|_| rng.gen_range(0..3)).collect();
        let tm = TrainingMatrix::new(rows.clone(), labels.clone(), 3).unwrap();
        for idx in [0, 7, 29] {
            let mut scaled = rows.clone();
            scaled[idx].iter_mut().for_each(|v| *v *= 13.0);
            let tm2 = TrainingMatrix::new(scaled, labels.clone(), 3).unwrap();
            for k in [1, 3, 5] {
                let (a, b) = (knn_train(&tm, k).unwrap(), knn_train(&tm2, k).unwrap());
                for _ in 0..20 {
                    let q: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    assert_eq!(knn_predict(&a, &q).unwrap(), knn_predict(&b, &q).unwrap());
                }
            }
        }
    }
}
