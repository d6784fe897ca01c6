use super::{DenseVector, EmbeddingModel};
use crate::textproc::TokenStream;

/// An aggregated context vector. `in_vocab == 0` flags an all-OOV context,
/// in which case the vector is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub vector: DenseVector,
    pub in_vocab: usize,
}

impl Aggregate {
    pub fn is_empty(&self) -> bool {
        self.in_vocab == 0
    }
}

/// Surface forms of every token in the stream except the target occurrence.
pub fn instance_context(ts: &TokenStream, target: usize) -> Vec<&str> {
    ts.tokens
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, t)| t.surface.as_str())
        .collect()
}

/// Sum of the vectors of in-vocabulary context words; OOV words are skipped.
pub fn aggregate_sum(m: &EmbeddingModel, context: &[&str]) -> Aggregate {
    let mut acc = vec![0.0f64; m.dim()];
    let mut in_vocab = 0;
    for w in context {
        if let Some(row) = m.row(w) {
            for (a, &v) in acc.iter_mut().zip(row) {
                *a += f64::from(v);
            }
            in_vocab += 1;
        }
    }
    Aggregate {
        vector: DenseVector(acc),
        in_vocab,
    }
}

/// Mean of the vectors of in-vocabulary context words.
pub fn aggregate_avg(m: &EmbeddingModel, context: &[&str]) -> Aggregate {
    let mut agg = aggregate_sum(m, context);
    if agg.in_vocab > 0 {
        let n = agg.in_vocab as f64;
        agg.vector.0.iter_mut().for_each(|x| *x /= n);
    }
    agg
}
