//! Cross-validation harness, accuracy aggregation and significance tests.

mod experiment;
mod output;
mod report;
mod stats;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::seeds;

pub use experiment::{instance_features, run_experiment, FeatureSpec, FoldObserver, Learner};
pub use output::{diff_csv, diff_svg, report_csv, summary_markdown, PARAMETER_NOTE};
pub use report::{recount, EvalReport, GroupResult, Prediction, TermResult};
pub use stats::{
    ci95, ci95_with, diff_report, randomization_test, randomization_test_with, RandomizationMode, SdKind,
};

pub const DEFAULT_FOLDS: usize = 10;

/// Fold index for every dataset instance, in dataset order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, instance: usize) -> usize {
        self.assignment[instance]
    }
}

pub fn make_folds(d: &Dataset, seed: u64) -> FoldPlan {
    make_folds_k(d, DEFAULT_FOLDS, seed)
}

/// Stratified assignment: within each term, the instances of each sense are
/// shuffled and dealt round-robin, the dealing position carrying over from
/// one sense to the next so term folds stay balanced too.
pub fn make_folds_k(d: &Dataset, k: usize, seed: u64) -> FoldPlan {
    let k = k.max(1);
    let mut assignment = vec![0; d.instances().len()];
    for (term, idx) in d.instances_by_term() {
        let mut rng = seeds::rng(seed, &format!("folds/{term}"));
        let senses = d.inventory().senses(term).unwrap_or(&[]);
        let mut next = 0;
        for sense in senses {
            let mut members: Vec<usize> = idx.iter().copied().filter(|&i| &d.instances()[i].sense == sense).collect();
            members.shuffle(&mut rng);
            for i in members {
                assignment[i] = next;
                next = (next + 1) % k;
            }
        }
    }
    FoldPlan { seed, k, assignment }
}
