use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::{seeds, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdKind {
    /// `N - 1` denominator.
    #[default]
    Sample,
    Population,
}

/// `mean +/- 1.96 sd / sqrt(N)` with the sample standard deviation.
pub fn ci95(values: &[f64]) -> Result<(f64, f64)> {
    ci95_with(values, SdKind::Sample)
}

pub fn ci95_with(values: &[f64], sd: SdKind) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::pre(format!("confidence interval needs at least two values, got {n}")));
    }
    let nf = n as f64;
    // shifted by the first value so that identical inputs give exactly zero spread
    let shift = values[0];
    let mean_dev = values.iter().map(|v| v - shift).sum::<f64>() / nf;
    let mean = shift + mean_dev;
    let ss: f64 = values.iter().map(|v| (v - shift - mean_dev).powi(2)).sum();
    let var = match sd {
        SdKind::Sample => ss / (nf - 1.0),
        SdKind::Population => ss / nf,
    };
    let half = 1.96 * var.sqrt() / nf.sqrt();
    Ok((mean - half, mean + half))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomizationMode {
    /// Exhaustive for up to 20 pairs, Monte Carlo beyond.
    #[default]
    Auto,
    Exhaustive,
    MonteCarlo,
}

const EXHAUSTIVE_LIMIT: usize = 20;

/// Two-sided paired randomization test on the mean difference.
pub fn randomization_test(a: &[f64], b: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    randomization_test_with(a, b, RandomizationMode::Auto, iterations, seed)
}

/// p-value: the fraction of sign-flip patterns of the paired differences
/// whose |mean| reaches the observed |mean|.
pub fn randomization_test_with(
    a: &[f64],
    b: &[f64],
    mode: RandomizationMode,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::pre("randomization test needs at least one pair"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let observed = diffs.iter().sum::<f64>().abs();
    // sums are compared instead of means; the tolerance absorbs summation-order rounding
    let threshold = observed - 1e-12 * (1.0 + observed);
    let exhaustive = match mode {
        RandomizationMode::Auto => n <= EXHAUSTIVE_LIMIT,
        RandomizationMode::Exhaustive => {
            if n > 30 {
                return Err(Error::pre(format!("exhaustive enumeration of 2^{n} patterns")));
            }
            true
        }
        RandomizationMode::MonteCarlo => false,
    };
    if exhaustive {
        let total = 1u64 << n;
        let mut hits = 0u64;
        for mask in 0..total {
            let s: f64 = diffs
                .iter()
                .enumerate()
                .map(|(i, d)| if mask >> i & 1 == 1 { -d } else { *d })
                .sum();
            if s.abs() >= threshold {
                hits += 1;
            }
        }
        Ok(hits as f64 / total as f64)
    } else {
        if iterations == 0 {
            return Err(Error::pre("Monte Carlo randomization needs at least one iteration"));
        }
        let mut rng = seeds::rng(seed, "randomization");
        let mut hits = 0usize;
        for _ in 0..iterations {
            let s: f64 = diffs.iter().map(|d| if rng.gen::<bool>() { -d } else { *d }).sum();
            if s.abs() >= threshold {
                hits += 1;
            }
        }
        Ok(hits as f64 / iterations as f64)
    }
}

/// Per-term `acc1 - acc2`, sorted descending (ties by term name).
pub fn diff_report(r1: &EvalReport, r2: &EvalReport) -> Result<Vec<(String, f64)>> {
    let t1: BTreeSet<&str> = r1.terms.iter().map(|t| t.term.as_str()).collect();
    let t2: BTreeSet<&str> = r2.terms.iter().map(|t| t.term.as_str()).collect();
    if t1 != t2 {
        let only: Vec<&&str> = t1.symmetric_difference(&t2).take(5).collect();
        return Err(Error::pre(format!("reports cover different terms, e.g. {only:?}")));
    }
    let mut out: Vec<(String, f64)> = r1
        .terms
        .iter()
        .map(|t| {
            let other = r2.terms.iter().find(|u| u.term == t.term).expect("same term set");
            (t.term.clone(), t.accuracy - other.accuracy)
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn ci_examples() {
        let (lo, hi) = ci95(&[0.7, 0.7, 0.7]).unwrap();
        assert_eq!(lo, hi);
        let (lo, hi) = ci95(&[0.0, 1.0]).unwrap();
        let half = 1.96 * 0.5f64.sqrt() / 2.0f64.sqrt();
        assert!((half - 0.98).abs() < 1e-12);
        assert!((lo - (0.5 - half)).abs() < 1e-15 && (hi - (0.5 + half)).abs() < 1e-15);
        assert!(ci95(&[1.0]).is_err());
        let (plo, _) = ci95_with(&[0.0, 1.0], SdKind::Population).unwrap();
        assert!((plo - (0.5 - 1.96 * 0.5 / 2.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn randomization_examples() {
        let a = [0.9, 0.8, 0.7];
        assert_eq!(randomization_test(&a, &a, 1000, 1).unwrap(), 1.0);
        let p = randomization_test(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0], 1000, 1).unwrap();
        assert_eq!(p, 0.25);
        assert!(randomization_test(&[1.0], &[1.0, 2.0], 10, 1).is_err());
    }

    #[test]
    fn monte_carlo_tracks_exhaustive() {
        let mut rng = seeds::rng(77, "test");
        let a: Vec<f64> = (0..12).map(|_| rng.gen_range(0.5..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|v| v - rng.gen_range(-0.05..0.12)).collect();
        let ex = randomization_test_with(&a, &b, RandomizationMode::Exhaustive, 0, 0).unwrap();
        let mc = randomization_test_with(&a, &b, RandomizationMode::MonteCarlo, 100_000, 5).unwrap();
        assert!((ex - mc).abs() < 0.02, "{ex} vs {mc}");
    }

    proptest! {
        #[test]
        fn ci_is_symmetric(v in proptest::collection::vec(0.0f64..1.0, 2..30)) {
            let (lo, hi) = ci95(&v).unwrap();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!(((mean - lo) - (hi - mean)).abs() < 1e-12);
        }

        #[test]
        fn p_value_in_unit_interval(v in proptest::collection::vec(-1.0f64..1.0, 1..10)) {
            let zeros = vec![0.0; v.len()];
            let p = randomization_test(&v, &zeros, 100, 1).unwrap();
            prop_assert!(p > 0.0 && p <= 1.0);
        }
    }
}
