//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use wsd_core::classifiers::{knn_predict, knn_train, nb_predict, nb_train, smo_solve, SvmParams};
use wsd_core::corpus::{generate_pseudoword_dataset, PseudoWordConfig};
use wsd_core::embeddings::{aggregate_avg, aggregate_sum, train_cbow, CbowConfig, CorpusDoc};
use wsd_core::eval::{
    make_folds, randomization_test_with, run_experiment, summary_markdown, FeatureSpec, Learner, Prediction,
    RandomizationMode,
};
use wsd_core::lstm::{backward, forward, LstmConfig};
use wsd_core::textproc::FeatureFamily::{self, *};
use wsd_core::{seeds, Dataset, EmbeddingModel, EvalReport, LstmParams, SenseInventory, TrainingMatrix, WordType};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

// ---------------------------------------------------------------- 1

/// `v . scores(p)` for a fixed context.
fn lstm_functional(p: &LstmParams, seq: &[Vec<f64>], v: &[f64]) -> f64 {
    let (s, _) = forward(p, seq).unwrap();
    s.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn c1_lstm_gradients() -> Outcome {
    let t0 = Instant::now();
    let mut rng = seeds::rng(2024, "acceptance/lstm-grad");
    let mut configs: Vec<(usize, usize, usize)> = Vec::new();
    for d in [2, 4, 8] {
        for t in [1, 3, 7] {
            for k in [2, 3] {
                configs.push((d, t, k));
            }
        }
    }
    while configs.len() < 25 {
        configs.push((
            *[2, 4, 8].choose(&mut rng).unwrap(),
            *[1, 3, 7].choose(&mut rng).unwrap(),
            *[2, 3].choose(&mut rng).unwrap(),
        ));
    }
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for &(d, t, k) in &configs {
        let p = LstmParams::uniform(d, k, 0.5, &mut rng);
        let seq: Vec<Vec<f64>> = (0..t).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, cache) = forward(&p, &seq).unwrap();
        let g = backward(&p, &cache, &v).unwrap();
        let analytic: Vec<(&str, Vec<f64>)> = g.fields().iter().map(|(n, f)| (*n, f.to_vec())).collect();
        for (fi, (name, grad)) in analytic.iter().enumerate() {
            for (j, &a) in grad.iter().enumerate() {
                let at = |delta: f64| {
                    let mut q = p.clone();
                    q.fields_mut()[fi].1[j] += delta;
                    lstm_functional(&q, &seq, &v)
                };
                let numeric = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-5);
                if rel >= 1e-4 {
                    return Err(format!(
                        "d={d} T={t} K={k} {name}[{j}]: analytic {a:e} vs numeric {numeric:e} (rel {rel:e})"
                    ));
                }
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    within(t0.elapsed(), 30)?;
    Ok(format!(
        "{} configurations, {checked} partial derivatives, max rel err {worst:.1e}, {:.1}s",
        configs.len(),
        t0.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

fn dual_value(q: &[Vec<f64>], a: &[f64]) -> f64 {
    let n = a.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += a[i] * a[j] * q[i][j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= c, y.a = 0}` by bisection on the multiplier.
fn project(z: &[f64], y: &[f64], c: f64, out: &mut [f64]) {
    let balance = |lam: f64| -> f64 { z.iter().zip(y).map(|(zi, yi)| yi * (zi - lam * yi).clamp(0.0, c)).sum() };
    let span = z.iter().map(|v| v.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    while hi - lo > 1e-15 * span {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = 0.5 * (lo + hi);
    for ((o, zi), yi) in out.iter_mut().zip(z).zip(y) {
        *o = (zi - lam * yi).clamp(0.0, c);
    }
}

/// Accelerated projected gradient ascent on the dual, with restarts.
fn qp_oracle(q: &[Vec<f64>], y: &[f64], c: f64) -> Vec<f64> {
    let n = y.len();
    let lip = (0..n).map(|i| q[i][i]).sum::<f64>().max(1e-12);
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut step = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut t = 1.0f64;
    let mut val = dual_value(q, &a);
    let mut still = 0;
    for _ in 0..200_000 {
        for i in 0..n {
            let g = 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>();
            step[i] = z[i] + g / lip;
        }
        project(&step, y, c, &mut next);
        let next_val = dual_value(q, &next);
        if next_val < val {
            // objective went down: restart momentum
            z.copy_from_slice(&a);
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = next.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        for i in 0..n {
            z[i] = next[i] + (t - 1.0) / t_next * (next[i] - a[i]);
        }
        a.copy_from_slice(&next);
        t = t_next;
        val = next_val;
        still = if moved < 1e-13 { still + 1 } else { 0 };
        if still >= 50 {
            break;
        }
    }
    a
}

fn c2_smo() -> Outcome {
    let t0 = Instant::now();
    let mut rng = seeds::rng(7, "acceptance/smo");
    let mut max_gap: f64 = 0.0;
    let mut smo_time = Duration::ZERO;
    for prob in 0..50 {
        let n = rng.gen_range(4..=12);
        let dim = rng.gen_range(2..=4);
        let c = *[0.1, 1.0, 10.0].choose(&mut rng).unwrap();
        let mut y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        y.shuffle(&mut rng);
        let shift = rng.gen_range(0.0..1.5);
        let x: Vec<Vec<f64>> = y
            .iter()
            .map(|&yi| (0..dim).map(|_| rng.gen_range(-1.0..1.0) + yi * shift).collect())
            .collect();
        let q: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| y[i] * y[j] * x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>()).collect())
            .collect();

        let ts = Instant::now();
        let sol = smo_solve(&x, &y, c, 1e-3, 0);
        smo_time += ts.elapsed();
        check(sol.converged, || format!("problem {prob}: SMO did not converge"))?;
        for (i, &a) in sol.alpha.iter().enumerate() {
            check((0.0..=c).contains(&a), || format!("problem {prob}: alpha[{i}] = {a} outside [0, {c}]"))?;
        }
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
        check(balance.abs() < 1e-9, || format!("problem {prob}: sum alpha y = {balance}"))?;

        let oracle = qp_oracle(&q, &y, c);
        let (w_smo, w_or) = (dual_value(&q, &sol.alpha), dual_value(&q, &oracle));
        check((w_smo - w_or).abs() < 1e-4, || {
            format!("problem {prob} (n={n}, C={c}): SMO dual {w_smo} vs oracle {w_or}")
        })?;
        max_gap = max_gap.max((w_smo - w_or).abs());

        for i in 0..n {
            let f: f64 = (0..n)
                .map(|j| sol.alpha[j] * y[j] * x[j].iter().zip(&x[i]).map(|(a, b)| a * b).sum::<f64>())
                .sum::<f64>()
                + sol.b;
            let m = y[i] * f;
            let a = sol.alpha[i];
            let tol = 1e-3;
            let ok = if a <= 0.0 {
                m >= 1.0 - tol
            } else if a >= c {
                m <= 1.0 + tol
            } else {
                (m - 1.0).abs() <= tol
            };
            check(ok, || format!("problem {prob}: KKT violated at {i}: alpha {a}, y f(x) {m}"))?;
        }
    }
    within(smo_time, 10)?;
    Ok(format!(
        "50 problems, max |dual - oracle| {max_gap:.1e}, SMO {:.3}s (oracle included {:.1}s)",
        smo_time.as_secs_f64(),
        t0.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 3

fn c3_naive_bayes() -> Outcome {
    let mut rng = seeds::rng(3, "acceptance/nb");
    let mut worst: f64 = 0.0;
    for set in 0..100 {
        let k = rng.gen_range(2..=4);
        let dim = rng.gen_range(1..=6);
        let n = rng.gen_range(k..=30);
        let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        labels.shuffle(&mut rng);
        let constant_col = rng.gen_bool(0.2).then(|| rng.gen_range(0..dim));
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&l| {
                (0..dim)
                    .map(|j| if Some(j) == constant_col { 2.0 } else { rng.gen_range(-3.0..3.0) + l as f64 })
                    .collect()
            })
            .collect();
        let tm = TrainingMatrix::new(rows.clone(), labels.clone(), k).unwrap();
        let model = nb_train(&tm).unwrap();

        // oracle: population statistics per class, floored variances
        let count = |c: usize| labels.iter().filter(|&&l| l == c).count() as f64;
        let column = |j: usize, c: Option<usize>| -> Vec<f64> {
            rows.iter().zip(&labels).filter(|(_, &l)| c.is_none_or(|c| c == l)).map(|(r, _)| r[j]).collect()
        };
        let var_of = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
        };
        let largest = (0..dim).map(|j| var_of(&column(j, None))).fold(0.0, f64::max);
        let floor = 1e-9 * (largest + 1e-9);
        for _ in 0..5 {
            let x: Vec<f64> = (0..dim)
                .map(|j| if Some(j) == constant_col { 2.0 } else { rng.gen_range(-4.0..5.0) })
                .collect();
            let joint: Vec<f64> = (0..k)
                .map(|c| {
                    let mut s = (count(c) / n as f64).ln();
                    for j in 0..dim {
                        let xs = column(j, Some(c));
                        let mu = xs.iter().sum::<f64>() / xs.len() as f64;
                        let var = var_of(&xs).max(floor);
                        let norm = (2.0 * std::f64::consts::PI * var).sqrt();
                        let density = (-(x[j] - mu).powi(2) / (2.0 * var)).exp() / norm;
                        // direct density where representable, its closed-form log otherwise
                        s += if density > 0.0 { density.ln() } else { -(x[j] - mu).powi(2) / (2.0 * var) - norm.ln() };
                    }
                    s
                })
                .collect();
            let total = joint.iter().map(|s| s.exp()).sum::<f64>();
            let got = nb_predict(&model, &x).unwrap();
            for c in 0..k {
                let expect = if total > 0.0 && total.is_finite() {
                    joint[c] - total.ln()
                } else {
                    let m = joint.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    joint[c] - m - joint.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
                };
                let err = (got.log_posteriors[c] - expect).abs() / expect.abs().max(1.0);
                check(err <= 1e-9, || {
                    format!("dataset {set}, class {c}: log posterior {} vs oracle {expect}", got.log_posteriors[c])
                })?;
                worst = worst.max(err);
            }
        }
    }
    Ok(format!("100 datasets x 5 queries, max error {worst:.1e}"))
}

// ---------------------------------------------------------------- 4

fn c4_knn() -> Outcome {
    let mut rng = seeds::rng(4, "acceptance/knn");
    let mut compared = 0;
    for q in 0..100 {
        let k_classes = rng.gen_range(2..=4);
        let dim = rng.gen_range(2..=8);
        let n = rng.gen_range(6..=40);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k_classes)).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| if i == 0 { vec![0.0; dim] } else { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() })
            .collect();
        let tm = TrainingMatrix::new(rows.clone(), labels.clone(), k_classes).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for k in [1, 3, 5] {
            let m = knn_train(&tm, k).unwrap();
            let got = knn_predict(&m, &x).unwrap();

            // exhaustive scan: cosine similarity, zero vectors similarity 0
            let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let sims: Vec<f64> = rows
                .iter()
                .map(|r| {
                    let nn = norm(r) * norm(&x);
                    if nn == 0.0 {
                        0.0
                    } else {
                        r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / nn
                    }
                })
                .collect();
            let mut taken = vec![false; n];
            let mut votes = vec![0usize; k_classes];
            let mut first = vec![usize::MAX; k_classes];
            for rank in 0..k {
                let mut best = usize::MAX;
                for i in 0..n {
                    if !taken[i] && (best == usize::MAX || sims[i] > sims[best]) {
                        best = i;
                    }
                }
                taken[best] = true;
                votes[labels[best]] += 1;
                first[labels[best]] = first[labels[best]].min(rank);
            }
            let top = *votes.iter().max().unwrap();
            let expect = (0..k_classes).filter(|&c| votes[c] == top).min_by_key(|&c| first[c]).unwrap();
            check(got == expect, || format!("query {q}, k={k}: predicted {got}, exhaustive scan {expect}"))?;
            compared += 1;
        }
    }
    Ok(format!("100 queries x k in {{1,3,5}}: {compared} predictions equal"))
}

// ---------------------------------------------------------------- 5

fn c5_cbow_geometry() -> Outcome {
    let t0 = Instant::now();
    let mut rng = seeds::rng(5, "acceptance/cbow");
    let topics: Vec<Vec<String>> = ["a", "b"]
        .iter()
        .map(|t| (0..25).map(|i| format!("{t}{i}")).collect())
        .collect();
    let mut docs = Vec::new();
    let mut tokens = 0;
    while tokens < 60_000 {
        let t = docs.len() % 2;
        let doc: Vec<String> = (0..60).map(|_| topics[t].choose(&mut rng).unwrap().clone()).collect();
        tokens += doc.len();
        docs.push(CorpusDoc {
            id: format!("d{}", docs.len()),
            tokens: doc,
        });
    }
    let cfg = CbowConfig {
        dim: 30,
        window: 5,
        epochs: 5,
        seed: 11,
        ..CbowConfig::default()
    };
    let (m, stats) = train_cbow(&docs, &cfg, &HashSet::new()).map_err(|e| e.to_string())?;
    let losses = &stats.epoch_losses;
    check(losses.windows(2).all(|w| w[1] < w[0]), || format!("loss not decreasing: {losses:?}"))?;

    let (mut within_sum, mut within_n, mut cross_sum, mut cross_n) = (0.0, 0, 0.0, 0);
    let words: Vec<(usize, &String)> = topics.iter().enumerate().flat_map(|(t, ws)| ws.iter().map(move |w| (t, w))).collect();
    for (i, (ti, wi)) in words.iter().enumerate() {
        for (tj, wj) in &words[i + 1..] {
            let cos = m.lookup(wi).unwrap().cosine(&m.lookup(wj).unwrap());
            if ti == tj {
                within_sum += cos;
                within_n += 1;
            } else {
                cross_sum += cos;
                cross_n += 1;
            }
        }
    }
    let (within_mean, cross_mean) = (within_sum / within_n as f64, cross_sum / cross_n as f64);
    check(within_mean - cross_mean >= 0.2, || {
        format!("within {within_mean:.3} vs cross {cross_mean:.3}")
    })?;
    within(t0.elapsed(), 60)?;
    Ok(format!(
        "{tokens} tokens: within-topic {within_mean:.3}, cross-topic {cross_mean:.3}; loss {:.3} -> {:.3}; {:.1}s",
        losses[0],
        losses[losses.len() - 1],
        t0.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 6

fn c6_aggregation() -> Outcome {
    let mut rng = seeds::rng(6, "acceptance/aggregate");
    let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let docs: Vec<CorpusDoc> = (0..50)
        .map(|i| CorpusDoc {
            id: i.to_string(),
            tokens: (0..30).map(|_| words.choose(&mut rng).unwrap().clone()).collect(),
        })
        .collect();
    let cfg = CbowConfig {
        dim: 16,
        epochs: 1,
        ..CbowConfig::default()
    };
    let (m, _) = train_cbow(&docs, &cfg, &HashSet::new()).map_err(|e| e.to_string())?;
    for trial in 0..200 {
        let len = rng.gen_range(1..=25);
        let ctx: Vec<String> = (0..len)
            .map(|_| if rng.gen_bool(0.1) { "oov".to_string() } else { words.choose(&mut rng).unwrap().clone() })
            .collect();
        let refs: Vec<&str> = ctx.iter().map(String::as_str).collect();
        let (s, a) = (aggregate_sum(&m, &refs), aggregate_avg(&m, &refs));
        let n = refs.iter().filter(|w| m.lookup(w).is_some()).count();
        check(s.in_vocab == n && a.in_vocab == n, || format!("trial {trial}: in-vocab count"))?;
        for (i, (sv, av)) in s.vector.0.iter().zip(&a.vector.0).enumerate() {
            let expect = if n == 0 { 0.0 } else { sv / n as f64 };
            check(av.to_bits() == expect.to_bits(), || format!("trial {trial}, dim {i}: avg {av} vs sum/n {expect}"))?;
        }
    }
    for w in &words {
        let Some(v) = m.lookup(w) else { continue };
        for agg in [aggregate_sum(&m, &[w.as_str()]), aggregate_avg(&m, &[w.as_str()])] {
            let same = agg.vector.0.iter().zip(&v.0).all(|(a, b)| a.to_bits() == b.to_bits());
            check(same, || format!("single-word context `{w}` differs from its lookup vector"))?;
        }
    }
    Ok("200 random contexts: avg == sum/n bitwise; single-word contexts equal lookups bitwise".into())
}

// ---------------------------------------------------------------- 7

fn c7_randomization() -> Outcome {
    let mut rng = seeds::rng(8, "acceptance/randomization");
    let mut worst: f64 = 0.0;
    for trial in 0..5 {
        let a: Vec<f64> = (0..12).map(|_| rng.gen_range(0.6..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| x - rng.gen_range(-0.05..0.08)).collect();
        let ex = randomization_test_with(&a, &b, RandomizationMode::Exhaustive, 0, 0).map_err(|e| e.to_string())?;
        let mc = randomization_test_with(&a, &b, RandomizationMode::MonteCarlo, 100_000, trial).map_err(|e| e.to_string())?;
        check((ex - mc).abs() <= 0.02, || format!("trial {trial}: exhaustive {ex} vs Monte Carlo {mc}"))?;
        worst = worst.max((ex - mc).abs());
    }
    let p3 = randomization_test_with(&[0.9, 0.8, 0.7], &[0.5, 0.6, 0.65], RandomizationMode::Exhaustive, 0, 0)
        .map_err(|e| e.to_string())?;
    check(p3 == 0.25, || format!("N=3 all-positive p = {p3}"))?;
    Ok(format!("N=12: max |exhaustive - MC| {worst:.4} over 5 trials; N=3 p = {p3}"))
}

// ---------------------------------------------------------------- 8

/// Macro and micro accuracy recomputed from raw predictions.
fn brute_recount(preds: &[Prediction]) -> (f64, f64) {
    let mut per: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
    for p in preds {
        let e = per.entry(&p.term).or_default();
        e.1 += 1;
        e.0 += u32::from(p.gold == p.predicted);
    }
    let macro_acc = per.values().map(|&(c, t)| f64::from(c) / f64::from(t)).sum::<f64>() / per.len() as f64;
    let (c, t) = per.values().fold((0, 0), |acc, &(c, t)| (acc.0 + c, acc.1 + t));
    (macro_acc, f64::from(c) / f64::from(t))
}

fn audit(r: &EvalReport) -> Result<(), String> {
    r.verify().map_err(|e| e.to_string())?;
    let (ma, mi) = brute_recount(&r.predictions);
    check((ma - r.macro_accuracy).abs() < 1e-12 && (mi - r.micro_accuracy).abs() < 1e-12, || {
        format!("{}/{}: report {} {} vs recount {ma} {mi}", r.features, r.learner, r.macro_accuracy, r.micro_accuracy)
    })
}

fn c8_accounting(runs: &[EvalReport]) -> Outcome {
    let mut inv = SenseInventory::default();
    inv.insert("easy", vec!["A".into(), "B".into()], WordType::T).unwrap();
    inv.insert("hard", vec!["A".into(), "B".into()], WordType::A).unwrap();
    let mut preds = Vec::new();
    for i in 0..10 {
        preds.push(Prediction {
            instance: format!("e{i}"),
            term: "easy".into(),
            fold: i % 10,
            gold: "A".into(),
            predicted: "A".into(),
        });
    }
    for i in 0..30 {
        preds.push(Prediction {
            instance: format!("h{i}"),
            term: "hard".into(),
            fold: i % 10,
            gold: "A".into(),
            predicted: if i % 2 == 0 { "A".into() } else { "B".into() },
        });
    }
    let r = EvalReport::from_predictions("f", "l", 0, serde_json::Value::Null, preds, &inv, &BTreeMap::new())
        .map_err(|e| e.to_string())?;
    check(r.macro_accuracy == 0.75 && r.micro_accuracy == 0.625, || {
        format!("two-term example gave macro {} micro {}", r.macro_accuracy, r.micro_accuracy)
    })?;
    audit(&r)?;
    for run in runs {
        audit(run)?;
    }
    Ok(format!(
        "two-term example 0.75 / 0.625; {} experiment reports match a brute-force recount",
        runs.len()
    ))
}

// ---------------------------------------------------------------- 9

struct EndToEnd {
    reports: Vec<EvalReport>,
    elapsed: Duration,
}

fn synthetic_embeddings(cfg: &PseudoWordConfig, cbow_seed: u64) -> (Dataset, EmbeddingModel) {
    let g = generate_pseudoword_dataset(cfg).unwrap();
    let docs: Vec<CorpusDoc> = g.background.iter().map(CorpusDoc::from_citation).collect();
    let exclude: HashSet<String> = g.dataset.citations().iter().map(|c| c.id.clone()).collect();
    let cbow = CbowConfig {
        dim: 50,
        epochs: 15,
        seed: cbow_seed,
        ..CbowConfig::default()
    };
    let (m, _) = train_cbow(&docs, &cbow, &exclude).unwrap();
    (g.dataset, m)
}

fn lstm_learner() -> Learner {
    Learner::Lstm {
        cfg: LstmConfig {
            epochs: 5,
            window: Some(10),
            ..LstmConfig::default()
        },
        pretrain: None,
    }
}

fn grid() -> Vec<(Vec<FeatureFamily>, Learner)> {
    let svm = Learner::Svm(SvmParams::default());
    vec![
        (vec![Unigrams], Learner::Majority),
        (vec![Unigrams], svm.clone()),
        (vec![WeSum], svm.clone()),
        (vec![WeAvg], svm.clone()),
        (vec![Unigrams, WeAvg], svm),
        (vec![Unigrams], Learner::NaiveBayes),
        (vec![Unigrams], Learner::Knn { k: 1 }),
        (vec![Unigrams], Learner::Knn { k: 3 }),
        (vec![Unigrams], Learner::Knn { k: 5 }),
        (vec![], lstm_learner()),
    ]
}

fn run_grid(d: &Dataset, m: &Arc<EmbeddingModel>, cells: &[(Vec<FeatureFamily>, Learner)], seed: u64) -> Vec<EvalReport> {
    let folds = make_folds(d, seed);
    cells
        .iter()
        .map(|(fams, learner)| {
            let spec = FeatureSpec {
                families: fams.clone(),
                embeddings: Some(m.clone()),
                ..FeatureSpec::default()
            };
            run_experiment(d, &spec, learner, &folds, None).unwrap()
        })
        .collect()
}

fn end_to_end() -> EndToEnd {
    let t0 = Instant::now();
    let cfg = PseudoWordConfig::default();
    let (d, m) = synthetic_embeddings(&cfg, 3);
    let m = Arc::new(m);
    let reports = run_grid(&d, &m, &grid(), 1);
    EndToEnd {
        reports,
        elapsed: t0.elapsed(),
    }
}

fn find<'a>(rs: &'a [EvalReport], features: &str, learner: &str) -> &'a EvalReport {
    rs.iter().find(|r| r.features == features && r.learner == learner).unwrap()
}

fn c9_end_to_end(e: &EndToEnd) -> Outcome {
    let rs = &e.reports;
    let pct = |r: &EvalReport| 100.0 * r.macro_accuracy;
    let (sum, avg) = (find(rs, "we-sum", "svm"), find(rs, "we-avg", "svm"));
    let (uni, combo) = (find(rs, "unigrams", "svm"), find(rs, "unigrams+we-avg", "svm"));
    let majority = find(rs, "unigrams", "majority");
    check(pct(avg) >= pct(sum), || format!("(a) we-avg SVM {:.2} < we-sum SVM {:.2}", pct(avg), pct(sum)))?;
    let best_single = pct(uni).max(pct(avg)).max(pct(sum));
    check(pct(combo) >= best_single - 0.5, || {
        format!("(b) unigrams+we-avg SVM {:.2} < best single {best_single:.2} - 0.5", pct(combo))
    })?;
    for r in rs.iter().filter(|r| r.learner != "majority") {
        check(r.macro_accuracy > majority.macro_accuracy, || {
            format!("(c) {}/{} {:.2} does not beat majority {:.2}", r.features, r.learner, pct(r), pct(majority))
        })?;
    }
    within(e.elapsed, 600)?;
    let table: Vec<String> = rs
        .iter()
        .map(|r| format!("{}/{} {:.2}", if r.features.is_empty() { "we-seq" } else { &r.features }, r.learner, pct(r)))
        .collect();
    Ok(format!("{:.0}s; macro %: {}", e.elapsed.as_secs_f64(), table.join(", ")))
}

// ---------------------------------------------------------------- 10

fn c10_determinism() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let cfg = PseudoWordConfig {
        n_terms: 4,
        instances_per_sense: 40,
        background_docs_per_sense: 60,
        ..PseudoWordConfig::default()
    };
    let once = || {
        pool.install(|| {
            let (d, m) = synthetic_embeddings(&cfg, 9);
            let m = Arc::new(m);
            let mut cells = grid();
            cells.push((vec![Unigrams, Bigrams, Collocations], Learner::NaiveBayes));
            let reports = run_grid(&d, &m, &cells, 17);
            (m, reports)
        })
    };
    let (m1, r1) = once();
    let (m2, r2) = once();
    let same_vectors = m1.vectors().iter().zip(m2.vectors()).all(|(a, b)| a.to_bits() == b.to_bits());
    check(same_vectors && m1.vocab() == m2.vocab(), || "embedding vectors differ between runs".into())?;
    for (a, b) in r1.iter().zip(&r2) {
        let same = a.macro_accuracy.to_bits() == b.macro_accuracy.to_bits()
            && a.micro_accuracy.to_bits() == b.micro_accuracy.to_bits()
            && a.terms.iter().zip(&b.terms).all(|(x, y)| x.accuracy.to_bits() == y.accuracy.to_bits())
            && a.ci95.map(|(l, h)| (l.to_bits(), h.to_bits())) == b.ci95.map(|(l, h)| (l.to_bits(), h.to_bits()))
            && a.predictions == b.predictions
            && serde_json::to_string(a).unwrap() == serde_json::to_string(b).unwrap();
        check(same, || format!("{}/{} differs between runs", a.features, a.learner))?;
    }
    Ok(format!("{} reports and the embedding model reproduced bit-exactly", r1.len()))
}

// ---------------------------------------------------------------- 11

fn c11_parameters(e: &EndToEnd) -> Outcome {
    for d in (1..=12).chain([50, 100, 500]) {
        let p = LstmParams::zeros(d, 2);
        let counted: usize = p.fields().iter().map(|(_, f)| f.len()).sum();
        let expect = 8 * d * d + 9 * d + 2;
        check(p.num_parameters() == expect && counted == expect, || {
            format!("d={d}: {} parameters, expected {expect}", p.num_parameters())
        })?;
    }
    let peepholes = LstmParams::zeros(100, 2);
    check(peepholes.w_ci.len() == 100 && peepholes.w_cf.len() == 100 && peepholes.w_co.len() == 100, || {
        "peepholes are not diagonal".into()
    })?;
    let lstm = e.reports.iter().find(|r| r.learner == "lstm").ok_or("no LSTM report")?;
    let md = summary_markdown(&[lstm], "acceptance");
    check(md.contains("80,902") && md.contains("81,002"), || "report footer lacks the parameter note".into())?;
    Ok(format!("8d^2+9d+2 for d in 1..=12, 50, 100, 500; d=100 -> {}; footer documents 81,002", peepholes.num_parameters()))
}

// ----------------------------------------------------------------

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = t.elapsed().as_secs_f64();
    match result {
        Ok(detail) => {
            println!("criterion {id:>2} {name}: PASS ({detail}) [{secs:.1}s]");
            true
        }
        Err(why) => {
            println!("criterion {id:>2} {name}: FAIL ({why}) [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= run(1, "LSTM gradient check", c1_lstm_gradients);
    ok &= run(2, "SMO correctness", c2_smo);
    ok &= run(3, "Gaussian NB oracle", c3_naive_bayes);
    ok &= run(4, "KNN oracle", c4_knn);
    ok &= run(5, "CBOW geometry", c5_cbow_geometry);
    ok &= run(6, "aggregation identities", c6_aggregation);
    ok &= run(7, "randomization test", c7_randomization);
    let e2e = catch_unwind(end_to_end).ok();
    let runs = e2e.as_ref().map(|e| e.reports.clone()).unwrap_or_default();
    ok &= run(8, "macro/micro accounting", || c8_accounting(&runs));
    ok &= run(9, "end-to-end synthetic WSD", || c9_end_to_end(e2e.as_ref().ok_or("end-to-end run panicked")?));
    ok &= run(10, "determinism", c10_determinism);
    ok &= run(11, "parameter audit", || c11_parameters(e2e.as_ref().ok_or("end-to-end run panicked")?));
    if !ok {
        std::process::exit(1);
    }
}
