//! Continuous bag-of-words training with negative sampling.
//!
//! For each position the input vectors of the words within `window` on
//! either side are averaged into `h`; `h` is scored against the output
//! vector of the centre word (label 1) and of `negatives` noise words drawn
//! from the unigram distribution raised to 0.75 (label 0). Parameters move
//! along the gradient of the logistic loss with a linearly decaying rate.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmbeddingMeta, EmbeddingModel, VocabEntry};
use crate::corpus::Citation;
use crate::textproc::tokenize_citation;
use crate::{seeds, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CbowConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub seed: u64,
    pub learning_rate: f64,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub subsample: f64,
    /// 1 trains deterministically; more threads share weights without locks.
    pub threads: usize,
}

impl Default for CbowConfig {
    fn default() -> Self {
        CbowConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 1,
            seed: 1,
            learning_rate: 0.025,
            subsample: 0.0,
            threads: 1,
        }
    }
}

/// A tokenized training document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

impl CorpusDoc {
    pub fn from_citation(c: &Citation) -> Self {
        CorpusDoc {
            id: c.id.clone(),
            tokens: tokenize_citation(c).tokens.into_iter().map(|t| t.surface).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Mean negative-sampling loss per trained position, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub docs_used: usize,
    pub docs_excluded: usize,
    /// In-vocabulary tokens seen per epoch.
    pub tokens_per_epoch: u64,
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Weight table access shared by the deterministic and lock-free trainers.
trait Table {
    fn read(&self, base: usize, out: &mut [f32]);
    fn axpy(&mut self, base: usize, a: f32, x: &[f32]);
}

impl Table for &mut [f32] {
    fn read(&self, base: usize, out: &mut [f32]) {
        out.copy_from_slice(&self[base..base + out.len()]);
    }

    fn axpy(&mut self, base: usize, a: f32, x: &[f32]) {
        for (w, v) in self[base..base + x.len()].iter_mut().zip(x) {
            *w += a * v;
        }
    }
}

struct Shared<'a>(&'a [AtomicU32]);

impl Table for Shared<'_> {
    fn read(&self, base: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(&self.0[base..]) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    // Racy read-modify-write: concurrent updates may be lost, which is the
    // accepted behaviour of lock-free word2vec training.
    fn axpy(&mut self, base: usize, a: f32, x: &[f32]) {
        for (w, v) in self.0[base..base + x.len()].iter().zip(x) {
            let cur = f32::from_bits(w.load(Ordering::Relaxed));
            w.store((cur + a * v).to_bits(), Ordering::Relaxed);
        }
    }
}

struct Scratch {
    h: Vec<f32>,
    grad_h: Vec<f32>,
    out: Vec<f32>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            h: vec![0.0; dim],
            grad_h: vec![0.0; dim],
            out: vec![0.0; dim],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn step<T: Table>(
    input: &mut T,
    output: &mut T,
    dim: usize,
    context: &[usize],
    target: usize,
    negatives: &[usize],
    alpha: f32,
    s: &mut Scratch,
) -> f64 {
    s.h.fill(0.0);
    for &c in context {
        input.read(c * dim, &mut s.out);
        for (h, v) in s.h.iter_mut().zip(&s.out) {
            *h += v;
        }
    }
    let inv = 1.0 / context.len() as f32;
    s.h.iter_mut().for_each(|h| *h *= inv);
    s.grad_h.fill(0.0);

    let mut loss = 0.0;
    let labelled = std::iter::once((target, 1.0f32)).chain(negatives.iter().filter(|&&n| n != target).map(|&n| (n, 0.0)));
    for (w, label) in labelled {
        output.read(w * dim, &mut s.out);
        let score: f32 = s.h.iter().zip(&s.out).map(|(a, b)| a * b).sum();
        loss += if label > 0.5 {
            softplus(-f64::from(score))
        } else {
            softplus(f64::from(score))
        };
        let g = (label - sigmoid(score)) * alpha;
        for (e, v) in s.grad_h.iter_mut().zip(&s.out) {
            *e += g * v;
        }
        output.axpy(w * dim, g, &s.h);
    }
    // d h / d input_c = 1 / |context|
    for &c in context {
        input.axpy(c * dim, inv, &s.grad_h);
    }
    loss
}

/// One stochastic update for a single centre word. `input` and `output`
/// are `|V| x dim` row-major tables; returns the loss before the update.
pub fn cbow_update(
    input: &mut [f32],
    output: &mut [f32],
    dim: usize,
    context: &[usize],
    target: usize,
    negatives: &[usize],
    alpha: f32,
) -> f64 {
    let mut s = Scratch::new(dim);
    let (mut i, mut o) = (input, output);
    step(&mut i, &mut o, dim, context, target, negatives, alpha, &mut s)
}

struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(vocab: &[VocabEntry]) -> Self {
        let mut acc = 0.0;
        let cumulative = vocab
            .iter()
            .map(|e| {
                acc += (e.count as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let r = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= r).min(self.cumulative.len() - 1)
    }
}

struct Prepared {
    vocab: Vec<VocabEntry>,
    docs: Vec<Vec<usize>>,
    excluded: usize,
}

fn prepare(docs: &[CorpusDoc], cfg: &CbowConfig, exclude: &HashSet<String>) -> Result<Prepared> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut excluded = 0;
    let kept: Vec<&CorpusDoc> = docs
        .iter()
        .filter(|d| {
            let skip = exclude.contains(&d.id);
            excluded += usize::from(skip);
            !skip
        })
        .collect();
    for d in &kept {
        for t in &d.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<VocabEntry> = counts
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_count)
        .map(|(w, count)| VocabEntry {
            word: w.to_string(),
            count,
        })
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    vocab.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, e)| (e.word.as_str(), i)).collect();
    let encoded = kept
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    Ok(Prepared {
        vocab,
        docs: encoded,
        excluded,
    })
}

struct EpochCtx<'a> {
    cfg: &'a CbowConfig,
    noise: &'a NoiseTable,
    keep_prob: &'a [f64],
    total_steps: f64,
}

impl EpochCtx<'_> {
    fn alpha(&self, processed: u64) -> f32 {
        let frac = 1.0 - processed as f64 / (self.total_steps + 1.0);
        (self.cfg.learning_rate * frac.max(1e-4)) as f32
    }

    /// Train over `docs`; returns (loss sum, trained positions).
    fn run<T: Table>(
        &self,
        docs: &[&Vec<usize>],
        input: &mut T,
        output: &mut T,
        rng: &mut ChaCha8Rng,
        processed: &AtomicU64,
    ) -> (f64, u64) {
        let dim = self.cfg.dim;
        let mut scratch = Scratch::new(dim);
        let mut context = Vec::with_capacity(2 * self.cfg.window);
        let mut negatives = Vec::with_capacity(self.cfg.negatives);
        let mut kept = Vec::new();
        let (mut loss, mut n) = (0.0, 0);
        for doc in docs {
            kept.clear();
            if self.cfg.subsample > 0.0 {
                kept.extend(doc.iter().copied().filter(|&w| rng.gen::<f64>() < self.keep_prob[w]));
            } else {
                kept.extend_from_slice(doc);
            }
            for t in 0..kept.len() {
                let p = processed.fetch_add(1, Ordering::Relaxed);
                let lo = t.saturating_sub(self.cfg.window);
                let hi = (t + self.cfg.window + 1).min(kept.len());
                context.clear();
                context.extend((lo..hi).filter(|&c| c != t).map(|c| kept[c]));
                negatives.clear();
                negatives.extend((0..self.cfg.negatives).map(|_| self.noise.sample(rng)));
                if context.is_empty() {
                    continue;
                }
                loss += step(input, output, dim, &context, kept[t], &negatives, self.alpha(p), &mut scratch);
                n += 1;
            }
        }
        (loss, n)
    }
}

/// Train CBOW vectors on `docs`, skipping documents whose id is in `exclude`.
pub fn train_cbow(docs: &[CorpusDoc], cfg: &CbowConfig, exclude: &HashSet<String>) -> Result<(EmbeddingModel, TrainStats)> {
    if cfg.dim == 0 || cfg.window == 0 {
        return Err(Error::pre("dim and window must be at least 1"));
    }
    let prep = prepare(docs, cfg, exclude)?;
    let dim = cfg.dim;
    let v = prep.vocab.len();
    let total_tokens: u64 = prep.docs.iter().map(|d| d.len() as u64).sum();

    let mut init_rng = seeds::rng(cfg.seed, "cbow-init");
    let mut input: Vec<f32> = (0..v * dim).map(|_| (init_rng.gen::<f32>() - 0.5) / dim as f32).collect();
    let mut output = vec![0.0f32; v * dim];

    let keep_prob: Vec<f64> = prep
        .vocab
        .iter()
        .map(|e| {
            if cfg.subsample <= 0.0 {
                return 1.0;
            }
            let thresh = cfg.subsample * total_tokens as f64;
            let c = e.count as f64;
            (((c / thresh).sqrt() + 1.0) * thresh / c).min(1.0)
        })
        .collect();
    let noise = NoiseTable::new(&prep.vocab);
    let ctx = EpochCtx {
        cfg,
        noise: &noise,
        keep_prob: &keep_prob,
        total_steps: (total_tokens * cfg.epochs as u64) as f64,
    };
    let processed = AtomicU64::new(0);
    let mut stats = TrainStats {
        docs_used: prep.docs.len(),
        docs_excluded: prep.excluded,
        tokens_per_epoch: total_tokens,
        ..TrainStats::default()
    };

    let threads = cfg.threads.max(1);
    if threads == 1 {
        let mut rng = seeds::rng(cfg.seed, "cbow-train");
        let mut shuffle = seeds::rng(cfg.seed, "cbow-shuffle");
        let mut all: Vec<&Vec<usize>> = prep.docs.iter().collect();
        for _ in 0..cfg.epochs {
            all.shuffle(&mut shuffle);
            let (mut i, mut o) = (input.as_mut_slice(), output.as_mut_slice());
            let (loss, n) = ctx.run(&all, &mut i, &mut o, &mut rng, &processed);
            stats.epoch_losses.push(loss / n.max(1) as f64);
        }
    } else {
        let shared_in: Vec<AtomicU32> = input.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let shared_out: Vec<AtomicU32> = output.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let mut shards: Vec<Vec<&Vec<usize>>> = (0..threads)
            .map(|s| prep.docs.iter().skip(s).step_by(threads).collect())
            .collect();
        let mut rngs: Vec<ChaCha8Rng> = (0..threads)
            .map(|s| seeds::rng(cfg.seed, &format!("cbow-train-{s}")))
            .collect();
        for _ in 0..cfg.epochs {
            let results: Vec<(f64, u64)> = std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter_mut()
                    .zip(rngs.iter_mut())
                    .map(|(shard, rng)| {
                        shard.shuffle(rng);
                        let (ctx, si, so, processed) = (&ctx, &shared_in, &shared_out, &processed);
                        scope.spawn(move || ctx.run(shard, &mut Shared(si), &mut Shared(so), rng, processed))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
            });
            let (loss, n) = results.iter().fold((0.0, 0), |(l, n), r| (l + r.0, n + r.1));
            stats.epoch_losses.push(loss / n.max(1) as f64);
        }
        input = shared_in.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
    }

    let meta = EmbeddingMeta {
        dim,
        window: cfg.window,
        negatives: cfg.negatives,
        epochs: cfg.epochs,
        min_count: cfg.min_count,
        seed: cfg.seed,
    };
    let model = EmbeddingModel::from_parts(prep.vocab, input, meta)?;
    Ok((model, stats))
}
