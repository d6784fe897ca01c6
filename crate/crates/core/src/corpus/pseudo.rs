//! Synthetic pseudo-word datasets.
//!
//! Every sense of a pseudo-word owns a topic: a Zipf-weighted categorical
//! distribution over its own vocabulary. Contexts are bags of words drawn
//! from the sense topic, a shared background pool and (optionally) the
//! topics of sibling senses; the ambiguous token is then inserted once.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Annotation, Citation, Dataset, Instance, SenseInventory, WordType};
use crate::textproc::tokenize_citation;
use crate::{seeds, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicParams {
    pub words_per_topic: usize,
    pub shared_words: usize,
    /// Probability of drawing a context word from the shared pool.
    pub overlap: f64,
    /// Probability that a non-shared word comes from a sibling sense's topic.
    pub sibling_mix: f64,
    pub zipf_exponent: f64,
    pub context_min: usize,
    pub context_max: usize,
    pub sentence_len: usize,
    pub title_len: usize,
}

impl Default for TopicParams {
    fn default() -> Self {
        TopicParams {
            words_per_topic: 40,
            shared_words: 80,
            overlap: 0.5,
            sibling_mix: 0.2,
            zipf_exponent: 1.0,
            context_min: 10,
            context_max: 80,
            sentence_len: 10,
            title_len: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoWordConfig {
    pub seed: u64,
    pub n_terms: usize,
    pub senses_per_term: usize,
    pub instances_per_sense: usize,
    pub topics: TopicParams,
    /// Unlabelled citations per sense for embedding training.
    pub background_docs_per_sense: usize,
}

impl Default for PseudoWordConfig {
    fn default() -> Self {
        PseudoWordConfig {
            seed: 7,
            n_terms: 20,
            senses_per_term: 2,
            instances_per_sense: 100,
            topics: TopicParams::default(),
            background_docs_per_sense: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub dataset: Dataset,
    /// Unlabelled citations drawn from the same topics; disjoint ids.
    pub background: Vec<Citation>,
    pub warnings: Vec<String>,
}

const SEMTYPES: [&str; 8] = ["inpr", "idcn", "cnce", "sbst", "bodm", "orgf", "orga", "dsyn"];

pub fn term_token(t: usize) -> String {
    format!("amb{t:02}")
}

fn topic_word(t: usize, s: usize, i: usize) -> String {
    format!("t{t:02}s{s}w{i:03}")
}

fn shared_word(i: usize) -> String {
    format!("bg{i:03}")
}

struct Word {
    text: String,
    concept: String,
    semtype: &'static str,
}

struct Sampler {
    topics: Vec<Vec<Word>>, // [t * k + s]
    shared: Vec<Word>,
    topic_dist: Option<WeightedIndex<f64>>,
    shared_dist: Option<WeightedIndex<f64>>,
    k: usize,
    params: TopicParams,
}

fn zipf(n: usize, exponent: f64) -> Option<WeightedIndex<f64>> {
    if n == 0 {
        return None;
    }
    WeightedIndex::new((0..n).map(|i| 1.0 / ((i + 1) as f64).powf(exponent))).ok()
}

impl Sampler {
    fn new(cfg: &PseudoWordConfig) -> Self {
        let p = &cfg.topics;
        let k = cfg.senses_per_term;
        let mut topics = Vec::with_capacity(cfg.n_terms * k);
        for t in 0..cfg.n_terms {
            for s in 0..k {
                let semtype = SEMTYPES[(t * k + s) % SEMTYPES.len()];
                topics.push(
                    (0..p.words_per_topic)
                        .map(|i| Word {
                            text: topic_word(t, s, i),
                            concept: format!("C{:07}", 1_000_000 + t * 10_000 + s * 100 + i / 4),
                            semtype,
                        })
                        .collect(),
                );
            }
        }
        let shared = (0..p.shared_words)
            .map(|i| Word {
                text: shared_word(i),
                concept: format!("C{:07}", 9_000_000 + i / 4),
                semtype: "qlco",
            })
            .collect();
        Sampler {
            topics,
            shared,
            topic_dist: zipf(p.words_per_topic, p.zipf_exponent),
            shared_dist: zipf(p.shared_words, p.zipf_exponent),
            k,
            params: p.clone(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, t: usize, s: usize) -> &Word {
        let p = &self.params;
        let r: f64 = rng.gen();
        match (&self.shared_dist, &self.topic_dist) {
            (Some(d), _) if r < p.overlap => &self.shared[d.sample(rng)],
            (Some(d), None) => &self.shared[d.sample(rng)],
            (_, Some(d)) => {
                let mut sense = s;
                if self.k > 1 && rng.gen::<f64>() < p.sibling_mix {
                    sense = (s + 1 + rng.gen_range(0..self.k - 1)) % self.k;
                }
                &self.topics[t * self.k + sense][d.sample(rng)]
            }
            (None, None) => unreachable!("checked by the generator"),
        }
    }

    /// A citation whose abstract contains the ambiguous token exactly once.
    /// Returns the citation and the token position.
    fn citation(&self, rng: &mut ChaCha8Rng, id: String, t: usize, s: usize) -> (Citation, usize) {
        let p = &self.params;
        let mut words: Vec<(&str, Option<&Word>)> = Vec::new();
        for _ in 0..p.title_len {
            let w = self.draw(rng, t, s);
            words.push((&w.text, Some(w)));
        }
        let n_ctx = rng.gen_range(p.context_min..=p.context_max);
        let mut body: Vec<(&str, Option<&Word>)> = Vec::with_capacity(n_ctx + 1);
        for _ in 0..n_ctx {
            let w = self.draw(rng, t, s);
            body.push((&w.text, Some(w)));
        }
        let term = term_token(t);
        let at = rng.gen_range(0..=body.len());
        body.insert(at, (&term, None));

        let title = capitalize_join(&words[..]);
        let sentences: Vec<String> = body.chunks(p.sentence_len.max(1)).map(capitalize_join).collect();
        let abstract_text = if sentences.is_empty() {
            String::new()
        } else {
            sentences.join(". ") + "."
        };

        words.extend(body);
        let mut concepts = Vec::new();
        let mut semtypes = Vec::new();
        for (i, (_, w)) in words.iter().enumerate() {
            if let Some(w) = w {
                concepts.push(Annotation::new(i, i + 1, w.concept.clone()));
                semtypes.push(Annotation::new(i, i + 1, w.semtype));
            }
        }
        let mut c = Citation::new(id, title, abstract_text);
        c.concepts = Some(concepts);
        c.semtypes = Some(semtypes);
        (c, p.title_len + at)
    }
}

fn capitalize_join(words: &[(&str, Option<&Word>)]) -> String {
    let mut out = String::new();
    for (i, (w, _)) in words.iter().enumerate() {
        if i == 0 {
            let mut chars = w.chars();
            if let Some(first) = chars.next() {
                out.extend(first.to_uppercase());
                out.push_str(chars.as_str());
            }
        } else {
            out.push(' ');
            out.push_str(w);
        }
    }
    out
}

fn degenerate_warnings(cfg: &PseudoWordConfig) -> Vec<String> {
    let p = &cfg.topics;
    let k = cfg.senses_per_term as f64;
    let mut warnings = Vec::new();
    if p.words_per_topic == 0 || (p.overlap >= 1.0 && p.shared_words > 0) {
        warnings.push("every context word comes from the shared pool: sense distributions are identical".to_string());
    } else if ((1.0 - p.sibling_mix) - p.sibling_mix / (k - 1.0)).abs() < 1e-12 {
        warnings.push(format!(
            "sibling_mix {} spreads words evenly over all senses: sense distributions are identical",
            p.sibling_mix
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    warnings
}

/// Deterministic pseudo-word dataset for a given configuration.
pub fn generate_pseudoword_dataset(cfg: &PseudoWordConfig) -> Result<Generated> {
    let p = &cfg.topics;
    if cfg.senses_per_term < 2 {
        return Err(Error::pre("senses_per_term must be at least 2"));
    }
    if cfg.instances_per_sense < 1 {
        return Err(Error::pre("instances_per_sense must be at least 1"));
    }
    if p.context_min > p.context_max {
        return Err(Error::pre("context_min exceeds context_max"));
    }
    if !(0.0..=1.0).contains(&p.overlap) || !(0.0..=1.0).contains(&p.sibling_mix) {
        return Err(Error::pre("overlap and sibling_mix must lie in [0, 1]"));
    }
    if p.words_per_topic == 0 && p.shared_words == 0 {
        return Err(Error::pre("no vocabulary to draw contexts from"));
    }
    let warnings = degenerate_warnings(cfg);

    let sampler = Sampler::new(cfg);
    let mut rng = seeds::rng(cfg.seed, "pseudoword");
    let k = cfg.senses_per_term;
    let sense_ids: Vec<String> = (1..=k).map(|i| format!("M{i}")).collect();

    let mut inventory = SenseInventory::default();
    let mut citations = Vec::new();
    let mut instances = Vec::new();
    for t in 0..cfg.n_terms {
        let term = term_token(t);
        inventory.insert(&term, sense_ids.clone(), [WordType::T, WordType::A, WordType::AT][t % 3])?;
        for (s, sense) in sense_ids.iter().enumerate() {
            for i in 0..cfg.instances_per_sense {
                let (c, position) = sampler.citation(&mut rng, format!("p{t}-{s}-{i}"), t, s);
                debug_assert_eq!(tokenize_citation(&c).tokens[position].surface, term);
                instances.push(Instance::new(&c.id, &term, position, sense));
                citations.push(c);
            }
        }
    }

    let mut bg_rng = seeds::rng(cfg.seed, "pseudoword-background");
    let mut background = Vec::new();
    for t in 0..cfg.n_terms {
        for s in 0..k {
            for i in 0..cfg.background_docs_per_sense {
                let (c, _) = sampler.citation(&mut bg_rng, format!("bg{t}-{s}-{i}"), t, s);
                background.push(c);
            }
        }
    }

    Ok(Generated {
        dataset: Dataset::new(citations, instances, inventory)?,
        background,
        warnings,
    })
}
