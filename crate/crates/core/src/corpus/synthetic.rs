//! Planted-topic synthetic corpora: ground truth for training recovery and
//! relabeling experiments.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{to_bow, BowCorpus, CorpusError, Document, Vocabulary};
use crate::embeddings::EmbeddingTable;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub topics: usize,
    pub vocab_size: usize,
    pub docs: usize,
    pub doc_len: usize,
    /// Weight of the dominant topic relative to a flat Dirichlet draw over all
    /// topics. `f64::INFINITY` yields single-topic documents.
    pub concentration: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            topics: 3,
            vocab_size: 30,
            docs: 300,
            doc_len: 50,
            concentration: 5.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    /// Generated word list; planted beta columns follow this order.
    pub words: Vec<String>,
    /// Word range owned by each planted topic.
    pub blocks: Vec<Range<usize>>,
    /// K x V planted topic-word distributions.
    pub planted_beta: Array2<f64>,
    /// Dominant topic of each document.
    pub assignments: Vec<usize>,
    /// Topic mixture each document was sampled from.
    pub mixtures: Array2<f64>,
}

impl SyntheticCorpus {
    pub fn block_of(&self, word: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&word))
            .expect("every word belongs to a block")
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    /// Bag-of-words over the full generated word list, so column `v` is
    /// planted word `v`. No frequency pruning is applied.
    pub fn bow(&self) -> BowCorpus {
        let mut df = vec![0usize; self.words.len()];
        let index: HashMap<&str, usize> = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        for doc in &self.documents {
            let present: HashSet<usize> = doc.tokens.iter().map(|t| index[t.as_str()]).collect();
            for v in present {
                df[v] += 1;
            }
        }
        let n = self.documents.len() as f64;
        let vocab = Vocabulary::from_parts(
            self.words.clone(),
            df.iter().map(|&c| c as f64 / n).collect(),
        );
        to_bow(&self.documents, &vocab)
    }
}

fn digits(n: usize) -> usize {
    n.max(1).to_string().len()
}

/// Generates a corpus where topic `k` owns a disjoint block of words.
///
/// Within a block, word weights decay as `1/sqrt(rank + 1)` so every planted
/// topic has a well-defined top-word order.
pub fn generate_synthetic_corpus(cfg: &SyntheticConfig) -> Result<SyntheticCorpus, CorpusError> {
    let k = cfg.topics;
    let v = cfg.vocab_size;
    if k < 2 || v < 5 * k || cfg.docs == 0 || cfg.concentration.is_nan() || cfg.concentration < 0.0
    {
        return Err(CorpusError::InvalidSynthetic(format!(
                "synthetic corpus needs topics >= 2, vocab_size >= 5 * topics, docs >= 1 \
                 and concentration >= 0 (got topics={k}, vocab_size={v}, docs={}, concentration={})",
                cfg.docs, cfg.concentration
        )));
    }

    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for t in 0..k {
        let len = v / k + usize::from(t < v % k);
        blocks.push(start..start + len);
        start += len;
    }
    let tw = digits(k - 1).max(2);
    let ww = digits(blocks[0].len() - 1).max(2);
    let mut words = Vec::with_capacity(v);
    for (t, block) in blocks.iter().enumerate() {
        for i in 0..block.len() {
            words.push(format!("b{t:0tw$}w{i:0ww$}"));
        }
    }

    let mut planted_beta = Array2::zeros((k, v));
    for (t, block) in blocks.iter().enumerate() {
        let weights: Vec<f64> = (0..block.len())
            .map(|i| 1.0 / ((i + 1) as f64).sqrt())
            .collect();
        let total: f64 = weights.iter().sum();
        for (i, w) in weights.iter().enumerate() {
            planted_beta[[t, block.start + i]] = w / total;
        }
    }
    let word_samplers: Vec<WeightedIndex<f64>> = blocks
        .iter()
        .enumerate()
        .map(|(t, b)| {
            WeightedIndex::new(planted_beta.row(t).as_slice().unwrap()[b.clone()].to_vec())
                .expect("positive block weights")
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dw = digits(cfg.docs - 1);
    let mut documents = Vec::with_capacity(cfg.docs);
    let mut assignments = Vec::with_capacity(cfg.docs);
    let mut mixtures = Array2::zeros((cfg.docs, k));
    for d in 0..cfg.docs {
        let dominant = rng.random_range(0..k);
        let mut theta = vec![0.0; k];
        if cfg.concentration.is_infinite() {
            theta[dominant] = 1.0;
        } else {
            let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            let c = cfg.concentration;
            for (t, g) in draws.iter().enumerate() {
                theta[t] = (g / total + if t == dominant { c } else { 0.0 }) / (c + 1.0);
            }
        }
        let topic_sampler = WeightedIndex::new(&theta).expect("valid mixture");
        let tokens: Vec<String> = (0..cfg.doc_len)
            .map(|_| {
                let t = topic_sampler.sample(&mut rng);
                let w = blocks[t].start + word_samplers[t].sample(&mut rng);
                words[w].clone()
            })
            .collect();
        for (t, p) in theta.iter().enumerate() {
            mixtures[[d, t]] = *p;
        }
        let mut doc = Document::new(format!("doc{d:0dw$}"), None, tokens.join(" "));
        doc.tokens = tokens;
        documents.push(doc);
        assignments.push(dominant);
    }

    Ok(SyntheticCorpus {
        documents,
        words,
        blocks,
        planted_beta,
        assignments,
        mixtures,
    })
}

/// Block-clustered word vectors for a synthetic corpus: each planted topic
/// gets a random centroid (expected norm 3) and each word adds isotropic
/// noise (expected norm 1), so same-block cosine is about 0.9 and
/// cross-block cosine about 0.
pub fn synthetic_embeddings(corpus: &SyntheticCorpus, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroid_scale = 3.0 / (dim as f64).sqrt();
    let noise_scale = 1.0 / (dim as f64).sqrt();
    let centroids: Vec<Vec<f64>> = corpus
        .blocks
        .iter()
        .map(|_| {
            (0..dim)
                .map(|_| centroid_scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut vectors = Array2::zeros((corpus.words.len(), dim));
    for (t, block) in corpus.blocks.iter().enumerate() {
        for w in block.clone() {
            for j in 0..dim {
                vectors[[w, j]] =
                    centroids[t][j] + noise_scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    EmbeddingTable::from_matrix(corpus.words.clone(), vectors).expect("generated words are unique")
}
