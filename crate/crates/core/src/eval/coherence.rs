//! NPMI coherence over document-level co-occurrence, and topic diversity.

use std::collections::{HashMap, HashSet};

use super::EvalError;
use crate::corpus::BowCorpus;

/// Added to the joint probability inside the logarithms.
pub const PMI_EPS: f64 = 1e-12;
pub const DEFAULT_COHERENCE_TOP_N: usize = 10;
pub const DEFAULT_DIVERSITY_TOP_N: usize = 25;

/// Which documents contain each word. Pair counts are intersections of the
/// sorted posting lists, computed on demand.
#[derive(Debug, Clone)]
pub struct CooccurrenceStats {
    doc_count: usize,
    index: HashMap<String, usize>,
    postings: Vec<Vec<u32>>,
}

impl CooccurrenceStats {
    pub fn from_corpus(corpus: &BowCorpus) -> Result<Self, EvalError> {
        if corpus.num_docs() == 0 {
            return Err(EvalError::EmptyCorpus);
        }
        let mut postings = vec![Vec::new(); corpus.vocab_size()];
        for d in 0..corpus.num_docs() {
            for &(v, _) in corpus.row(d) {
                postings[v as usize].push(d as u32);
            }
        }
        let index = corpus
            .vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Self {
            doc_count: corpus.num_docs(),
            index,
            postings,
        })
    }

    /// Statistics from explicit document word sets.
    pub fn from_documents<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<Self, EvalError> {
        if docs.is_empty() {
            return Err(EvalError::EmptyCorpus);
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut postings: Vec<Vec<u32>> = Vec::new();
        for (d, words) in docs.iter().enumerate() {
            let unique: HashSet<&str> = words.iter().map(|w| w.as_ref()).collect();
            let mut unique: Vec<&str> = unique.into_iter().collect();
            unique.sort_unstable();
            for w in unique {
                let id = *index.entry(w.to_string()).or_insert_with(|| {
                    postings.push(Vec::new());
                    postings.len() - 1
                });
                postings[id].push(d as u32);
            }
        }
        Ok(Self {
            doc_count: docs.len(),
            index,
            postings,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Number of documents containing `word`; 0 for unseen words.
    pub fn word_doc_freq(&self, word: &str) -> usize {
        self.index.get(word).map_or(0, |&i| self.postings[i].len())
    }

    /// Number of documents containing both words.
    pub fn pair_doc_freq(&self, a: &str, b: &str) -> usize {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => intersection_len(&self.postings[i], &self.postings[j]),
            _ => 0,
        }
    }

    fn probabilities(&self, a: &str, b: &str) -> Result<(f64, f64, f64), EvalError> {
        let n = self.doc_count as f64;
        let fa = self.word_doc_freq(a);
        if fa == 0 {
            return Err(EvalError::UnknownWord(a.to_string()));
        }
        let fb = self.word_doc_freq(b);
        if fb == 0 {
            return Err(EvalError::UnknownWord(b.to_string()));
        }
        Ok((
            fa as f64 / n,
            fb as f64 / n,
            self.pair_doc_freq(a, b) as f64 / n,
        ))
    }

    /// `log2((p(a, b) + eps) / (p(a) p(b)))`.
    pub fn pmi(&self, a: &str, b: &str) -> Result<f64, EvalError> {
        let (pa, pb, pab) = self.probabilities(a, b)?;
        Ok(((pab + PMI_EPS) / (pa * pb)).log2())
    }

    /// PMI divided by `-log2(p(a, b) + eps)`. A pair that never co-occurs
    /// scores -1; a pair present in every document scores 1.
    pub fn npmi(&self, a: &str, b: &str) -> Result<f64, EvalError> {
        let (pa, pb, pab) = self.probabilities(a, b)?;
        if pab == 0.0 {
            return Ok(-1.0);
        }
        if pab == 1.0 {
            return Ok(1.0);
        }
        let pmi = ((pab + PMI_EPS) / (pa * pb)).log2();
        Ok((pmi / -(pab + PMI_EPS).log2()).clamp(-1.0, 1.0))
    }
}

fn intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoherenceScores {
    pub per_topic: Vec<f64>,
    pub mean: f64,
}

/// Mean NPMI over the unordered pairs of each topic's word list. A list of
/// fewer than two words scores 0; a pair involving a word absent from the
/// corpus scores -1.
pub fn topic_coherence<S: AsRef<str>>(
    topics: &[Vec<S>],
    stats: &CooccurrenceStats,
) -> CoherenceScores {
    let per_topic: Vec<f64> = topics
        .iter()
        .map(|words| {
            let mut total = 0.0;
            let mut pairs = 0usize;
            for i in 0..words.len() {
                for j in i + 1..words.len() {
                    total += stats
                        .npmi(words[i].as_ref(), words[j].as_ref())
                        .unwrap_or(-1.0);
                    pairs += 1;
                }
            }
            if pairs == 0 {
                0.0
            } else {
                total / pairs as f64
            }
        })
        .collect();
    let mean = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.iter().sum::<f64>() / per_topic.len() as f64
    };
    CoherenceScores { per_topic, mean }
}

/// Distinct words across all lists divided by the total list length
/// `K * top_n`.
pub fn topic_diversity<S: AsRef<str>>(topics: &[Vec<S>]) -> f64 {
    let total: usize = topics.iter().map(Vec::len).sum();
    if total == 0 {
        return 0.0;
    }
    let unique: HashSet<&str> = topics.iter().flatten().map(|w| w.as_ref()).collect();
    unique.len() as f64 / total as f64
}
