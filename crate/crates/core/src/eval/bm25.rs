//! Okapi BM25 over the vocabulary-filtered bag-of-words corpus.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::EvalError;
use crate::corpus::{BowCorpus, Tokenizer};

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct Bm25Index {
    doc_ids: Vec<String>,
    doc_index: HashMap<String, usize>,
    term_index: HashMap<String, u32>,
    /// Sparse `(term, count)` rows sorted by term.
    doc_term_freqs: Vec<Vec<(u32, u32)>>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    term_doc_counts: Vec<u32>,
    tokenizer: Tokenizer,
    pub k1: f64,
    pub b: f64,
}

impl Bm25Index {
    pub fn build(corpus: &BowCorpus, tokenizer: Tokenizer) -> Result<Self, EvalError> {
        if corpus.num_docs() == 0 {
            return Err(EvalError::EmptyCorpus);
        }
        let mut term_doc_counts = vec![0u32; corpus.vocab_size()];
        for row in &corpus.counts {
            for &(v, _) in row {
                term_doc_counts[v as usize] += 1;
            }
        }
        let total: u64 = corpus.doc_lengths.iter().map(|&n| n as u64).sum();
        Ok(Self {
            doc_ids: corpus.doc_ids.clone(),
            doc_index: corpus
                .doc_ids
                .iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), i))
                .collect(),
            term_index: corpus
                .vocab
                .words()
                .iter()
                .enumerate()
                .map(|(i, w)| (w.clone(), i as u32))
                .collect(),
            doc_term_freqs: corpus.counts.clone(),
            doc_lengths: corpus.doc_lengths.clone(),
            avg_doc_length: total as f64 / corpus.num_docs() as f64,
            term_doc_counts,
            tokenizer,
            k1: DEFAULT_K1,
            b: DEFAULT_B,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, doc: usize) -> u32 {
        self.doc_lengths[doc]
    }

    /// `n(q)`: documents containing `term`; 0 for unknown terms.
    pub fn term_doc_count(&self, term: &str) -> u32 {
        self.term_index
            .get(term)
            .map_or(0, |&t| self.term_doc_counts[t as usize])
    }

    pub fn term_freq(&self, term: &str, doc: usize) -> u32 {
        let Some(&t) = self.term_index.get(term) else {
            return 0;
        };
        let row = &self.doc_term_freqs[doc];
        row.binary_search_by_key(&t, |&(v, _)| v)
            .map_or(0, |i| row[i].1)
    }

    /// `ln((N - n + 0.5) / (n + 0.5) + 1)`
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.term_doc_count(term) as f64;
        let total = self.doc_count() as f64;
        ((total - n + 0.5) / (n + 0.5) + 1.0).ln()
    }

    /// Query terms: tokenized like the documents, each term counted once.
    pub fn query_terms(&self, query: &str) -> Vec<String> {
        let mut terms = self.tokenizer.tokenize(query);
        let mut seen = std::collections::HashSet::new();
        terms.retain(|t| seen.insert(t.clone()));
        terms
    }

    fn score_terms(&self, terms: &[String], doc: usize) -> f64 {
        let len_norm = if self.avg_doc_length > 0.0 {
            self.doc_lengths[doc] as f64 / self.avg_doc_length
        } else {
            0.0
        };
        let (k1, b) = (self.k1, self.b);
        terms
            .iter()
            .map(|q| {
                let f = self.term_freq(q, doc) as f64;
                if f == 0.0 {
                    return 0.0;
                }
                self.idf(q) * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * len_norm))
            })
            .sum()
    }

    pub fn score_index(&self, query: &str, doc: usize) -> f64 {
        self.score_terms(&self.query_terms(query), doc)
    }

    pub fn score(&self, query: &str, doc_id: &str) -> Result<f64, EvalError> {
        let doc = self.index_of(doc_id)?;
        Ok(self.score_index(query, doc))
    }

    fn index_of(&self, doc_id: &str) -> Result<usize, EvalError> {
        self.doc_index
            .get(doc_id)
            .copied()
            .ok_or_else(|| EvalError::UnknownDocument(doc_id.to_string()))
    }

    /// Scores `doc_ids` and sorts them best first, ties by id.
    pub fn rank<S: AsRef<str>>(
        &self,
        query: &str,
        doc_ids: &[S],
    ) -> Result<Vec<(String, f64)>, EvalError> {
        let terms = self.query_terms(query);
        let mut out = doc_ids
            .iter()
            .map(|id| {
                let doc = self.index_of(id.as_ref())?;
                Ok((id.as_ref().to_string(), self.score_terms(&terms, doc)))
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        out.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        Ok(out)
    }

    /// Mean score over `doc_ids`; `None` for an empty list.
    pub fn mean_score<S: AsRef<str>>(
        &self,
        query: &str,
        doc_ids: &[S],
    ) -> Result<Option<f64>, EvalError> {
        if doc_ids.is_empty() {
            return Ok(None);
        }
        let terms = self.query_terms(query);
        let mut total = 0.0;
        for id in doc_ids {
            total += self.score_terms(&terms, self.index_of(id.as_ref())?);
        }
        Ok(Some(total / doc_ids.len() as f64))
    }
}
