//! Document reassignment after a topic-word update.
//!
//! `score(d, k) = theta[d, k] * exp(mean_v log beta[k, v])`, the mean taken
//! over the tokens of `d`. Comparisons run in log space so tiny scores keep
//! their order.

use std::cmp::Ordering;

use ndarray::Array2;

use crate::corpus::BowCorpus;
use crate::etm::TopicWordDist;

/// Per-topic ranked document lists plus each document's winning topic.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignments {
    pub doc_topic: Vec<usize>,
    /// `ln score(d, doc_topic[d])`.
    pub doc_log_score: Vec<f64>,
    /// Document indices per topic, best first.
    pub topic_docs: Vec<Vec<usize>>,
}

impl Assignments {
    pub fn score(&self, doc: usize) -> f64 {
        self.doc_log_score[doc].exp()
    }
}

/// Mean per-token log-likelihood of every document under one topic row.
/// Empty documents get 0.
pub fn topic_loglik(corpus: &BowCorpus, beta_row: &[f64]) -> Vec<f64> {
    let log_beta: Vec<f64> = beta_row.iter().map(|p| p.ln()).collect();
    (0..corpus.num_docs())
        .map(|d| {
            let n = corpus.doc_lengths[d];
            if n == 0 {
                return 0.0;
            }
            let s: f64 = corpus
                .row(d)
                .iter()
                .map(|&(v, c)| c as f64 * log_beta[v as usize])
                .sum();
            s / n as f64
        })
        .collect()
}

/// D x K matrix of [`topic_loglik`] columns.
pub fn doc_topic_loglik(corpus: &BowCorpus, beta: &TopicWordDist) -> Array2<f64> {
    let mut out = Array2::zeros((corpus.num_docs(), beta.topics()));
    for k in 0..beta.topics() {
        for (d, x) in topic_loglik(corpus, beta.row(k)).into_iter().enumerate() {
            out[[d, k]] = x;
        }
    }
    out
}

/// Assigns each document to its best-scoring topic and ranks each topic's
/// documents by score, ties by document id.
pub fn assign(theta: &Array2<f64>, loglik: &Array2<f64>, doc_ids: &[String]) -> Assignments {
    let (docs, topics) = theta.dim();
    assert_eq!(
        loglik.dim(),
        (docs, topics),
        "theta and loglik shapes differ"
    );
    let mut doc_topic = Vec::with_capacity(docs);
    let mut doc_log_score = Vec::with_capacity(docs);
    let mut topic_docs = vec![Vec::new(); topics];
    for d in 0..docs {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for k in 0..topics {
            let s = theta[[d, k]].ln() + loglik[[d, k]];
            if s > best_score {
                best = k;
                best_score = s;
            }
        }
        doc_topic.push(best);
        doc_log_score.push(best_score);
        topic_docs[best].push(d);
    }
    for list in &mut topic_docs {
        list.sort_by(|&a, &b| {
            doc_log_score[b]
                .partial_cmp(&doc_log_score[a])
                .unwrap_or(Ordering::Equal)
                .then_with(|| doc_ids[a].cmp(&doc_ids[b]))
        });
    }
    Assignments {
        doc_topic,
        doc_log_score,
        topic_docs,
    }
}

/// Full recomputation from `theta` and `beta`.
pub fn reassign_documents(
    corpus: &BowCorpus,
    theta: &Array2<f64>,
    beta: &TopicWordDist,
) -> Assignments {
    assign(theta, &doc_topic_loglik(corpus, beta), &corpus.doc_ids)
}
