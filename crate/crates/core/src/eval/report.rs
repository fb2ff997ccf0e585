//! Before/after BM25 comparison of topic document lists.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Bm25Index, EvalError};
use crate::interact::{diff_documents, TopicState};

pub const DEFAULT_REPORT_TOP_N: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRanking {
    pub topic_id: usize,
    pub label: Option<String>,
    /// Mean BM25 of the first `top_n` documents; `None` when the topic had
    /// no documents.
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub delta: Option<f64>,
    pub new_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub query: String,
    pub top_n: usize,
    pub topics: Vec<TopicRanking>,
    /// Means over the topics where the value is present.
    pub mean_before: Option<f64>,
    pub mean_after: Option<f64>,
    pub mean_delta: Option<f64>,
    pub total_new_documents: usize,
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let vals: Vec<f64> = xs.flatten().collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

fn top_ids(state: &TopicState, n: usize) -> Vec<&str> {
    state.document_ids().take(n).collect()
}

pub fn ranking_report(
    query: &str,
    before: &[TopicState],
    after: &[TopicState],
    index: &Bm25Index,
    top_n: usize,
) -> Result<RankingReport, EvalError> {
    if before.len() != after.len() {
        return Err(EvalError::Misaligned);
    }
    let mut topics = Vec::with_capacity(before.len());
    for (b, a) in before.iter().zip(after) {
        let new_documents = diff_documents(b, a)
            .map_err(|_| EvalError::Misaligned)?
            .len();
        let mb = index.mean_score(query, &top_ids(b, top_n))?;
        let ma = index.mean_score(query, &top_ids(a, top_n))?;
        topics.push(TopicRanking {
            topic_id: a.topic_id,
            label: a.label.clone(),
            before: mb,
            after: ma,
            delta: mb.zip(ma).map(|(x, y)| y - x),
            new_documents,
        });
    }
    Ok(RankingReport {
        query: query.to_string(),
        top_n,
        mean_before: mean(topics.iter().map(|t| t.before)),
        mean_after: mean(topics.iter().map(|t| t.after)),
        mean_delta: mean(topics.iter().map(|t| t.delta)),
        total_new_documents: topics.iter().map(|t| t.new_documents).sum(),
        topics,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "absent".to_string(), |v| v.to_string())
}

impl RankingReport {
    pub fn topic(&self, id: usize) -> Option<&TopicRanking> {
        self.topics.iter().find(|t| t.topic_id == id)
    }

    /// Line-oriented text with a fixed field order. Floats print in their
    /// shortest round-trip form, so equal reports give equal text.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "query\t{}", self.query.replace(['\t', '\n'], " "));
        let _ = writeln!(s, "top_n\t{}", self.top_n);
        let _ = writeln!(s, "topic\tlabel\tbefore\tafter\tdelta\tnew_documents");
        for t in &self.topics {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                t.topic_id,
                t.label.as_deref().unwrap_or("-"),
                opt(t.before),
                opt(t.after),
                opt(t.delta),
                t.new_documents
            );
        }
        let _ = writeln!(s, "mean_before\t{}", opt(self.mean_before));
        let _ = writeln!(s, "mean_after\t{}", opt(self.mean_after));
        let _ = writeln!(s, "mean_delta\t{}", opt(self.mean_delta));
        let _ = writeln!(s, "total_new_documents\t{}", self.total_new_documents);
        s
    }
}
