//! Automatic metrics and retrieval reports.

mod bm25;
mod coherence;
mod recovery;
mod report;

use thiserror::Error;

pub use bm25::{Bm25Index, DEFAULT_B, DEFAULT_K1};
pub use coherence::{
    topic_coherence, topic_diversity, CoherenceScores, CooccurrenceStats, DEFAULT_COHERENCE_TOP_N,
    DEFAULT_DIVERSITY_TOP_N, PMI_EPS,
};
pub use recovery::{assignment_accuracy, match_topics};
pub use report::{ranking_report, RankingReport, TopicRanking, DEFAULT_REPORT_TOP_N};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("word {0:?} does not occur in the corpus")]
    UnknownWord(String),
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("before and after states are not aligned by topic")]
    Misaligned,
}
