//! Topic relabeling.
//!
//! A label word can move the topic embedding `alpha_k` toward the word's
//! embedding (after which `beta_k` is recomputed), or boost the word and its
//! nearest neighbors directly in `beta_k`. Either way the documents are then
//! reassigned and the change is recorded as a new immutable [`ModelVersion`].

mod assign;
mod history;
mod update;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::BowCorpus;
use crate::embeddings::{EmbeddingError, EmbeddingTable};
use crate::etm::{beta_row, top_words, EtmError, EtmModel, TopicWordDist};

pub use assign::{assign, doc_topic_loglik, reassign_documents, topic_loglik, Assignments};
pub use history::{ModelHistory, DEFAULT_HISTORY_DEPTH};
pub use update::{boost_topic_distribution, default_boost, move_topic_embedding};

pub const DEFAULT_NEIGHBORS: usize = 10;
pub const DEFAULT_TOP_WORDS: usize = 10;

#[derive(Debug, Error)]
pub enum InteractError {
    #[error("word {0:?} is not in the vocabulary")]
    OovWord(String),
    #[error("label {word:?} is already used by topic {topic}")]
    DuplicateLabel { word: String, topic: usize },
    #[error("lambda must lie in [0, 1], got {0}")]
    InvalidLambda(f64),
    #[error("boost must be a non-negative number, got {0}")]
    NegativeDelta(f64),
    #[error("topic {topic} out of range for {topics} topics")]
    TopicOutOfRange { topic: usize, topics: usize },
    #[error("no earlier model version to restore")]
    EmptyHistory,
    #[error("label must not be empty")]
    EmptyLabel,
    #[error("topic states belong to different topics ({0} and {1})")]
    TopicMismatch(usize, usize),
    #[error("model vocabulary does not match the corpus vocabulary")]
    VocabularyMismatch,
    #[error(transparent)]
    Etm(#[from] EtmError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

impl InteractError {
    /// Stable machine-readable code.
    pub fn reason(&self) -> &'static str {
        match self {
            InteractError::OovWord(_) => "oov_word",
            InteractError::DuplicateLabel { .. } => "duplicate_label",
            InteractError::InvalidLambda(_) => "invalid_lambda",
            InteractError::NegativeDelta(_) => "invalid_delta",
            InteractError::TopicOutOfRange { .. } => "unknown_topic",
            InteractError::EmptyHistory => "empty_history",
            InteractError::EmptyLabel => "empty_label",
            InteractError::TopicMismatch(..) => "topic_mismatch",
            InteractError::VocabularyMismatch => "vocabulary_mismatch",
            InteractError::Etm(_) => "model_error",
            InteractError::Embedding(_) => "embedding_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelabelMode {
    /// `lambda (w - alpha) + (1 - lambda) alpha`
    EmbeddingLiteral,
    /// `(1 - lambda) alpha + lambda w`
    #[default]
    EmbeddingConvex,
    /// Additive boost of the label and its neighbors in `beta_k`.
    Distribution,
}

impl RelabelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RelabelMode::EmbeddingLiteral => "embedding_literal",
            RelabelMode::EmbeddingConvex => "embedding_convex",
            RelabelMode::Distribution => "distribution",
        }
    }
}

impl fmt::Display for RelabelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelabelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "embedding_literal" | "literal" => Ok(RelabelMode::EmbeddingLiteral),
            "embedding_convex" | "convex" | "embedding" => Ok(RelabelMode::EmbeddingConvex),
            "distribution" => Ok(RelabelMode::Distribution),
            _ => Err(format!("unknown relabel mode {s:?}")),
        }
    }
}

fn default_neighbors() -> usize {
    DEFAULT_NEIGHBORS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelabelRequest {
    pub topic_id: usize,
    pub label_word: String,
    pub lambda: f64,
    #[serde(default)]
    pub mode: RelabelMode,
    /// Boost for distribution mode; defaults to the gap to the top word.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_neighbors")]
    pub neighbor_count: usize,
}

impl RelabelRequest {
    pub fn new(
        topic_id: usize,
        label_word: impl Into<String>,
        lambda: f64,
        mode: RelabelMode,
    ) -> Self {
        Self {
            topic_id,
            label_word: label_word.into(),
            lambda,
            mode,
            delta: None,
            neighbor_count: DEFAULT_NEIGHBORS,
        }
    }

    /// The label as it is matched against the vocabulary.
    pub fn normalized_word(&self) -> String {
        self.label_word.trim().to_lowercase()
    }

    pub fn validate(&self) -> Result<(), InteractError> {
        if self.normalized_word().is_empty() {
            return Err(InteractError::EmptyLabel);
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(InteractError::InvalidLambda(self.lambda));
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(InteractError::NegativeDelta(d));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicState {
    pub topic_id: usize,
    pub label: Option<String>,
    pub top_words: Vec<String>,
    /// Assigned documents, best first.
    pub documents: Vec<ScoredDocument>,
    /// Left out of compact views.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta_row: Vec<f64>,
}

impl TopicState {
    pub fn without_beta(mut self) -> Self {
        self.beta_row = Vec::new();
        self
    }

    pub fn document_ids(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.id.as_str())
    }
}

/// Ids present in `after` but not in `before`, sorted.
pub fn diff_documents(
    before: &TopicState,
    after: &TopicState,
) -> Result<Vec<String>, InteractError> {
    if before.topic_id != after.topic_id {
        return Err(InteractError::TopicMismatch(
            before.topic_id,
            after.topic_id,
        ));
    }
    let old: BTreeSet<&str> = before.document_ids().collect();
    let new: BTreeSet<&str> = after.document_ids().collect();
    Ok(new.difference(&old).map(|s| s.to_string()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub request: RelabelRequest,
    pub before: TopicState,
    pub after: TopicState,
    pub new_documents: Vec<String>,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

/// One immutable state of the interactive model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVersion {
    pub alpha: Arc<Array2<f64>>,
    pub beta: TopicWordDist,
    pub labels: Vec<Option<String>>,
    /// D x K mean per-token log-likelihoods under `beta`.
    pub loglik: Arc<Array2<f64>>,
    pub assignments: Arc<Assignments>,
}

impl ModelVersion {
    pub fn topics(&self) -> usize {
        self.labels.len()
    }
}

/// Word-similarity source for the neighbor spread of distribution mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilaritySource {
    #[default]
    ModelRho,
    Pretrained,
}

/// Everything a relabel needs besides the current version: the corpus, the
/// fixed document-topic proportions and the word embeddings.
#[derive(Debug, Clone)]
pub struct InteractionContext {
    corpus: Arc<BowCorpus>,
    vocab: Arc<[String]>,
    rho: Arc<Array2<f64>>,
    rho_table: Arc<EmbeddingTable>,
    pretrained: Option<Arc<EmbeddingTable>>,
    similarity: SimilaritySource,
    theta: Arc<Array2<f64>>,
    top_words: usize,
}

impl InteractionContext {
    /// Infers `theta` for every document once; the encoder never changes
    /// during a session.
    pub fn new(model: &EtmModel, corpus: Arc<BowCorpus>) -> Result<Self, InteractError> {
        if model.vocab.as_slice() != corpus.vocab.words() {
            return Err(InteractError::VocabularyMismatch);
        }
        let rho = Arc::new(model.params.rho.clone());
        let rho_table = Arc::new(EmbeddingTable::from_matrix(
            model.vocab.clone(),
            model.params.rho.clone(),
        )?);
        let theta = Arc::new(model.infer_corpus(&corpus));
        Ok(Self {
            corpus,
            vocab: model.vocab.clone().into(),
            rho,
            rho_table,
            pretrained: None,
            similarity: SimilaritySource::ModelRho,
            theta,
            top_words: DEFAULT_TOP_WORDS,
        })
    }

    /// Adds a pretrained table. It supplies label vectors for words outside
    /// the model vocabulary and, with [`SimilaritySource::Pretrained`], the
    /// neighbor similarities.
    pub fn with_pretrained(mut self, table: EmbeddingTable, similarity: SimilaritySource) -> Self {
        self.pretrained = Some(Arc::new(table));
        self.similarity = similarity;
        self
    }

    pub fn with_top_words(mut self, n: usize) -> Self {
        self.top_words = n;
        self
    }

    pub fn corpus(&self) -> &Arc<BowCorpus> {
        &self.corpus
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn topics(&self) -> usize {
        self.theta.ncols()
    }

    pub fn initial_version(&self, model: &EtmModel) -> ModelVersion {
        let loglik = doc_topic_loglik(&self.corpus, &model.beta);
        let assignments = assign(&self.theta, &loglik, &self.corpus.doc_ids);
        ModelVersion {
            alpha: Arc::new(model.params.alpha.clone()),
            beta: model.beta.clone(),
            labels: vec![None; model.topics()],
            loglik: Arc::new(loglik),
            assignments: Arc::new(assignments),
        }
    }

    pub fn topic_state(&self, version: &ModelVersion, topic: usize) -> TopicState {
        let row = version.beta.row(topic);
        let a = &version.assignments;
        TopicState {
            topic_id: topic,
            label: version.labels[topic].clone(),
            top_words: top_words(row, &self.vocab, self.top_words),
            documents: a.topic_docs[topic]
                .iter()
                .map(|&d| ScoredDocument {
                    id: self.corpus.doc_ids[d].clone(),
                    score: a.score(d),
                })
                .collect(),
            beta_row: row.to_vec(),
        }
    }

    pub fn topic_states(&self, version: &ModelVersion) -> Vec<TopicState> {
        (0..version.topics())
            .map(|k| self.topic_state(version, k))
            .collect()
    }

    fn label_vector(&self, word: &str) -> Result<Vec<f64>, InteractError> {
        if let Some(v) = self.rho_table.vector(word) {
            return Ok(v.to_vec());
        }
        if let Some(v) = self.pretrained.as_ref().and_then(|t| t.vector(word)) {
            if v.len() == self.rho.ncols() {
                return Ok(v.to_vec());
            }
        }
        Err(InteractError::OovWord(word.to_string()))
    }

    /// Top-`m` cosine neighbors of `word` inside the model vocabulary,
    /// excluding the word itself.
    pub fn neighbors(&self, word: &str, m: usize) -> Result<Vec<(usize, f64)>, InteractError> {
        if m == 0 {
            return Ok(Vec::new());
        }
        let table: &EmbeddingTable = match (self.similarity, &self.pretrained) {
            (SimilaritySource::Pretrained, Some(t)) => t,
            _ => &self.rho_table,
        };
        let Some(query) = table.vector(word) else {
            return Ok(Vec::new());
        };
        let query = query.to_vec();
        if query.iter().all(|&x| x == 0.0) {
            return Ok(Vec::new());
        }
        let found = table.nearest_words(&query, m, Some(&self.corpus.vocab), Some(word))?;
        Ok(found
            .into_iter()
            .filter_map(|(w, s)| self.corpus.vocab.id(&w).map(|id| (id, s)))
            .collect())
    }

    /// Applies one relabel to `version`, returning the new version and the
    /// record of the touched topic.
    pub fn relabel(
        &self,
        version: &ModelVersion,
        req: &RelabelRequest,
    ) -> Result<(ModelVersion, UpdateRecord), InteractError> {
        req.validate()?;
        let k = req.topic_id;
        let topics = version.topics();
        if k >= topics {
            return Err(InteractError::TopicOutOfRange { topic: k, topics });
        }
        let word = req.normalized_word();
        if let Some(other) = version
            .labels
            .iter()
            .enumerate()
            .position(|(j, l)| j != k && l.as_deref() == Some(word.as_str()))
        {
            return Err(InteractError::DuplicateLabel { word, topic: other });
        }

        let mut alpha = version.alpha.clone();
        let new_row = match req.mode {
            RelabelMode::EmbeddingLiteral | RelabelMode::EmbeddingConvex => {
                let w = self.label_vector(&word)?;
                if req.lambda == 0.0 {
                    None
                } else {
                    let old = alpha.row(k).to_vec();
                    let moved = move_topic_embedding(&old, &w, req.lambda, req.mode);
                    let row = beta_row(&self.rho, &moved)
                        .ok_or(EtmError::NonFiniteLogits { topic: k })?;
                    Arc::make_mut(&mut alpha)
                        .row_mut(k)
                        .assign(&ndarray::ArrayView1::from(&moved));
                    Some(row)
                }
            }
            RelabelMode::Distribution => {
                let target = self
                    .corpus
                    .vocab
                    .id(&word)
                    .ok_or_else(|| InteractError::OovWord(word.clone()))?;
                let neighbors = self.neighbors(&word, req.neighbor_count)?;
                Some(boost_topic_distribution(
                    version.beta.row(k),
                    target,
                    req.lambda,
                    req.delta,
                    &neighbors,
                )?)
            }
        };

        let (beta, loglik) = match new_row {
            None => (version.beta.clone(), version.loglik.clone()),
            Some(row) => {
                let column = topic_loglik(&self.corpus, &row);
                let mut loglik = version.loglik.clone();
                Arc::make_mut(&mut loglik)
                    .column_mut(k)
                    .assign(&ndarray::Array1::from(column));
                (version.beta.with_row(k, row), loglik)
            }
        };
        let assignments = if Arc::ptr_eq(&loglik, &version.loglik) {
            version.assignments.clone()
        } else {
            Arc::new(assign(&self.theta, &loglik, &self.corpus.doc_ids))
        };
        let mut labels = version.labels.clone();
        labels[k] = Some(word);
        let next = ModelVersion {
            alpha,
            beta,
            labels,
            loglik,
            assignments,
        };

        let before = self.topic_state(version, k);
        let after = self.topic_state(&next, k);
        let new_documents = diff_documents(&before, &after)?;
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        let record = UpdateRecord {
            request: req.clone(),
            before,
            after,
            new_documents,
            timestamp,
        };
        Ok((next, record))
    }
}
