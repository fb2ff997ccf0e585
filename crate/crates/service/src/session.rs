//! One interactive session: the model version stack, the action log,
//! per-question document selections and the BM25 index used for reports.
//!
//! Mutations go through a single writer lock and are applied in arrival
//! order. Each mutation publishes a fresh immutable [`Snapshot`]; readers
//! clone the current snapshot pointer and never wait on a running relabel.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use intopic_core::corpus::Tokenizer;
use intopic_core::eval::{ranking_report, DEFAULT_REPORT_TOP_N};
use intopic_core::interact::{DEFAULT_HISTORY_DEPTH, DEFAULT_TOP_WORDS};
use intopic_core::{
    Bm25Index, BowCorpus, EtmModel, EvalError, InteractError, InteractionContext, ModelHistory,
    ModelVersion, RankingReport, RelabelRequest, TopicState, UpdateRecord,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_SELECTION: usize = 5;

/// One logged mutation. Selections are session metadata and are not part of
/// the model log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Relabel(RelabelRequest),
    Undo,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Interact(#[from] InteractError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("a selection holds at most {MAX_SELECTION} documents, got {0}")]
    SelectionLimit(usize),
    #[error("document {0:?} appears twice in the selection")]
    DuplicateDocument(String),
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
    #[error("question id must not be empty")]
    EmptyQuestion,
    #[error("action log {path}: {message}")]
    Log { path: String, message: String },
}

impl SessionError {
    pub fn reason(&self) -> &'static str {
        match self {
            SessionError::Interact(e) => e.reason(),
            SessionError::Eval(EvalError::UnknownDocument(_)) => "unknown_document",
            SessionError::Eval(_) => "report_error",
            SessionError::SelectionLimit(_) => "selection_limit",
            SessionError::DuplicateDocument(_) => "duplicate_document",
            SessionError::UnknownDocument(_) => "unknown_document",
            SessionError::EmptyQuestion => "empty_question",
            SessionError::Log { .. } => "log_error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionOptions {
    pub id: String,
    pub question: Option<String>,
    /// Query tokenizer for reports; must match the one used at ingest.
    pub tokenizer: Tokenizer,
    pub top_words: usize,
    pub history_depth: usize,
    /// Default lambda for relabels that do not name one. `None` takes the
    /// value stored in the checkpoint config.
    pub lambda_default: Option<f64>,
    /// Appends every applied action to this file as one JSON line.
    pub audit_log: Option<PathBuf>,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            id: "session".to_string(),
            question: None,
            tokenizer: Tokenizer::english(),
            top_words: DEFAULT_TOP_WORDS,
            history_depth: DEFAULT_HISTORY_DEPTH,
            lambda_default: None,
            audit_log: None,
        }
    }
}

/// Immutable view published after every mutation.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub version: Arc<ModelVersion>,
    pub undo_depth: usize,
    pub actions: usize,
    pub updates: Arc<Vec<UpdateRecord>>,
    pub selections: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub label: Option<String>,
    pub top_words: Vec<String>,
    pub document_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentEntry {
    pub id: String,
    pub title: Option<String>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentPage {
    pub topic_id: usize,
    pub total: usize,
    pub documents: Vec<DocumentEntry>,
}

struct Writer {
    history: ModelHistory,
    log: Vec<Action>,
    updates: Arc<Vec<UpdateRecord>>,
    selections: BTreeMap<String, Vec<String>>,
    audit: Option<(PathBuf, File)>,
}

pub struct Session {
    id: String,
    question: Option<String>,
    lambda_default: f64,
    ctx: InteractionContext,
    index: Bm25Index,
    base: Arc<ModelVersion>,
    writer: Mutex<Writer>,
    snapshot: RwLock<Arc<Snapshot>>,
}

fn log_error(path: &Path, e: impl std::fmt::Display) -> SessionError {
    SessionError::Log {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Reads a JSON-lines action log. Blank lines are skipped.
pub fn read_actions(path: impl AsRef<Path>) -> Result<Vec<Action>, SessionError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| log_error(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| log_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let action = serde_json::from_str(&line)
            .map_err(|e| log_error(path, format!("line {}: {e}", i + 1)))?;
        out.push(action);
    }
    Ok(out)
}

pub fn append_action(file: &mut File, action: &Action) -> std::io::Result<()> {
    let line = serde_json::to_string(action).map_err(std::io::Error::other)?;
    writeln!(file, "{line}")?;
    file.flush()
}

fn compact(mut record: UpdateRecord) -> UpdateRecord {
    record.before = record.before.without_beta();
    record.after = record.after.without_beta();
    record
}

impl Session {
    pub fn new(
        model: &EtmModel,
        corpus: Arc<BowCorpus>,
        options: SessionOptions,
    ) -> Result<Self, SessionError> {
        let ctx = InteractionContext::new(model, corpus.clone())?.with_top_words(options.top_words);
        let index = Bm25Index::build(&corpus, options.tokenizer)?;
        let history = ModelHistory::with_depth(ctx.initial_version(model), options.history_depth);
        let audit = match options.audit_log {
            Some(path) => {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&path)
                    .map_err(|e| log_error(&path, e))?;
                Some((path, file))
            }
            None => None,
        };
        let writer = Writer {
            history,
            log: Vec::new(),
            updates: Arc::new(Vec::new()),
            selections: BTreeMap::new(),
            audit,
        };
        let base = writer.history.base().clone();
        let snapshot = RwLock::new(Arc::new(Self::publishable(&writer)));
        Ok(Self {
            id: options.id,
            question: options.question,
            lambda_default: options
                .lambda_default
                .unwrap_or(model.config.lambda_default),
            ctx,
            index,
            base,
            writer: Mutex::new(writer),
            snapshot,
        })
    }

    fn publishable(w: &Writer) -> Snapshot {
        Snapshot {
            version: w.history.current().clone(),
            undo_depth: w.history.undo_depth(),
            actions: w.log.len(),
            updates: w.updates.clone(),
            selections: w.selections.clone(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Writer> {
        // a panicking writer never leaves a half-applied version behind:
        // versions are swapped in whole, so the state is still consistent
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn publish(&self, w: &Writer) {
        let snap = Arc::new(Self::publishable(w));
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = snap;
    }

    fn audit(w: &mut Writer, actions: &[Action]) -> Result<(), SessionError> {
        if let Some((path, file)) = w.audit.as_mut() {
            for a in actions {
                append_action(file, a).map_err(|e| log_error(path, e))?;
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn question(&self) -> Option<&str> {
        self.question.as_deref()
    }

    pub fn lambda_default(&self) -> f64 {
        self.lambda_default
    }

    pub fn context(&self) -> &InteractionContext {
        &self.ctx
    }

    pub fn corpus(&self) -> &BowCorpus {
        self.ctx.corpus()
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    /// Actions applied so far, in order.
    pub fn log(&self) -> Vec<Action> {
        self.lock().log.clone()
    }

    pub fn base(&self) -> &Arc<ModelVersion> {
        &self.base
    }

    pub fn relabel(&self, req: RelabelRequest) -> Result<UpdateRecord, SessionError> {
        let mut w = self.lock();
        let (next, record) = self.ctx.relabel(w.history.current(), &req)?;
        let record = compact(record);
        let action = Action::Relabel(req);
        Self::audit(&mut w, std::slice::from_ref(&action))?;
        w.history.push(next);
        w.log.push(action);
        Arc::make_mut(&mut w.updates).push(record.clone());
        self.publish(&w);
        Ok(record)
    }

    /// Applies every request or none. Later requests see the effect of
    /// earlier ones, so one batch can relabel several topics in sequence.
    pub fn relabel_batch(
        &self,
        reqs: Vec<RelabelRequest>,
    ) -> Result<Vec<UpdateRecord>, SessionError> {
        let mut w = self.lock();
        let mut versions = Vec::with_capacity(reqs.len());
        let mut records = Vec::with_capacity(reqs.len());
        let mut current = w.history.current().clone();
        for req in &reqs {
            let (next, record) = self.ctx.relabel(&current, req)?;
            current = Arc::new(next);
            versions.push(current.clone());
            records.push(compact(record));
        }
        let actions: Vec<Action> = reqs.into_iter().map(Action::Relabel).collect();
        Self::audit(&mut w, &actions)?;
        for v in versions {
            w.history.push(Arc::unwrap_or_clone(v));
        }
        w.log.extend(actions);
        Arc::make_mut(&mut w.updates).extend(records.iter().cloned());
        self.publish(&w);
        Ok(records)
    }

    pub fn undo(&self) -> Result<Arc<Snapshot>, SessionError> {
        let mut w = self.lock();
        if w.history.undo_depth() == 0 {
            return Err(InteractError::EmptyHistory.into());
        }
        Self::audit(&mut w, &[Action::Undo])?;
        w.history.undo()?;
        w.log.push(Action::Undo);
        self.publish(&w);
        Ok(self.snapshot())
    }

    pub fn apply(&self, action: Action) -> Result<Option<UpdateRecord>, SessionError> {
        match action {
            Action::Relabel(req) => self.relabel(req).map(Some),
            Action::Undo => self.undo().map(|_| None),
        }
    }

    /// Applies `actions` in order, stopping at the first failure.
    pub fn replay(
        &self,
        actions: impl IntoIterator<Item = Action>,
    ) -> Result<Vec<UpdateRecord>, SessionError> {
        let mut records = Vec::new();
        for a in actions {
            records.extend(self.apply(a)?);
        }
        Ok(records)
    }

    /// Replaces the stored selection for `question_id`.
    pub fn select(
        &self,
        question_id: &str,
        doc_ids: Vec<String>,
    ) -> Result<Vec<String>, SessionError> {
        if question_id.trim().is_empty() {
            return Err(SessionError::EmptyQuestion);
        }
        if doc_ids.len() > MAX_SELECTION {
            return Err(SessionError::SelectionLimit(doc_ids.len()));
        }
        let mut seen = HashSet::new();
        for id in &doc_ids {
            if !seen.insert(id.as_str()) {
                return Err(SessionError::DuplicateDocument(id.clone()));
            }
            if self.corpus().doc_index(id).is_none() {
                return Err(SessionError::UnknownDocument(id.clone()));
            }
        }
        let mut w = self.lock();
        w.selections
            .insert(question_id.to_string(), doc_ids.clone());
        self.publish(&w);
        Ok(doc_ids)
    }

    fn check_topic(&self, topic: usize) -> Result<(), SessionError> {
        let topics = self.ctx.topics();
        if topic >= topics {
            return Err(InteractError::TopicOutOfRange { topic, topics }.into());
        }
        Ok(())
    }

    pub fn topic_summaries(&self) -> Vec<TopicSummary> {
        self.summaries(&self.snapshot().version)
    }

    pub fn summaries(&self, version: &ModelVersion) -> Vec<TopicSummary> {
        self.ctx
            .topic_states(version)
            .into_iter()
            .map(|t| TopicSummary {
                topic_id: t.topic_id,
                label: t.label,
                top_words: t.top_words,
                document_count: t.documents.len(),
            })
            .collect()
    }

    pub fn topic(&self, topic: usize) -> Result<TopicState, SessionError> {
        self.check_topic(topic)?;
        Ok(self.ctx.topic_state(&self.snapshot().version, topic))
    }

    pub fn documents(
        &self,
        topic: usize,
        limit: Option<usize>,
    ) -> Result<DocumentPage, SessionError> {
        self.check_topic(topic)?;
        let snap = self.snapshot();
        let a = &snap.version.assignments;
        let docs = &a.topic_docs[topic];
        let corpus = self.corpus();
        Ok(DocumentPage {
            topic_id: topic,
            total: docs.len(),
            documents: docs
                .iter()
                .take(limit.unwrap_or(usize::MAX))
                .map(|&d| DocumentEntry {
                    id: corpus.doc_ids[d].clone(),
                    title: corpus.titles.get(d).cloned().flatten(),
                    score: a.score(d),
                })
                .collect(),
        })
    }

    /// BM25 report of version 0 against the current version.
    pub fn report(&self, query: &str, top_n: Option<usize>) -> Result<RankingReport, SessionError> {
        let current = self.snapshot().version.clone();
        let before = self.ctx.topic_states(&self.base);
        let after = self.ctx.topic_states(&current);
        Ok(ranking_report(
            query,
            &before,
            &after,
            &self.index,
            top_n.unwrap_or(DEFAULT_REPORT_TOP_N),
        )?)
    }
}
