//! JSON-over-HTTP interface of a [`Session`].
//!
//! Errors share one body shape, `{"error": <reason>, "message": <text>}`.
//! Reason codes map to statuses as follows: bad input 400, unknown topic or
//! document 404, conflicts with the session state 409, words outside the
//! vocabulary 422.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use intopic_core::{RankingReport, RelabelMode, RelabelRequest, TopicState, UpdateRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::session::{DocumentPage, Session, SessionError, TopicSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, reason: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: reason.to_string(),
                message: message.into(),
            },
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

pub fn status_for(reason: &str) -> StatusCode {
    match reason {
        "invalid_lambda" | "invalid_delta" | "empty_label" | "selection_limit"
        | "duplicate_document" | "empty_question" | "invalid_request" => StatusCode::BAD_REQUEST,
        "unknown_topic" | "unknown_document" => StatusCode::NOT_FOUND,
        "duplicate_label" | "empty_history" => StatusCode::CONFLICT,
        "oov_word" => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let reason = e.reason();
        Self::new(status_for(reason), reason, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn parse_topic(session: &Session, raw: &str) -> Result<usize, ApiError> {
    let topics = session.context().topics();
    raw.parse::<usize>().map_err(|_| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_topic",
            format!("topic {raw:?} is not an index below {topics}"),
        )
    })
}

/// Runs a mutation off the async workers. The session's writer lock keeps
/// mutations in arrival order.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub question: Option<String>,
    pub topics: usize,
    pub documents: usize,
    pub vocabulary: usize,
    pub lambda_default: f64,
    pub labels: Vec<Option<String>>,
    pub actions: usize,
    pub undo_depth: usize,
    pub selections: BTreeMap<String, Vec<String>>,
    pub updates: Vec<UpdateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsView {
    pub topics: Vec<TopicSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelBody {
    #[serde(alias = "label_word", alias = "label")]
    pub word: String,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub mode: Option<RelabelMode>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub neighbor_count: Option<usize>,
}

impl LabelBody {
    pub fn into_request(self, topic_id: usize, lambda_default: f64) -> RelabelRequest {
        let mut req = RelabelRequest::new(
            topic_id,
            self.word,
            self.lambda.unwrap_or(lambda_default),
            self.mode.unwrap_or_default(),
        );
        req.delta = self.delta;
        if let Some(m) = self.neighbor_count {
            req.neighbor_count = m;
        }
        req
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub topic_id: usize,
    #[serde(flatten)]
    pub label: LabelBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchBody {
    pub updates: Vec<BatchItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchView {
    pub records: Vec<UpdateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionBody {
    pub question_id: String,
    pub doc_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndoView {
    pub undo_depth: usize,
    pub topics: Vec<TopicSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    #[serde(flatten)]
    pub report: RankingReport,
    /// The same report in the line format printed by the command line.
    pub text: String,
}

type Params = Query<BTreeMap<String, String>>;

fn count_param(params: &BTreeMap<String, String>, name: &str) -> Result<Option<usize>, ApiError> {
    params
        .get(name)
        .map(|v| {
            v.parse().map_err(|_| {
                ApiError::bad_request(format!("{name} must be a non-negative integer, got {v:?}"))
            })
        })
        .transpose()
}

pub fn router(session: Arc<Session>) -> Router {
    Router::new()
        .route("/api/session", get(get_session))
        .route("/api/topics", get(get_topics))
        .route("/api/topics/{k}", get(get_topic))
        .route("/api/topics/{k}/documents", get(get_documents))
        .route("/api/topics/{k}/label", post(post_label))
        .route("/api/labels", post(post_labels))
        .route("/api/selections", post(post_selection))
        .route("/api/report", get(get_report))
        .route("/api/undo", post(post_undo))
        .with_state(session)
}

async fn get_session(State(s): State<Arc<Session>>) -> Json<SessionView> {
    let snap = s.snapshot();
    let corpus = s.corpus();
    Json(SessionView {
        session_id: s.id().to_string(),
        question: s.question().map(str::to_string),
        topics: s.context().topics(),
        documents: corpus.num_docs(),
        vocabulary: corpus.vocab_size(),
        lambda_default: s.lambda_default(),
        labels: snap.version.labels.clone(),
        actions: snap.actions,
        undo_depth: snap.undo_depth,
        selections: snap.selections.clone(),
        updates: snap.updates.as_ref().clone(),
    })
}

async fn get_topics(State(s): State<Arc<Session>>) -> Json<TopicsView> {
    Json(TopicsView {
        topics: s.topic_summaries(),
    })
}

async fn get_topic(State(s): State<Arc<Session>>, Path(k): Path<String>) -> ApiResult<TopicState> {
    let k = parse_topic(&s, &k)?;
    Ok(Json(s.topic(k)?))
}

async fn get_documents(
    State(s): State<Arc<Session>>,
    Path(k): Path<String>,
    Query(q): Params,
) -> ApiResult<DocumentPage> {
    let k = parse_topic(&s, &k)?;
    let limit = count_param(&q, "limit")?;
    Ok(Json(s.documents(k, limit)?))
}

async fn post_label(
    State(s): State<Arc<Session>>,
    Path(k): Path<String>,
    body: Bytes,
) -> ApiResult<UpdateRecord> {
    let k = parse_topic(&s, &k)?;
    let req = parse_body::<LabelBody>(&body)?.into_request(k, s.lambda_default());
    Ok(Json(blocking(move || s.relabel(req)).await?))
}

async fn post_labels(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult<BatchView> {
    let batch: BatchBody = parse_body(&body)?;
    let lambda = s.lambda_default();
    let reqs: Vec<RelabelRequest> = batch
        .updates
        .into_iter()
        .map(|u| u.label.into_request(u.topic_id, lambda))
        .collect();
    let records = blocking(move || s.relabel_batch(reqs)).await?;
    Ok(Json(BatchView { records }))
}

async fn post_selection(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult<SelectionBody> {
    let sel: SelectionBody = parse_body(&body)?;
    let doc_ids = s.select(&sel.question_id, sel.doc_ids)?;
    Ok(Json(SelectionBody {
        question_id: sel.question_id,
        doc_ids,
    }))
}

async fn get_report(State(s): State<Arc<Session>>, Query(q): Params) -> ApiResult<ReportView> {
    let top_n = count_param(&q, "top_n")?;
    let query = q
        .get("query")
        .cloned()
        .ok_or_else(|| ApiError::bad_request("missing query parameter \"query\""))?;
    let report = blocking(move || s.report(&query, top_n)).await?;
    let text = report.to_text();
    Ok(Json(ReportView { report, text }))
}

async fn post_undo(State(s): State<Arc<Session>>) -> ApiResult<UndoView> {
    let snap = blocking({
        let s = s.clone();
        move || s.undo()
    })
    .await?;
    Ok(Json(UndoView {
        undo_depth: snap.undo_depth,
        topics: s.summaries(&snap.version),
    }))
}
