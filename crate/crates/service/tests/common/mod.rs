#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use intopic_core::corpus::{
    generate_synthetic_corpus, synthetic_embeddings, SyntheticConfig, SyntheticCorpus,
};
use intopic_core::etm::train;
use intopic_core::eval::match_topics;
use intopic_core::{BowCorpus, EtmConfig, EtmModel};
use intopic_service::{Session, SessionOptions};
use serde_json::Value;
use tower::ServiceExt;

pub struct Fixture {
    pub synth: SyntheticCorpus,
    pub bow: Arc<BowCorpus>,
    pub model: EtmModel,
    /// Learned topic matched to planted block 0.
    pub block0_topic: usize,
}

/// Planted corpus with mixed documents (concentration 1) and a full-size
/// model; trained once per test binary.
pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let synth = generate_synthetic_corpus(&SyntheticConfig {
            concentration: 1.0,
            seed: 5,
            ..SyntheticConfig::default()
        })
        .unwrap();
        let bow = synth.bow();
        let rho = synthetic_embeddings(&synth, 300, 5)
            .align_to_vocabulary(&bow.vocab, Default::default())
            .unwrap();
        let cfg = EtmConfig {
            topics: 3,
            seed: 5,
            ..EtmConfig::default()
        };
        let model = train(&bow, rho, &cfg).unwrap();
        let mapping = match_topics(&model.beta, &synth.planted_beta, &synth.words, 10);
        let block0_topic = mapping.iter().position(|m| *m == Some(0)).unwrap();
        Fixture {
            synth,
            bow: Arc::new(bow),
            model,
            block0_topic,
        }
    })
}

pub fn session() -> Arc<Session> {
    session_with(SessionOptions::default())
}

pub fn session_with(options: SessionOptions) -> Arc<Session> {
    let f = fixture();
    Arc::new(Session::new(&f.model, f.bow.clone(), options).unwrap())
}

pub async fn send(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}
