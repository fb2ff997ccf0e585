//! Labeling a planted topic with a word from another block.

mod common;

use std::sync::Arc;

use intopic_core::corpus::Tokenizer;
use intopic_core::etm::train;
use intopic_core::eval::{match_topics, ranking_report, Bm25Index};
use intopic_core::interact::{InteractionContext, RelabelMode, RelabelRequest};
use intopic_core::EtmConfig;

#[test]
fn block1_label_surfaces_block1_documents() {
    let p = common::planted(5, 1.0);
    let model = train(
        &p.bow,
        p.rho.clone(),
        &EtmConfig {
            topics: 3,
            seed: 5,
            ..EtmConfig::default()
        },
    )
    .unwrap();
    let mapping = match_topics(&model.beta, &p.synth.planted_beta, &p.synth.words, 10);
    let t0 = mapping.iter().position(|m| *m == Some(0)).unwrap();
    let bow = Arc::new(p.bow.clone());
    let ctx = InteractionContext::new(&model, bow.clone()).unwrap();
    let v0 = ctx.initial_version(&model);
    let (v1, rec) = ctx
        .relabel(
            &v0,
            &RelabelRequest::new(t0, "b01w00", 0.5, RelabelMode::EmbeddingConvex),
        )
        .unwrap();
    let index = Bm25Index::build(&bow, Tokenizer::english()).unwrap();
    let report = ranking_report(
        "b01w00 b01w01 b01w02",
        &ctx.topic_states(&v0),
        &ctx.topic_states(&v1),
        &index,
        5,
    )
    .unwrap();
    let t = report.topic(t0).unwrap();
    assert!(t.after.unwrap() > t.before.unwrap(), "{t:?}");
    assert!(!rec.new_documents.is_empty());
    assert_eq!(t.new_documents, rec.new_documents.len());
    // untouched topics keep their rows
    for k in (0..3).filter(|&k| k != t0) {
        assert!(v1.beta.shares_row(&v0.beta, k));
    }
}
