mod common;

use intopic_core::etm::{train, write_model, EtmError};
use intopic_core::eval::{assignment_accuracy, match_topics};
use intopic_core::EtmConfig;
use ndarray::Array2;

use common::{planted, recovery_config, window_means};

#[test]
fn planted_recovery() {
    let p = planted(7, 5.0);
    let model = train(&p.bow, p.rho.clone(), &recovery_config(7)).unwrap();
    assert_eq!(model.loss_curve.len(), 200);
    assert!(model.loss_curve.iter().all(|l| l.is_finite()));

    let windows = window_means(&model.loss_curve);
    for (i, w) in windows.windows(2).enumerate() {
        assert!(w[1] <= w[0], "window {} rose: {} -> {}", i + 1, w[0], w[1]);
    }

    let mapping = match_topics(&model.beta, &p.synth.planted_beta, &p.synth.words, 10);
    let theta = model.infer_corpus(&p.bow);
    let acc = assignment_accuracy(&theta, &p.synth.assignments, &mapping);
    assert!(acc >= 0.7, "accuracy {acc}");

    // block-1 documents land on the topic matched to block 1
    let t1 = mapping.iter().position(|m| *m == Some(1)).unwrap();
    let docs: Vec<usize> = (0..p.bow.num_docs())
        .filter(|&d| p.synth.assignments[d] == 1)
        .collect();
    let hits = docs
        .iter()
        .filter(|&&d| {
            let post = model.infer_theta(&p.bow.dense_row(d));
            let best = (0..3)
                .max_by(|&a, &b| post.theta[a].total_cmp(&post.theta[b]))
                .unwrap();
            best == t1
        })
        .count();
    assert!(
        hits as f64 >= 0.7 * docs.len() as f64,
        "{hits}/{}",
        docs.len()
    );
}

#[test]
fn same_seed_gives_identical_checkpoints() {
    let p = planted(3, 5.0);
    let cfg = EtmConfig {
        topics: 3,
        hidden: 32,
        embedding_dim: 300,
        epochs: 5,
        seed: 42,
        ..EtmConfig::default()
    };
    let bytes = |m| {
        let mut b = Vec::new();
        write_model(m, &mut b).unwrap();
        b
    };
    let a = train(&p.bow, p.rho.clone(), &cfg).unwrap();
    let b = train(&p.bow, p.rho.clone(), &cfg).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    let c = train(&p.bow, p.rho.clone(), &EtmConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(bytes(&a), bytes(&c));
}

#[test]
fn inference_is_a_distribution() {
    let p = planted(5, 5.0);
    let cfg = EtmConfig {
        topics: 3,
        hidden: 16,
        epochs: 2,
        ..EtmConfig::default()
    };
    let model = train(&p.bow, p.rho.clone(), &cfg).unwrap();
    for d in 0..10 {
        let post = model.infer_theta(&p.bow.dense_row(d));
        assert!((post.theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(post.delta, post.mu);
    }
    // empty document: softmax of the encoder at zero input
    let empty = model.infer_theta(&vec![0.0; p.bow.vocab_size()]);
    let (mu, _) = model.params.encode(&vec![0.0; p.bow.vocab_size()]);
    let z: f64 = mu.iter().map(|m| m.exp()).sum();
    for (t, m) in empty.theta.iter().zip(&mu) {
        assert!((t - m.exp() / z).abs() < 1e-12);
    }
}

#[test]
fn training_input_errors() {
    let p = planted(5, 5.0);
    let cfg = EtmConfig {
        topics: 3,
        hidden: 8,
        epochs: 1,
        ..EtmConfig::default()
    };
    let short = Array2::zeros((p.bow.vocab_size() - 1, 300));
    assert!(matches!(
        train(&p.bow, short, &cfg),
        Err(EtmError::Shape(_))
    ));
    let bad = EtmConfig {
        topics: 1,
        ..cfg.clone()
    };
    assert!(matches!(
        train(&p.bow, p.rho.clone(), &bad),
        Err(EtmError::Config(_))
    ));
    let mut nan = p.rho.clone();
    nan[[0, 0]] = f64::NAN;
    assert!(matches!(
        train(&p.bow, nan, &cfg),
        Err(EtmError::NonFiniteLoss { epoch: 0, batch: 0 })
    ));
}
