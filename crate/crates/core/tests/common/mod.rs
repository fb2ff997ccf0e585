#![allow(dead_code)]

use intopic_core::corpus::{
    generate_synthetic_corpus, synthetic_embeddings, SyntheticConfig, SyntheticCorpus,
};
use intopic_core::{BowCorpus, EtmConfig};
use ndarray::Array2;

pub struct Planted {
    pub synth: SyntheticCorpus,
    pub bow: BowCorpus,
    pub rho: Array2<f64>,
}

pub fn planted(seed: u64, concentration: f64) -> Planted {
    let synth = generate_synthetic_corpus(&SyntheticConfig {
        concentration,
        seed,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let bow = synth.bow();
    let rho = synthetic_embeddings(&synth, 300, seed)
        .align_to_vocabulary(&bow.vocab, Default::default())
        .unwrap();
    Planted { synth, bow, rho }
}

/// Full-size network with a learning rate slow enough that the loss keeps
/// descending through all 200 epochs on the 300-document corpus.
pub fn recovery_config(seed: u64) -> EtmConfig {
    EtmConfig {
        topics: 3,
        lr: 2e-4,
        seed,
        ..EtmConfig::default()
    }
}

/// Means of consecutive 10-epoch windows starting at epoch 10.
pub fn window_means(curve: &[f64]) -> Vec<f64> {
    curve[10..]
        .chunks_exact(10)
        .map(|w| w.iter().sum::<f64>() / 10.0)
        .collect()
}
