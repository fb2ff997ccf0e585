use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::grad::grad_elbo;
use super::{compute_beta, Adam, AdamState, EtmConfig, EtmError, EtmModel, EtmParams};
use crate::corpus::BowCorpus;

/// Trains a model with a generator seeded from `config.seed`.
pub fn train(
    corpus: &BowCorpus,
    rho: Array2<f64>,
    config: &EtmConfig,
) -> Result<EtmModel, EtmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    train_with_rng(corpus, rho, config, &mut rng)
}

/// Seeded initialization, shuffled mini-batches every epoch and one noise
/// draw per document per step. Empty documents are skipped.
pub fn train_with_rng<R: Rng>(
    corpus: &BowCorpus,
    rho: Array2<f64>,
    config: &EtmConfig,
    rng: &mut R,
) -> Result<EtmModel, EtmError> {
    config.validate()?;
    if rho.nrows() != corpus.vocab_size() {
        return Err(EtmError::Shape(format!(
            "rho has {} rows for a vocabulary of {}",
            rho.nrows(),
            corpus.vocab_size()
        )));
    }
    if rho.ncols() != config.embedding_dim {
        return Err(EtmError::Shape(format!(
            "embeddings have dimension {}, config says {}",
            rho.ncols(),
            config.embedding_dim
        )));
    }
    let mut docs: Vec<usize> = (0..corpus.num_docs())
        .filter(|&d| corpus.doc_lengths[d] > 0)
        .collect();
    if docs.is_empty() {
        return Err(EtmError::EmptyCorpus);
    }

    let mut params = EtmParams::init(rho, config.topics, config.hidden, rng);
    let adam = Adam::new(config.lr);
    let mut state = AdamState::new(&mut params, config.train_rho);
    let mut loss_curve = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        docs.shuffle(rng);
        let mut epoch_loss = 0.0;
        for (batch_no, batch) in docs.chunks(config.batch_size).enumerate() {
            let rows: Vec<&[(u32, u32)]> = batch.iter().map(|&d| corpus.row(d)).collect();
            let noise: Vec<Vec<f64>> = batch
                .iter()
                .map(|_| {
                    (0..config.topics)
                        .map(|_| rng.sample(StandardNormal))
                        .collect()
                })
                .collect();
            let (grads, loss) = grad_elbo(&params, &rows, &noise, config.train_rho);
            if !loss.is_finite() {
                return Err(EtmError::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                });
            }
            state.step(&adam, &mut params, &grads);
            epoch_loss += loss * batch.len() as f64;
        }
        loss_curve.push(epoch_loss / docs.len() as f64);
    }

    let beta = compute_beta(&params)?;
    Ok(EtmModel {
        config: config.clone(),
        vocab: corpus.vocab.words().to_vec(),
        params,
        beta,
        loss_curve,
    })
}
