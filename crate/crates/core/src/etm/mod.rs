//! Desk-scale embedded topic model.
//!
//! Topic `k` is a vector `alpha_k` in the word-embedding space; its word
//! distribution is `beta_k = softmax(rho . alpha_k)` over the vocabulary.
//! Documents are encoded by a two-layer softplus network into a Gaussian over
//! topic logits `delta`, and `theta = softmax(delta)` mixes the topic rows.
//! Training maximizes the usual ELBO with one reparameterized sample per
//! document, using hand-derived gradients (see [`grad`]) and Adam.

mod adam;
mod checkpoint;
mod config;
pub mod grad;
mod train;

use std::cmp::Ordering;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::corpus::BowCorpus;
use crate::math::{softmax, softplus};

pub use adam::{Adam, AdamState};
pub use checkpoint::{
    load_model, read_model, save_model, write_model, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use config::{EtmConfig, CONFIG_KEYS};
pub use train::{train, train_with_rng};

/// Added to the per-word mixture probability inside the reconstruction log.
pub const RECON_EPS: f64 = 1e-10;
pub const LOGVAR_MIN: f64 = -10.0;
pub const LOGVAR_MAX: f64 = 10.0;
/// Standard deviation of the Gaussian used to initialize encoder weights and
/// topic embeddings.
pub const INIT_SCALE: f64 = 0.02;

#[derive(Debug, Error)]
pub enum EtmError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite topic logits for topic {topic}")]
    NonFiniteLogits { topic: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("corpus has no non-empty documents")]
    EmptyCorpus,
    #[error("checkpoint format: {0}")]
    Format(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Encoder network: normalized bag of words -> softplus hidden layer -> mu and
/// log-variance heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    /// V x H; row `v` holds the input weights of word `v`.
    pub w_in: Array2<f64>,
    pub b_in: Array1<f64>,
    /// K x H
    pub w_mu: Array2<f64>,
    pub b_mu: Array1<f64>,
    /// K x H
    pub w_lv: Array2<f64>,
    pub b_lv: Array1<f64>,
}

impl Encoder {
    pub fn zeros(vocab: usize, hidden: usize, topics: usize) -> Self {
        Self {
            w_in: Array2::zeros((vocab, hidden)),
            b_in: Array1::zeros(hidden),
            w_mu: Array2::zeros((topics, hidden)),
            b_mu: Array1::zeros(topics),
            w_lv: Array2::zeros((topics, hidden)),
            b_lv: Array1::zeros(topics),
        }
    }

    pub fn hidden(&self) -> usize {
        self.b_in.len()
    }

    /// Forward pass over a sparse normalized input `(word, weight)`.
    pub(crate) fn forward(&self, input: &[(usize, f64)]) -> EncoderPass {
        let mut pre = self.b_in.to_vec();
        for &(v, x) in input {
            let row = self.w_in.row(v);
            for (p, w) in pre.iter_mut().zip(row.iter()) {
                *p += x * w;
            }
        }
        let hidden: Vec<f64> = pre.iter().map(|&a| softplus(a)).collect();
        let hv = Array1::from(hidden.clone());
        let mu = (self.w_mu.dot(&hv) + &self.b_mu).to_vec();
        let lv_raw = (self.w_lv.dot(&hv) + &self.b_lv).to_vec();
        let logvar = lv_raw
            .iter()
            .map(|&x| x.clamp(LOGVAR_MIN, LOGVAR_MAX))
            .collect();
        EncoderPass {
            pre,
            hidden,
            mu,
            lv_raw,
            logvar,
        }
    }
}

/// Intermediate values of one encoder pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct EncoderPass {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub mu: Vec<f64>,
    pub lv_raw: Vec<f64>,
    pub logvar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtmParams {
    /// V x L word embeddings.
    pub rho: Array2<f64>,
    /// K x L topic embeddings.
    pub alpha: Array2<f64>,
    pub encoder: Encoder,
}

impl EtmParams {
    /// Gaussian(0, 0.02) encoder weights and topic embeddings, zero biases.
    pub fn init<R: Rng>(rho: Array2<f64>, topics: usize, hidden: usize, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, INIT_SCALE).expect("valid scale");
        let (vocab, dim) = rho.dim();
        let mut encoder = Encoder::zeros(vocab, hidden, topics);
        encoder.w_in.mapv_inplace(|_| normal.sample(rng));
        encoder.w_mu.mapv_inplace(|_| normal.sample(rng));
        encoder.w_lv.mapv_inplace(|_| normal.sample(rng));
        let alpha = Array2::from_shape_simple_fn((topics, dim), || normal.sample(rng));
        Self {
            rho,
            alpha,
            encoder,
        }
    }

    pub fn topics(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.rho.nrows()
    }

    pub fn embedding_dim(&self) -> usize {
        self.rho.ncols()
    }

    pub fn check_shapes(&self) -> Result<(), EtmError> {
        let (v, l) = self.rho.dim();
        let k = self.alpha.nrows();
        let h = self.encoder.hidden();
        let e = &self.encoder;
        let ok = self.alpha.ncols() == l
            && e.w_in.dim() == (v, h)
            && e.w_mu.dim() == (k, h)
            && e.w_lv.dim() == (k, h)
            && e.b_mu.len() == k
            && e.b_lv.len() == k;
        if ok {
            Ok(())
        } else {
            Err(EtmError::Shape(format!(
                "rho {:?}, alpha {:?}, w_in {:?}, w_mu {:?}, w_lv {:?}",
                self.rho.dim(),
                self.alpha.dim(),
                e.w_in.dim(),
                e.w_mu.dim(),
                e.w_lv.dim()
            )))
        }
    }

    /// `(mu, logvar)` for a dense normalized bag-of-words vector.
    pub fn encode(&self, bow_row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let input: Vec<(usize, f64)> = bow_row
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(v, &x)| (v, x))
            .collect();
        let pass = self.encoder.forward(&input);
        (pass.mu, pass.logvar)
    }
}

/// Normalizes a sparse count row to word frequencies.
pub(crate) fn normalized(row: &[(u32, u32)]) -> Vec<(usize, f64)> {
    let n: u32 = row.iter().map(|&(_, c)| c).sum();
    if n == 0 {
        return Vec::new();
    }
    let n = n as f64;
    row.iter()
        .map(|&(w, c)| (w as usize, c as f64 / n))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub mu: Vec<f64>,
    pub logvar: Vec<f64>,
    pub delta: Vec<f64>,
    pub theta: Vec<f64>,
}

/// `delta = mu + exp(logvar / 2) * noise`, or `delta = mu` without noise;
/// `theta = softmax(delta)`.
pub fn reparameterize(mu: &[f64], logvar: &[f64], noise: Option<&[f64]>) -> Posterior {
    assert_eq!(mu.len(), logvar.len());
    let delta: Vec<f64> = match noise {
        None => mu.to_vec(),
        Some(eps) => {
            assert_eq!(eps.len(), mu.len());
            mu.iter()
                .zip(logvar)
                .zip(eps)
                .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
                .collect()
        }
    };
    let theta = softmax(&delta);
    Posterior {
        mu: mu.to_vec(),
        logvar: logvar.to_vec(),
        delta,
        theta,
    }
}

/// Topic-word distributions, one probability row per topic.
///
/// Rows are reference counted so edited versions of a model share the rows
/// they did not touch.
#[derive(Debug, Clone)]
pub struct TopicWordDist {
    rows: Vec<Arc<[f64]>>,
}

impl PartialEq for TopicWordDist {
    fn eq(&self, other: &Self) -> bool {
        self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a[..] == b[..])
    }
}

impl TopicWordDist {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self {
            rows: rows.into_iter().map(Arc::from).collect(),
        }
    }

    pub fn topics(&self) -> usize {
        self.rows.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.rows[topic]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(|r| &r[..])
    }

    /// Copy with row `topic` replaced; other rows are shared.
    pub fn with_row(&self, topic: usize, row: Vec<f64>) -> Self {
        let mut rows = self.rows.clone();
        rows[topic] = Arc::from(row);
        Self { rows }
    }

    /// True when `topic` shares storage between the two distributions.
    pub fn shares_row(&self, other: &Self, topic: usize) -> bool {
        Arc::ptr_eq(&self.rows[topic], &other.rows[topic])
    }

    pub fn to_array(&self) -> Array2<f64> {
        let (k, v) = (self.topics(), self.vocab_size());
        Array2::from_shape_fn((k, v), |(i, j)| self.rows[i][j])
    }
}

/// `softmax(rho . alpha_row)` with max subtraction.
pub fn beta_row(rho: &Array2<f64>, alpha_row: &[f64]) -> Option<Vec<f64>> {
    let logits = rho.dot(&ndarray::ArrayView1::from(alpha_row));
    if logits.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some(softmax(logits.as_slice().expect("contiguous")))
}

pub fn compute_beta(params: &EtmParams) -> Result<TopicWordDist, EtmError> {
    let rows = params
        .alpha
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            beta_row(&params.rho, &a.to_vec()).ok_or(EtmError::NonFiniteLogits { topic: k })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TopicWordDist::from_rows(rows))
}

/// Row-wise softmax of `alpha . rho^T`, used inside training.
pub(crate) fn beta_matrix(params: &EtmParams) -> Array2<f64> {
    let mut logits = params.alpha.dot(&params.rho.t());
    for mut row in logits.rows_mut() {
        let p = softmax(row.as_slice().expect("contiguous"));
        row.assign(&Array1::from(p));
    }
    logits
}

/// Decomposed negative ELBO of one document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Elbo {
    pub recon: f64,
    pub kl: f64,
    pub loss: f64,
}

/// KL divergence of N(mu, exp(logvar)) from the standard normal.
pub fn kl_standard_normal(mu: &[f64], logvar: &[f64]) -> f64 {
    0.5 * mu
        .iter()
        .zip(logvar)
        .map(|(m, lv)| lv.exp() + m * m - 1.0 - lv)
        .sum::<f64>()
}

/// Reconstruction term `sum_v n_v log(sum_k theta_k beta_kv + eps)`.
pub fn reconstruction(counts: &[(usize, f64)], theta: &[f64], beta: &TopicWordDist) -> f64 {
    counts
        .iter()
        .map(|&(v, n)| {
            let p: f64 = theta
                .iter()
                .enumerate()
                .map(|(k, t)| t * beta.row(k)[v])
                .sum();
            n * (p + RECON_EPS).ln()
        })
        .sum()
}

/// ELBO terms for one document given dense counts.
pub fn elbo(
    doc_counts: &[f64],
    params: &EtmParams,
    beta: &TopicWordDist,
    noise: Option<&[f64]>,
) -> Elbo {
    let total: f64 = doc_counts.iter().sum();
    let sparse: Vec<(usize, f64)> = doc_counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(v, &c)| (v, c))
        .collect();
    let input: Vec<(usize, f64)> = if total > 0.0 {
        sparse.iter().map(|&(v, c)| (v, c / total)).collect()
    } else {
        Vec::new()
    };
    let pass = params.encoder.forward(&input);
    let post = reparameterize(&pass.mu, &pass.logvar, noise);
    let recon = reconstruction(&sparse, &post.theta, beta);
    let kl = kl_standard_normal(&pass.mu, &pass.logvar);
    Elbo {
        recon,
        kl,
        loss: -recon + kl,
    }
}

/// A trained model and what it was trained on.
#[derive(Debug, Clone)]
pub struct EtmModel {
    pub config: EtmConfig,
    pub vocab: Vec<String>,
    pub params: EtmParams,
    pub beta: TopicWordDist,
    /// Mean per-document loss of every epoch.
    pub loss_curve: Vec<f64>,
}

impl EtmModel {
    pub fn topics(&self) -> usize {
        self.params.topics()
    }

    /// Deterministic posterior (`delta = mu`) for a dense count vector.
    pub fn infer_theta(&self, doc_counts: &[f64]) -> Posterior {
        let total: f64 = doc_counts.iter().sum();
        let x: Vec<f64> = if total > 0.0 {
            doc_counts.iter().map(|c| c / total).collect()
        } else {
            vec![0.0; doc_counts.len()]
        };
        let (mu, logvar) = self.params.encode(&x);
        reparameterize(&mu, &logvar, None)
    }

    /// D x K matrix of deterministic topic proportions.
    pub fn infer_corpus(&self, corpus: &BowCorpus) -> Array2<f64> {
        infer_corpus(&self.params, corpus)
    }

    pub fn top_words(&self, topic: usize, n: usize) -> Vec<String> {
        top_words(self.beta.row(topic), &self.vocab, n)
    }
}

pub fn infer_corpus(params: &EtmParams, corpus: &BowCorpus) -> Array2<f64> {
    let k = params.topics();
    let mut out = Array2::zeros((corpus.num_docs(), k));
    for d in 0..corpus.num_docs() {
        let pass = params.encoder.forward(&normalized(corpus.row(d)));
        let theta = softmax(&pass.mu);
        out.row_mut(d).assign(&Array1::from(theta));
    }
    out
}

/// Indices of the `n` largest entries, ties broken by word.
pub fn top_word_ids(row: &[f64], words: &[String], n: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..row.len()).collect();
    let cmp = |a: &usize, b: &usize| {
        row[*b]
            .partial_cmp(&row[*a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| words[*a].cmp(&words[*b]))
    };
    let n = n.min(ids.len());
    if n == 0 {
        return Vec::new();
    }
    if n < ids.len() {
        ids.select_nth_unstable_by(n - 1, cmp);
        ids.truncate(n);
    }
    ids.sort_by(cmp);
    ids
}

pub fn top_words(row: &[f64], words: &[String], n: usize) -> Vec<String> {
    top_word_ids(row, words, n)
        .into_iter()
        .map(|i| words[i].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i:02}")).collect()
    }

    fn small_params(seed: u64) -> EtmParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = Array2::from_shape_simple_fn((6, 4), || rng.random_range(-1.0..1.0));
        let mut p = EtmParams::init(rho, 3, 5, &mut rng);
        p.alpha.mapv_inplace(|x| x * 50.0);
        p
    }

    #[test]
    fn constant_logits_give_uniform_beta() {
        let rho = Array2::from_elem((4, 2), 1.0);
        let params = EtmParams {
            rho,
            alpha: array![[0.3, -0.2]],
            encoder: Encoder::zeros(4, 2, 1),
        };
        let beta = compute_beta(&params).unwrap();
        assert!(beta.row(0).iter().all(|&p| p == 0.25));
    }

    #[test]
    fn hand_computed_softmax() {
        // logits (ln 2, 0, 0) from a 1-d embedding
        let rho = array![[1.0], [0.0], [0.0]];
        let params = EtmParams {
            rho,
            alpha: array![[2f64.ln()]],
            encoder: Encoder::zeros(3, 1, 1),
        };
        let beta = compute_beta(&params).unwrap();
        let row = beta.row(0);
        assert!((row[0] - 0.5).abs() < 1e-15);
        assert!((row[1] - 0.25).abs() < 1e-15);
        assert!((row[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn non_finite_logits_rejected() {
        let mut params = small_params(1);
        params.alpha[[1, 0]] = f64::NAN;
        assert!(matches!(
            compute_beta(&params),
            Err(EtmError::NonFiniteLogits { topic: 1 })
        ));
    }

    #[test]
    fn zero_weights_encode_to_zero() {
        let enc = Encoder::zeros(3, 4, 2);
        let params = EtmParams {
            rho: Array2::zeros((3, 2)),
            alpha: Array2::zeros((2, 2)),
            encoder: enc,
        };
        let (mu, lv) = params.encode(&[0.0, 0.0, 0.0]);
        assert_eq!(mu, vec![0.0, 0.0]);
        assert_eq!(lv, vec![0.0, 0.0]);
    }

    #[test]
    fn encode_is_deterministic() {
        let p = small_params(4);
        let x = [0.5, 0.0, 0.25, 0.25, 0.0, 0.0];
        assert_eq!(p.encode(&x), p.encode(&x));
    }

    /// 2 words, 1 hidden unit... spelled out by hand.
    #[test]
    fn encode_matches_hand_forward_pass() {
        let enc = Encoder {
            w_in: array![[1.0, -1.0], [2.0, 0.5]],
            b_in: array![0.0, 0.1],
            w_mu: array![[1.0, 0.0], [0.5, -1.0]],
            b_mu: array![0.2, 0.0],
            w_lv: array![[0.0, 2.0], [1.0, 1.0]],
            b_lv: array![-0.5, 0.0],
        };
        let params = EtmParams {
            rho: Array2::zeros((2, 1)),
            alpha: Array2::zeros((2, 1)),
            encoder: enc,
        };
        let x = [0.25, 0.75];
        // pre = (0.25*1 + 0.75*2, 0.25*-1 + 0.75*0.5 + 0.1) = (1.75, 0.225)
        let h0 = (1.0 + 1.75f64.exp()).ln();
        let h1 = (1.0 + 0.225f64.exp()).ln();
        let mu = [h0 + 0.2, 0.5 * h0 - h1];
        let lv = [2.0 * h1 - 0.5, h0 + h1];
        let (got_mu, got_lv) = params.encode(&x);
        for i in 0..2 {
            assert!((got_mu[i] - mu[i]).abs() < 1e-12);
            assert!((got_lv[i] - lv[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn logvar_is_clamped() {
        let mut enc = Encoder::zeros(1, 1, 2);
        enc.b_lv = array![50.0, -50.0];
        let params = EtmParams {
            rho: Array2::zeros((1, 1)),
            alpha: Array2::zeros((2, 1)),
            encoder: enc,
        };
        let (_, lv) = params.encode(&[1.0]);
        assert_eq!(lv, vec![LOGVAR_MAX, LOGVAR_MIN]);
    }

    #[test]
    fn reparameterize_cases() {
        let mu = [0.3, -1.2];
        let p = reparameterize(&mu, &[0.7, -0.4], None);
        assert_eq!(p.delta, mu.to_vec());
        let z = [0.5, -2.0];
        let q = reparameterize(&mu, &[0.0, 0.0], Some(&z));
        assert_eq!(q.delta, vec![0.8, -3.2]);
        let s = reparameterize(&[0.0, 0.0], &[0.0, 0.0], None);
        assert_eq!(s.theta, vec![0.5, 0.5]);
    }

    #[test]
    fn kl_zero_at_prior() {
        assert_eq!(kl_standard_normal(&[0.0; 4], &[0.0; 4]), 0.0);
    }

    #[test]
    fn uniform_beta_recon() {
        let v = 5;
        let beta = TopicWordDist::from_rows(vec![vec![0.2; v]; 2]);
        let counts = [(0, 2.0), (3, 1.0), (4, 4.0)];
        let r = reconstruction(&counts, &[0.9, 0.1], &beta);
        let want = -7.0 * (5f64).ln();
        assert!((r - want).abs() < 1e-8, "{r} vs {want}");
    }

    /// 3-word document, K=2: every term computed by hand from fixed weights.
    #[test]
    fn elbo_matches_hand_computation() {
        let params = EtmParams {
            rho: Array2::zeros((3, 1)),
            alpha: Array2::zeros((2, 1)),
            encoder: Encoder {
                w_in: Array2::zeros((3, 1)),
                b_in: array![0.0],
                w_mu: Array2::zeros((2, 1)),
                b_mu: array![1.0, 0.0],
                w_lv: Array2::zeros((2, 1)),
                b_lv: array![0.0, 0.5],
            },
        };
        let beta = TopicWordDist::from_rows(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.1, 0.8]]);
        let counts = [1.0, 0.0, 2.0];
        let noise = [0.0, 1.0];
        // delta = (1, 0 + exp(0.25)); theta = softmax(delta)
        let d1 = 0.25f64.exp();
        let z = 1f64.exp() + d1.exp();
        let (t0, t1) = (1f64.exp() / z, d1.exp() / z);
        let recon = (0.5 * t0 + 0.1 * t1 + 1e-10).ln() + 2.0 * (0.2 * t0 + 0.8 * t1 + 1e-10).ln();
        let kl = 0.5 * ((1.0 + 1.0 - 1.0 - 0.0) + (0.5f64.exp() + 0.0 - 1.0 - 0.5));
        let got = elbo(&counts, &params, &beta, Some(&noise));
        assert!((got.recon - recon).abs() < 1e-9);
        assert!((got.kl - kl).abs() < 1e-9);
        assert!((got.loss - (kl - recon)).abs() < 1e-9);
    }

    #[test]
    fn top_words_tie_break_and_one_hot() {
        let w = words(4);
        assert_eq!(top_words(&[0.25; 4], &w, 2), vec!["w00", "w01"]);
        assert_eq!(top_words(&[0.0, 0.0, 1.0, 0.0], &w, 1), vec!["w02"]);
        assert_eq!(top_words(&[0.1, 0.2], &w[..2], 5).len(), 2);
    }

    #[test]
    fn top_words_match_full_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = words(40);
        let row: Vec<f64> = (0..40).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut oracle: Vec<usize> = (0..40).collect();
        oracle.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(w[a].cmp(&w[b])));
        let want: Vec<String> = oracle[..10].iter().map(|&i| w[i].clone()).collect();
        assert_eq!(top_words(&row, &w, 10), want);
    }

    #[test]
    fn beta_row_bits_match_compute_beta() {
        let p = small_params(9);
        let beta = compute_beta(&p).unwrap();
        for k in 0..3 {
            let row = beta_row(&p.rho, &p.alpha.row(k).to_vec()).unwrap();
            assert_eq!(row.as_slice(), beta.row(k));
        }
    }

    proptest! {
        #[test]
        fn beta_rows_and_theta_are_distributions(seed in 0u64..500) {
            let p = small_params(seed);
            let beta = compute_beta(&p).unwrap();
            for row in beta.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|&x| x >= 0.0));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu: Vec<f64> = (0..3).map(|_| rng.random_range(-20.0..20.0)).collect();
            let post = reparameterize(&mu, &[0.0; 3], None);
            prop_assert!((post.theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(post.theta.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn kl_non_negative(mu in proptest::collection::vec(-5.0f64..5.0, 4),
                           lv in proptest::collection::vec(-10.0f64..10.0, 4)) {
            let kl = kl_standard_normal(&mu, &lv);
            prop_assert!(kl >= -1e-12);
            let at_prior = mu.iter().all(|&m| m == 0.0) && lv.iter().all(|&l| l == 0.0);
            if !at_prior {
                prop_assert!(kl > 0.0);
            }
        }
    }
}
