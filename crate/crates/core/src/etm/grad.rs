//! Analytic gradients of the mean negative ELBO over a mini-batch.
//!
//! Per document, with `x = n / N` and one noise draw `e`:
//!
//! ```text
//! a = W_in^T x + b_in        h = softplus(a)
//! mu = W_mu h + b_mu         lv = clamp(W_lv h + b_lv, -10, 10)
//! delta = mu + exp(lv/2) e   theta = softmax(delta)
//! p_v = sum_k theta_k beta_kv,  beta_k = softmax(rho alpha_k)
//! loss = -sum_v n_v log(p_v + eps) + 1/2 sum_k (exp(lv_k) + mu_k^2 - 1 - lv_k)
//! ```
//!
//! The backward pass follows the same chain in reverse; the topic-word
//! gradient is accumulated over the whole batch before it is pushed through
//! the row softmax into `alpha` (and `rho` when it is trained).

use ndarray::{Array2, Axis};

use super::{beta_matrix, normalized, Encoder, EtmParams, RECON_EPS};
use crate::math::{sigmoid, softmax};

/// Gradients with the same layout as [`EtmParams`]. `rho` is `None` when the
/// word embeddings are frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct EtmGrads {
    pub rho: Option<Array2<f64>>,
    pub alpha: Array2<f64>,
    pub encoder: Encoder,
}

/// Mean negative ELBO over `rows` with one noise vector per row.
pub fn batch_loss(params: &EtmParams, rows: &[&[(u32, u32)]], noise: &[Vec<f64>]) -> f64 {
    assert_eq!(rows.len(), noise.len());
    let beta = beta_matrix(params);
    let b = rows.len() as f64;
    rows.iter()
        .zip(noise)
        .map(|(row, eps)| {
            let pass = params.encoder.forward(&normalized(row));
            let delta: Vec<f64> = pass
                .mu
                .iter()
                .zip(&pass.logvar)
                .zip(eps)
                .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
                .collect();
            let theta = softmax(&delta);
            let recon: f64 = row
                .iter()
                .map(|&(v, n)| {
                    let p: f64 = theta
                        .iter()
                        .enumerate()
                        .map(|(k, t)| t * beta[[k, v as usize]])
                        .sum();
                    n as f64 * (p + RECON_EPS).ln()
                })
                .sum();
            let kl = super::kl_standard_normal(&pass.mu, &pass.logvar);
            kl - recon
        })
        .sum::<f64>()
        / b
}

/// Mean batch loss and its exact gradient. `noise` must be the draws used for
/// the forward pass.
pub fn grad_elbo(
    params: &EtmParams,
    rows: &[&[(u32, u32)]],
    noise: &[Vec<f64>],
    train_rho: bool,
) -> (EtmGrads, f64) {
    assert_eq!(rows.len(), noise.len());
    let k_topics = params.topics();
    let vocab = params.vocab_size();
    let hidden = params.encoder.hidden();
    let b = rows.len() as f64;

    let beta = beta_matrix(params);
    let mut d_beta = Array2::<f64>::zeros((k_topics, vocab));
    let mut enc = Encoder::zeros(vocab, hidden, k_topics);
    let mut total_loss = 0.0;

    for (row, eps) in rows.iter().zip(noise) {
        let input = normalized(row);
        let pass = params.encoder.forward(&input);
        let std: Vec<f64> = pass.logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
        let delta: Vec<f64> = (0..k_topics)
            .map(|k| pass.mu[k] + std[k] * eps[k])
            .collect();
        let theta = softmax(&delta);

        // reconstruction: dL/dp_v = -n_v / (p_v + eps) / B
        let mut d_theta = vec![0.0; k_topics];
        let mut recon = 0.0;
        for &(v, n) in row.iter() {
            let v = v as usize;
            let n = n as f64;
            let p: f64 = (0..k_topics).map(|k| theta[k] * beta[[k, v]]).sum();
            recon += n * (p + RECON_EPS).ln();
            let g = -n / (p + RECON_EPS) / b;
            for k in 0..k_topics {
                d_theta[k] += g * beta[[k, v]];
                d_beta[[k, v]] += g * theta[k];
            }
        }
        let kl = super::kl_standard_normal(&pass.mu, &pass.logvar);
        total_loss += kl - recon;

        // softmax backward
        let inner: f64 = theta.iter().zip(&d_theta).map(|(t, g)| t * g).sum();
        let d_delta: Vec<f64> = (0..k_topics)
            .map(|k| theta[k] * (d_theta[k] - inner))
            .collect();

        let d_mu: Vec<f64> = (0..k_topics).map(|k| d_delta[k] + pass.mu[k] / b).collect();
        let d_lv: Vec<f64> = (0..k_topics)
            .map(|k| {
                let raw = pass.lv_raw[k];
                if !(super::LOGVAR_MIN..=super::LOGVAR_MAX).contains(&raw) {
                    return 0.0;
                }
                d_delta[k] * eps[k] * 0.5 * std[k] + 0.5 * (pass.logvar[k].exp() - 1.0) / b
            })
            .collect();

        let mut d_hidden = vec![0.0; hidden];
        for k in 0..k_topics {
            enc.b_mu[k] += d_mu[k];
            enc.b_lv[k] += d_lv[k];
            let mut gw_mu = enc.w_mu.row_mut(k);
            let mut gw_lv = enc.w_lv.row_mut(k);
            let w_mu = params.encoder.w_mu.row(k);
            let w_lv = params.encoder.w_lv.row(k);
            for j in 0..hidden {
                gw_mu[j] += d_mu[k] * pass.hidden[j];
                gw_lv[j] += d_lv[k] * pass.hidden[j];
                d_hidden[j] += w_mu[j] * d_mu[k] + w_lv[j] * d_lv[k];
            }
        }
        let d_pre: Vec<f64> = d_hidden
            .iter()
            .zip(&pass.pre)
            .map(|(g, a)| g * sigmoid(*a))
            .collect();
        for (j, g) in d_pre.iter().enumerate() {
            enc.b_in[j] += g;
        }
        for &(v, x) in &input {
            let mut gw = enc.w_in.row_mut(v);
            for (j, g) in d_pre.iter().enumerate() {
                gw[j] += x * g;
            }
        }
    }

    // through beta_k = softmax(logits_k): dlogit = beta * (g - <beta, g>)
    let inner = (&beta * &d_beta).sum_axis(Axis(1));
    let d_logits = &beta * &(&d_beta - &inner.insert_axis(Axis(1)));
    let alpha = d_logits.dot(&params.rho);
    let rho = train_rho.then(|| d_logits.t().dot(&params.alpha));

    (
        EtmGrads {
            rho,
            alpha,
            encoder: enc,
        },
        total_loss / b,
    )
}

impl EtmGrads {
    /// Flat views of every gradient group, in [`EtmParams::groups_mut`] order.
    pub fn groups(&self) -> Vec<&[f64]> {
        let e = &self.encoder;
        let mut out = vec![
            self.alpha.as_slice().expect("standard layout"),
            e.w_in.as_slice().expect("standard layout"),
            e.b_in.as_slice().expect("standard layout"),
            e.w_mu.as_slice().expect("standard layout"),
            e.b_mu.as_slice().expect("standard layout"),
            e.w_lv.as_slice().expect("standard layout"),
            e.b_lv.as_slice().expect("standard layout"),
        ];
        if let Some(rho) = &self.rho {
            out.push(rho.as_slice().expect("standard layout"));
        }
        out
    }
}

impl EtmParams {
    /// Mutable flat views of every parameter group: alpha, encoder tensors,
    /// then rho when `with_rho`.
    pub fn groups_mut(&mut self, with_rho: bool) -> Vec<&mut [f64]> {
        let e = &mut self.encoder;
        let mut out = vec![
            self.alpha.as_slice_mut().expect("standard layout"),
            e.w_in.as_slice_mut().expect("standard layout"),
            e.b_in.as_slice_mut().expect("standard layout"),
            e.w_mu.as_slice_mut().expect("standard layout"),
            e.b_mu.as_slice_mut().expect("standard layout"),
            e.w_lv.as_slice_mut().expect("standard layout"),
            e.b_lv.as_slice_mut().expect("standard layout"),
        ];
        if with_rho {
            out.push(self.rho.as_slice_mut().expect("standard layout"));
        }
        out
    }
}
