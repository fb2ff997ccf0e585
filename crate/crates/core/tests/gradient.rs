//! Analytic gradients against central finite differences of the batch loss.

use intopic_core::etm::grad::{batch_loss, grad_elbo};
use intopic_core::EtmParams;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

const V: usize = 20;
const K: usize = 3;
const H: usize = 16;
const D: usize = 5;
const L: usize = 8;
const STEP: f64 = 1e-5;

struct Instance {
    params: EtmParams,
    rows: Vec<Vec<(u32, u32)>>,
    noise: Vec<Vec<f64>>,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wide = Normal::new(0.0, 0.5).unwrap();
    let rho = Array2::from_shape_simple_fn((V, L), || wide.sample(&mut rng));
    let mut params = EtmParams::init(rho, K, H, &mut rng);
    // larger weights than the training init so every gradient entry is well
    // above finite-difference round-off
    for g in params.groups_mut(false) {
        for x in g.iter_mut() {
            *x = wide.sample(&mut rng);
        }
    }
    // every word appears in at least one document
    let mut rows = vec![Vec::new(); D];
    for (d, row) in rows.iter_mut().enumerate() {
        for v in 0..V as u32 {
            if v as usize % D == d || rng.random_bool(0.3) {
                row.push((v, rng.random_range(1..5)));
            }
        }
    }
    let noise = (0..D)
        .map(|_| (0..K).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    Instance {
        params,
        rows,
        noise,
    }
}

fn relative_error(a: f64, n: f64) -> f64 {
    if a == n {
        0.0
    } else {
        (a - n).abs() / a.abs().max(n.abs())
    }
}

#[test]
fn analytic_matches_central_differences() {
    let names = [
        "alpha", "w_in", "b_in", "w_mu", "b_mu", "w_lv", "b_lv", "rho",
    ];
    for seed in [1, 2] {
        let inst = instance(seed);
        let rows: Vec<&[(u32, u32)]> = inst.rows.iter().map(|r| r.as_slice()).collect();
        let (grads, _) = grad_elbo(&inst.params, &rows, &inst.noise, true);
        let analytic: Vec<Vec<f64>> = grads.groups().iter().map(|g| g.to_vec()).collect();
        assert_eq!(analytic.len(), names.len());

        let mut params = inst.params.clone();
        let mut worst = 0.0f64;
        for (gi, name) in names.iter().enumerate() {
            for i in 0..analytic[gi].len() {
                let orig = params.groups_mut(true)[gi][i];
                params.groups_mut(true)[gi][i] = orig + STEP;
                let up = batch_loss(&params, &rows, &inst.noise);
                params.groups_mut(true)[gi][i] = orig - STEP;
                let down = batch_loss(&params, &rows, &inst.noise);
                params.groups_mut(true)[gi][i] = orig;
                let numeric = (up - down) / (2.0 * STEP);
                let err = relative_error(analytic[gi][i], numeric);
                worst = worst.max(err);
                assert!(
                    err < 1e-4,
                    "seed {seed} {name}[{i}]: analytic {} numeric {numeric} rel {err:e}",
                    analytic[gi][i]
                );
            }
        }
        eprintln!("seed {seed}: worst relative error {worst:e}");
    }
}

#[test]
fn frozen_rho_gradients_match_trained_rho_run() {
    let inst = instance(5);
    let rows: Vec<&[(u32, u32)]> = inst.rows.iter().map(|r| r.as_slice()).collect();
    let (frozen, l1) = grad_elbo(&inst.params, &rows, &inst.noise, false);
    let (joint, l2) = grad_elbo(&inst.params, &rows, &inst.noise, true);
    assert_eq!(l1, l2);
    assert!(frozen.rho.is_none());
    assert_eq!(frozen.alpha, joint.alpha);
    assert_eq!(frozen.encoder, joint.encoder);
}
