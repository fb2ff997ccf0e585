//! The two parameter updates behind a relabel.

use super::{InteractError, RelabelMode};

/// Moves a topic embedding toward the label word's embedding `w`.
///
/// `EmbeddingLiteral` evaluates `lambda (w - alpha) + (1 - lambda) alpha`
/// term by term; `EmbeddingConvex` evaluates `(1 - lambda) alpha + lambda w`.
/// `lambda = 0` returns `alpha` unchanged in both modes.
pub fn move_topic_embedding(alpha: &[f64], w: &[f64], lambda: f64, mode: RelabelMode) -> Vec<f64> {
    assert_eq!(alpha.len(), w.len(), "embedding dimensions differ");
    if lambda == 0.0 {
        return alpha.to_vec();
    }
    alpha
        .iter()
        .zip(w)
        .map(|(&a, &w)| match mode {
            RelabelMode::EmbeddingLiteral => lambda * (w - a) + (1.0 - lambda) * a,
            RelabelMode::EmbeddingConvex | RelabelMode::Distribution => {
                (1.0 - lambda) * a + lambda * w
            }
        })
        .collect()
}

/// Default boost: the gap between the label word and the current top word.
pub fn default_boost(beta_row: &[f64], target: usize) -> f64 {
    let max = beta_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max - beta_row[target]
}

/// Raises `target` by `delta` (default [`default_boost`]) and every neighbor
/// `s` by `lambda * max(sim, 0) * delta`, then renormalizes the row.
/// Neighbors equal to `target` are ignored.
pub fn boost_topic_distribution(
    beta_row: &[f64],
    target: usize,
    lambda: f64,
    delta: Option<f64>,
    neighbors: &[(usize, f64)],
) -> Result<Vec<f64>, InteractError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(InteractError::InvalidLambda(lambda));
    }
    let delta = delta.unwrap_or_else(|| default_boost(beta_row, target));
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(InteractError::NegativeDelta(delta));
    }
    let mut raw = beta_row.to_vec();
    raw[target] += delta;
    for &(s, sim) in neighbors {
        if s != target {
            raw[s] += lambda * sim.max(0.0) * delta;
        }
    }
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / total).collect())
}
