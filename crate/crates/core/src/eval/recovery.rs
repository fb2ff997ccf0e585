//! Matching learned topics to planted ones.

use std::collections::HashSet;

use ndarray::Array2;

use crate::etm::{top_word_ids, TopicWordDist};

/// Greedy one-to-one matching by top-word overlap: repeatedly pair the
/// learned and planted topics with the largest overlap of their `n` top
/// words (ties by lower indices). Returns the planted index of each learned
/// topic, `None` when there are more learned topics than planted ones.
pub fn match_topics(
    learned: &TopicWordDist,
    planted: &Array2<f64>,
    words: &[String],
    n: usize,
) -> Vec<Option<usize>> {
    let k_learned = learned.topics();
    let k_planted = planted.nrows();
    let learned_top: Vec<HashSet<usize>> = (0..k_learned)
        .map(|k| top_word_ids(learned.row(k), words, n).into_iter().collect())
        .collect();
    let planted_top: Vec<HashSet<usize>> = (0..k_planted)
        .map(|j| {
            let row = planted.row(j).to_vec();
            top_word_ids(&row, words, n).into_iter().collect()
        })
        .collect();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (i, a) in learned_top.iter().enumerate() {
        for (j, b) in planted_top.iter().enumerate() {
            pairs.push((a.intersection(b).count(), i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut out = vec![None; k_learned];
    let mut used = vec![false; k_planted];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(j);
            used[j] = true;
        }
    }
    out
}

/// Fraction of documents whose argmax-theta topic maps to their planted
/// topic.
pub fn assignment_accuracy(
    theta: &Array2<f64>,
    planted: &[usize],
    mapping: &[Option<usize>],
) -> f64 {
    assert_eq!(theta.nrows(), planted.len());
    if planted.is_empty() {
        return 0.0;
    }
    let hits = theta
        .rows()
        .into_iter()
        .zip(planted)
        .filter(|(row, &truth)| {
            let best = row
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc },
                )
                .0;
            mapping[best] == Some(truth)
        })
        .count();
    hits as f64 / planted.len() as f64
}
