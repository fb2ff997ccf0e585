mod common;

use std::collections::BTreeSet;

use intopic_core::corpus::{to_bow, Document, Tokenizer, Vocabulary};
use intopic_core::eval::{topic_coherence, Bm25Index, CooccurrenceStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct BM25 over token lists, written without the index.
fn brute_bm25(docs: &[Vec<String>], query: &[String], d: usize) -> f64 {
    let n_docs = docs.len() as f64;
    let avgdl = docs.iter().map(Vec::len).sum::<usize>() as f64 / n_docs;
    let mut terms: Vec<&String> = Vec::new();
    for q in query {
        if !terms.contains(&q) {
            terms.push(q);
        }
    }
    let mut score = 0.0;
    for q in terms {
        let n = docs.iter().filter(|doc| doc.contains(q)).count() as f64;
        let f = docs[d].iter().filter(|t| *t == q).count() as f64;
        let idf = ((n_docs - n + 0.5) / (n + 0.5) + 1.0).ln();
        let dl = docs[d].len() as f64;
        score += idf * f * 2.2 / (f + 1.2 * (1.0 - 0.75 + 0.75 * dl / avgdl));
    }
    score
}

fn random_corpus(rng: &mut ChaCha8Rng) -> (Vec<Vec<String>>, Vec<String>) {
    let v = rng.random_range(2..=30);
    let words: Vec<String> = (0..v).map(|i| format!("t{i:02}")).collect();
    let d = rng.random_range(1..=10);
    let docs = (0..d)
        .map(|_| {
            let len = rng.random_range(1..15);
            (0..len)
                .map(|_| words[rng.random_range(0..v)].clone())
                .collect()
        })
        .collect();
    (docs, words)
}

fn index_of(docs: &[Vec<String>]) -> Bm25Index {
    let documents: Vec<Document> = docs
        .iter()
        .enumerate()
        .map(|(i, toks)| {
            let mut doc = Document::new(format!("d{i}"), None, toks.join(" "));
            doc.tokens = toks.clone();
            doc
        })
        .collect();
    let words: BTreeSet<String> = docs.iter().flatten().cloned().collect();
    let vocab = Vocabulary::from_words(words);
    Bm25Index::build(&to_bow(&documents, &vocab), Tokenizer::english()).unwrap()
}

#[test]
fn bm25_matches_brute_force_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let (docs, words) = random_corpus(&mut rng);
        let idx = index_of(&docs);
        for _ in 0..5 {
            let qlen = rng.random_range(1..4);
            let query: Vec<String> = (0..qlen)
                .map(|_| words[rng.random_range(0..words.len())].clone())
                .collect();
            for d in 0..docs.len() {
                let got = idx.score(&query.join(" "), &format!("d{d}")).unwrap();
                let want = brute_bm25(&docs, &query, d);
                assert!((got - want).abs() < 1e-9, "{got} vs {want}");
            }
        }
    }
}

#[test]
fn ranking_matches_full_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let (docs, words) = random_corpus(&mut rng);
        let idx = index_of(&docs);
        let query = words[rng.random_range(0..words.len())].clone();
        let ids: Vec<String> = (0..docs.len()).map(|d| format!("d{d}")).collect();
        let got = idx.rank(&query, &ids).unwrap();
        let mut want: Vec<(String, f64)> = ids
            .iter()
            .enumerate()
            .map(|(d, id)| (id.clone(), brute_bm25(&docs, std::slice::from_ref(&query), d)))
            .collect();
        want.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        assert_eq!(
            got.iter().map(|x| &x.0).collect::<Vec<_>>(),
            want.iter().map(|x| &x.0).collect::<Vec<_>>()
        );
    }
}

#[test]
fn bm25_monotone_in_term_frequency() {
    // same length, more occurrences of the query term
    let docs: Vec<Vec<String>> = (0..5)
        .map(|f| {
            let mut d = vec!["q".to_string(); f];
            d.resize(6, "x".to_string());
            d
        })
        .collect();
    let idx = index_of(&docs);
    let scores: Vec<f64> = (0..5).map(|d| idx.score_index("q", d)).collect();
    assert!(scores.windows(2).all(|w| w[1] >= w[0]), "{scores:?}");
}

#[test]
fn planted_block_topic_is_more_coherent() {
    let p = common::planted(4, 5.0);
    let stats = CooccurrenceStats::from_corpus(&p.bow).unwrap();
    let words = &p.synth.words;
    let block: Vec<&str> = p.synth.blocks[0]
        .clone()
        .take(6)
        .map(|i| words[i].as_str())
        .collect();
    let mixed: Vec<&str> = (0..6)
        .map(|i| words[p.synth.blocks[i % 3].start + i / 3].as_str())
        .collect();
    let scores = topic_coherence(&[block, mixed], &stats);
    assert!(
        scores.per_topic[0] > scores.per_topic[1],
        "{:?}",
        scores.per_topic
    );
}
