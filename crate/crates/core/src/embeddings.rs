//! Word vectors: text-format loading, alignment to a vocabulary, cosine
//! similarity and exhaustive nearest-neighbor search.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::corpus::Vocabulary;
use crate::math::dot;

/// Standard deviation of vectors drawn for words missing from the table.
pub const RANDOM_INIT_SCALE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("word {word:?} has {found} components, expected {expected}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("vectors of length {0} and {1} cannot be compared")]
    LengthMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("embedding table has no vector for {0:?}")]
    UnknownWord(String),
    #[error("{} vocabulary words have no embedding: {}", .0.len(), .0.join(", "))]
    MissingWords(Vec<String>),
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
}

/// How [`EmbeddingTable::align_to_vocabulary`] treats vocabulary words that
/// have no vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    Error,
    /// Draw from N(0, 0.1^2) with a seeded generator.
    RandomInit {
        seed: u64,
    },
}

impl Default for MissingPolicy {
    fn default() -> Self {
        MissingPolicy::RandomInit { seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Array2<f64>,
    norms: Vec<f64>,
}

impl EmbeddingTable {
    /// Wraps an `n x dim` matrix whose row `i` is the vector of `words[i]`.
    pub fn from_matrix(words: Vec<String>, vectors: Array2<f64>) -> Result<Self, EmbeddingError> {
        assert_eq!(words.len(), vectors.nrows(), "one row per word");
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateWord(w.clone()));
            }
        }
        let norms = vectors
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .collect();
        Ok(Self {
            words,
            index,
            vectors,
            norms,
        })
    }

    /// Loads a whitespace-delimited text vector file, with an optional
    /// `count dim` header line.
    pub fn load(
        path: impl AsRef<Path>,
        expected_dim: Option<usize>,
    ) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read(std::io::BufReader::new(file), expected_dim)
    }

    pub fn read<R: BufRead>(
        reader: R,
        expected_dim: Option<usize>,
    ) -> Result<Self, EmbeddingError> {
        let mut dim = expected_dim;
        let mut words = Vec::new();
        let mut flat = Vec::new();
        let mut seen = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| EmbeddingError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if line_no == 1 && fields.len() == 2 {
                if let (Ok(_count), Ok(d)) =
                    (fields[0].parse::<usize>(), fields[1].parse::<usize>())
                {
                    if let Some(exp) = dim {
                        if exp != d {
                            return Err(EmbeddingError::DimensionMismatch {
                                word: "<header>".into(),
                                expected: exp,
                                found: d,
                            });
                        }
                    }
                    dim = Some(d);
                    continue;
                }
            }
            let word = fields[0];
            let found = fields.len() - 1;
            let expected = *dim.get_or_insert(found);
            if found != expected || found == 0 {
                return Err(EmbeddingError::DimensionMismatch {
                    word: word.to_string(),
                    expected,
                    found,
                });
            }
            if seen.insert(word.to_string(), words.len()).is_some() {
                // first occurrence wins
                continue;
            }
            for f in &fields[1..] {
                flat.push(f.parse::<f64>().map_err(|e| EmbeddingError::Parse {
                    line: line_no,
                    message: format!("{word}: {e}"),
                })?);
            }
            words.push(word.to_string());
        }
        let dim = dim.unwrap_or(0);
        let vectors = Array2::from_shape_vec((words.len(), dim), flat)
            .expect("row lengths were checked while parsing");
        Self::from_matrix(words, vectors)
    }

    /// Writes the table in the text vector format, with header.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
        use std::io::Write;
        let path = path.as_ref();
        let io = |source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "{} {}", self.len(), self.dim()).map_err(io)?;
        for (w, row) in self.words.iter().zip(self.vectors.rows()) {
            write!(out, "{w}").map_err(io)?;
            for x in row {
                write!(out, " {x}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.index.get(word).map(|&i| self.vectors.row(i))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.vectors
    }

    /// Cosine similarity between two words of the table.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, EmbeddingError> {
        let va = self
            .vector(a)
            .ok_or_else(|| EmbeddingError::UnknownWord(a.to_string()))?;
        let vb = self
            .vector(b)
            .ok_or_else(|| EmbeddingError::UnknownWord(b.to_string()))?;
        cosine(va.as_slice().unwrap(), vb.as_slice().unwrap())
    }

    /// Returns the `k` most cosine-similar words to `query`, best first, ties
    /// broken lexicographically. `restrict_to` limits candidates to a
    /// vocabulary and `exclude` drops one word (typically the query's own).
    /// Words with all-zero vectors are never candidates.
    pub fn nearest_words(
        &self,
        query: &[f64],
        k: usize,
        restrict_to: Option<&Vocabulary>,
        exclude: Option<&str>,
    ) -> Result<Vec<(String, f64)>, EmbeddingError> {
        if query.len() != self.dim() {
            return Err(EmbeddingError::LengthMismatch(query.len(), self.dim()));
        }
        let qnorm = dot(query, query).sqrt();
        if qnorm == 0.0 {
            return Err(EmbeddingError::ZeroVector);
        }
        let mut scored: Vec<(usize, f64)> = self
            .words
            .iter()
            .enumerate()
            .filter(|&(i, w)| {
                self.norms[i] > 0.0
                    && exclude != Some(w.as_str())
                    && restrict_to.is_none_or(|v| v.contains(w))
            })
            .map(|(i, _)| {
                let row = self.vectors.row(i);
                let sim = dot(query, row.as_slice().unwrap()) / (qnorm * self.norms[i]);
                (i, sim.clamp(-1.0, 1.0))
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(i, s)| (self.words[i].clone(), s))
            .collect())
    }

    /// Builds the V x dim matrix whose row `i` is the vector of vocabulary
    /// word `i`.
    pub fn align_to_vocabulary(
        &self,
        vocab: &Vocabulary,
        policy: MissingPolicy,
    ) -> Result<Array2<f64>, EmbeddingError> {
        let missing: Vec<String> = vocab
            .words()
            .iter()
            .filter(|w| !self.contains(w))
            .cloned()
            .collect();
        if !missing.is_empty() && policy == MissingPolicy::Error {
            return Err(EmbeddingError::MissingWords(missing));
        }
        let mut out = Array2::zeros((vocab.len(), self.dim()));
        let mut rng = match policy {
            MissingPolicy::RandomInit { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            MissingPolicy::Error => None,
        };
        let normal = Normal::new(0.0, RANDOM_INIT_SCALE).expect("valid scale");
        for (i, w) in vocab.words().iter().enumerate() {
            match self.vector(w) {
                Some(v) => out.row_mut(i).assign(&v),
                None => {
                    let rng = rng.as_mut().expect("missing words imply random init");
                    for x in out.row_mut(i) {
                        *x = normal.sample(rng);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Cosine similarity `a.b / (|a||b|)`, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::LengthMismatch(a.len(), b.len()));
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = entries[0].1.len();
        let words = entries.iter().map(|(w, _)| w.to_string()).collect();
        let flat = entries
            .iter()
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        EmbeddingTable::from_matrix(
            words,
            Array2::from_shape_vec((entries.len(), dim), flat).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn parse_without_header() {
        let t = EmbeddingTable::read("a 1 0\nb 0 1\n".as_bytes(), None).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim(), 2);
        assert_eq!(t.vector("b").unwrap().to_vec(), vec![0.0, 1.0]);
    }

    #[test]
    fn parse_with_header() {
        let row = |w: &str| format!("{w} {}\n", vec!["0.5"; 300].join(" "));
        let text = format!("2 300\n{}{}", row("x"), row("y"));
        let t = EmbeddingTable::read(text.as_bytes(), None).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 300));
    }

    #[test]
    fn short_line_names_the_word() {
        let text = format!(
            "2 300\nfine {}\nbroken {}\n",
            vec!["1"; 300].join(" "),
            vec!["1"; 299].join(" ")
        );
        match EmbeddingTable::read(text.as_bytes(), None) {
            Err(EmbeddingError::DimensionMismatch { word, found, .. }) => {
                assert_eq!(word, "broken");
                assert_eq!(found, 299);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expected_dim_enforced() {
        assert!(matches!(
            EmbeddingTable::read("a 1 0\n".as_bytes(), Some(3)),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn align_full_coverage_copies_rows() {
        let t = table(&[("b", &[0.0, 2.0]), ("a", &[1.0, 0.0])]);
        let vocab = Vocabulary::from_words(["a".to_string(), "b".to_string()]);
        let rho = t.align_to_vocabulary(&vocab, MissingPolicy::Error).unwrap();
        assert_eq!(rho.row(0).to_vec(), vec![1.0, 0.0]);
        assert_eq!(rho.row(1).to_vec(), vec![0.0, 2.0]);
    }

    #[test]
    fn align_random_init_is_seeded() {
        let t = table(&[("a", &[1.0, 0.0])]);
        let vocab = Vocabulary::from_words(["a".to_string(), "zz".to_string()]);
        let policy = MissingPolicy::RandomInit { seed: 7 };
        let r1 = t.align_to_vocabulary(&vocab, policy).unwrap();
        let r2 = t.align_to_vocabulary(&vocab, policy).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.row(1).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn align_error_lists_missing() {
        let t = table(&[("a", &[1.0, 0.0])]);
        let vocab = Vocabulary::from_words(["a", "ghost"].map(String::from));
        match t.align_to_vocabulary(&vocab, MissingPolicy::Error) {
            Err(EmbeddingError::MissingWords(w)) => assert_eq!(w, vec!["ghost"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cosine_values() {
        assert_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroVector)
        ));
    }

    #[test]
    fn nearest_basic_and_truncation() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(
            t.nearest_words(&[1.0, 0.0], 1, None, None).unwrap(),
            vec![("a".into(), 1.0)]
        );
        assert_eq!(
            t.nearest_words(&[1.0, 0.0], 5, None, None).unwrap().len(),
            2
        );
        let excl = t.nearest_words(&[1.0, 0.0], 1, None, Some("a")).unwrap();
        assert_eq!(excl[0].0, "b");
    }

    #[test]
    fn nearest_ties_are_lexicographic() {
        let t = table(&[
            ("zeta", &[1.0, 0.0]),
            ("alpha", &[2.0, 0.0]),
            ("mid", &[0.0, 1.0]),
        ]);
        let got = t.nearest_words(&[1.0, 0.0], 2, None, None).unwrap();
        assert_eq!(got[0].0, "alpha");
        assert_eq!(got[1].0, "zeta");
    }

    #[test]
    fn nearest_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let words: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
        let vecs = Array2::from_shape_fn((10, 4), |_| rng.random_range(-1.0..1.0));
        let t = EmbeddingTable::from_matrix(words.clone(), vecs.clone()).unwrap();
        let query = [0.3, -0.2, 0.9, 0.1];
        // oracle: score every word, full sort
        let mut all: Vec<(String, f64)> = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let r = vecs.row(i);
                let num: f64 = (0..4).map(|j| r[j] * query[j]).sum();
                let nr = (0..4).map(|j| r[j] * r[j]).sum::<f64>().sqrt();
                let nq = query.iter().map(|x| x * x).sum::<f64>().sqrt();
                (w.clone(), num / (nr * nq))
            })
            .collect();
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let got = t.nearest_words(&query, 3, None, None).unwrap();
        let got_words: Vec<_> = got.iter().map(|(w, _)| w.clone()).collect();
        let want: Vec<_> = all[..3].iter().map(|(w, _)| w.clone()).collect();
        assert_eq!(got_words, want);
        for ((_, g), (_, w)) in got.iter().zip(&all) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_respects_vocabulary_restriction() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.9, 0.1]), ("c", &[0.0, 1.0])]);
        let vocab = Vocabulary::from_words(["c".to_string()]);
        let got = t.nearest_words(&[1.0, 0.0], 3, Some(&vocab), None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, "c");
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            a in proptest::collection::vec(-5.0f64..5.0, 3),
            b in proptest::collection::vec(-5.0f64..5.0, 3),
            lambda in 0.01f64..100.0,
        ) {
            prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3));
            let ab = cosine(&a, &b).unwrap();
            prop_assert!((ab - cosine(&b, &a).unwrap()).abs() < 1e-12);
            let scaled: Vec<f64> = a.iter().map(|x| x * lambda).collect();
            prop_assert!((ab - cosine(&scaled, &b).unwrap()).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn nearest_sorted_non_increasing(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let words: Vec<String> = (0..12).map(|i| format!("w{i:02}")).collect();
            let vecs = Array2::from_shape_fn((12, 3), |_| rng.random_range(-1.0..1.0));
            let t = EmbeddingTable::from_matrix(words, vecs).unwrap();
            let got = t.nearest_words(&[0.5, 0.5, -0.1], 12, None, None).unwrap();
            prop_assert!(got.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }
}
