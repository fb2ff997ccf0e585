//! Corpus ingestion: documents, vocabulary pruning by document frequency,
//! and sparse bag-of-words matrices.

mod synthetic;
mod tokenize;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use synthetic::{
    generate_synthetic_corpus, synthetic_embeddings, SyntheticConfig, SyntheticCorpus,
};
pub use tokenize::{tokenize, Tokenizer, ENGLISH_STOPWORDS};

pub const DEFAULT_MIN_DF: f64 = 0.01;
pub const DEFAULT_MAX_DF: f64 = 0.85;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("corpus has no documents")]
    Empty,
    #[error("document frequency thresholds [{min_df}, {max_df}] removed every word")]
    EmptyVocabulary { min_df: f64, max_df: f64 },
    #[error("invalid synthetic corpus parameters: {0}")]
    InvalidSynthetic(String),
    #[error("invalid document frequency bounds [{min_df}, {max_df}]")]
    InvalidBounds { min_df: f64, max_df: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing)]
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, title: Option<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            title,
            text: text.into(),
            tokens: Vec::new(),
        }
    }

    /// Fills `tokens` from `text`.
    pub fn tokenize_with(&mut self, tokenizer: &Tokenizer) {
        self.tokens = tokenizer.tokenize(&self.text);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    words: Vec<String>,
    doc_freq: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an explicit word list. Words are kept in the
    /// given order; duplicates are dropped.
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut seen = HashSet::new();
        let words: Vec<String> = words
            .into_iter()
            .filter(|w| seen.insert(w.clone()))
            .collect();
        let doc_freq = vec![0.0; words.len()];
        Self::from_parts(words, doc_freq)
    }

    fn from_parts(words: Vec<String>, doc_freq: Vec<f64>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self {
            words,
            doc_freq,
            index,
        }
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
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

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Fraction of documents containing each word, at build time.
    pub fn doc_freq(&self) -> &[f64] {
        &self.doc_freq
    }
}

/// Keeps word `w` iff it is not a stopword and `min_df <= df(w) <= max_df`.
/// Documents must already be tokenized. Retained words are sorted.
pub fn build_vocabulary(
    docs: &[Document],
    min_df: f64,
    max_df: f64,
    stopwords: &HashSet<String>,
) -> Result<Vocabulary, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::Empty);
    }
    if !(0.0..=1.0).contains(&min_df) || !(0.0..=1.0).contains(&max_df) || min_df > max_df {
        return Err(CorpusError::InvalidBounds { min_df, max_df });
    }
    let mut doc_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for w in unique {
            *doc_counts.entry(w).or_default() += 1;
        }
    }
    let n = docs.len() as f64;
    let (words, dfs): (Vec<String>, Vec<f64>) = doc_counts
        .into_iter()
        .filter(|(w, _)| !stopwords.contains(*w))
        .map(|(w, c)| (w.to_string(), c as f64 / n))
        .filter(|&(_, df)| df >= min_df && df <= max_df)
        .unzip();
    if words.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_df, max_df });
    }
    Ok(Vocabulary::from_parts(words, dfs))
}

/// Sparse document-word counts over a fixed vocabulary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BowCorpus {
    pub vocab: Vocabulary,
    pub doc_ids: Vec<String>,
    #[serde(default)]
    pub titles: Vec<Option<String>>,
    /// One row per document: `(word id, count)` pairs sorted by word id.
    pub counts: Vec<Vec<(u32, u32)>>,
    pub doc_lengths: Vec<u32>,
}

impl BowCorpus {
    pub fn num_docs(&self) -> usize {
        self.counts.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn row(&self, doc: usize) -> &[(u32, u32)] {
        &self.counts[doc]
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == id)
    }

    /// Dense count vector for one document.
    pub fn dense_row(&self, doc: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.vocab_size()];
        for &(w, c) in &self.counts[doc] {
            out[w as usize] = c as f64;
        }
        out
    }

    /// Writes the corpus as a JSON artifact.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)
            .map_err(|e| io(std::io::Error::other(e)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let io = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::open(path).map_err(io)?;
        let mut bow: BowCorpus = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
        bow.vocab.reindex();
        if bow.titles.len() != bow.doc_ids.len() {
            bow.titles = vec![None; bow.doc_ids.len()];
        }
        Ok(bow)
    }
}

/// Counts vocabulary words per document; out-of-vocabulary tokens are dropped.
pub fn to_bow(docs: &[Document], vocab: &Vocabulary) -> BowCorpus {
    let mut counts = Vec::with_capacity(docs.len());
    let mut doc_lengths = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut row: BTreeMap<u32, u32> = BTreeMap::new();
        for tok in &doc.tokens {
            if let Some(id) = vocab.id(tok) {
                *row.entry(id as u32).or_default() += 1;
            }
        }
        doc_lengths.push(row.values().sum());
        counts.push(row.into_iter().collect());
    }
    BowCorpus {
        vocab: vocab.clone(),
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        titles: docs.iter().map(|d| d.title.clone()).collect(),
        counts,
        doc_lengths,
    }
}

#[derive(Deserialize)]
struct Record {
    id: String,
    #[serde(default)]
    title: Option<String>,
    text: String,
}

/// Reads line-delimited JSON records with `id`, optional `title` and `text`.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_corpus(std::io::BufReader::new(file))
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId(rec.id));
        }
        docs.push(Document::new(rec.id, rec.title, rec.text));
    }
    Ok(docs)
}

/// Writes documents in the line-delimited input format.
pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<(), CorpusError> {
    use std::io::Write;
    let path = path.as_ref();
    let io = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for doc in docs {
        let line = serde_json::to_string(doc).map_err(|e| io(std::io::Error::other(e)))?;
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Tokenizes, prunes the vocabulary and builds the bag-of-words matrix.
/// Document tokens are left filtered to the retained vocabulary.
pub fn prepare(
    docs: &mut [Document],
    tokenizer: &Tokenizer,
    min_df: f64,
    max_df: f64,
) -> Result<BowCorpus, CorpusError> {
    for doc in docs.iter_mut() {
        doc.tokenize_with(tokenizer);
    }
    let vocab = build_vocabulary(docs, min_df, max_df, tokenizer.stopwords())?;
    for doc in docs.iter_mut() {
        doc.tokens.retain(|t| vocab.contains(t));
    }
    Ok(to_bow(docs, &vocab))
}
