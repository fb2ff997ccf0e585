//! Interactive embedded topic modeling.
//!
//! The crate trains a small embedded topic model (ETM) over a bag-of-words
//! corpus, lets a user relabel topics with single words, recomputes the
//! document-topic assignments after each relabel, and measures the effect
//! with NPMI coherence, topic diversity and BM25 ranking reports.
//!
//! Module map:
//!
//! - [`corpus`]: tokenization, vocabulary pruning, bag-of-words matrices and
//!   a planted synthetic corpus generator.
//! - [`embeddings`]: pretrained word vectors, cosine similarity and
//!   nearest-neighbor queries.
//! - [`etm`]: the variational encoder, embedding decoder, analytic ELBO
//!   gradients, Adam and the training loop.
//! - [`interact`]: the two relabeling mechanisms, document reassignment and
//!   the undo history.
//! - [`eval`]: NPMI coherence, topic diversity, BM25 and ranking reports.

pub mod corpus;
pub mod embeddings;
pub mod etm;
pub mod eval;
pub mod interact;
pub(crate) mod math;

pub use corpus::{BowCorpus, CorpusError, Document, Tokenizer, Vocabulary};
pub use embeddings::{EmbeddingError, EmbeddingTable, MissingPolicy};
pub use etm::{EtmConfig, EtmError, EtmModel, EtmParams, Posterior, TopicWordDist};
pub use eval::{Bm25Index, CooccurrenceStats, EvalError, RankingReport};
pub use interact::{
    InteractError, InteractionContext, ModelHistory, ModelVersion, RelabelMode, RelabelRequest,
    ScoredDocument, TopicState, UpdateRecord,
};
