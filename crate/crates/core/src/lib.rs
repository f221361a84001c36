//! Retrieval-augmented translation decoding with per-sentence datastores.
//!
//! For each input sentence a handful of similar reference pairs is retrieved
//! (BM25, then edit-distance re-ranking), teacher-forced through the model to
//! form a tiny key/value datastore, and queried at every decoding step. The
//! nearest-neighbor distribution is mixed into the model distribution with a
//! weight that falls linearly with the nearest distance.

pub mod corpus;
pub mod datastore;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod model;
pub mod online;
pub mod retrieval;
pub mod synthetic;

pub use corpus::{
    detokenize, tokenize, CorpusFormat, PairId, ParallelCorpus, SentencePair, Token, TokenId,
    Tokenizer, Vocabulary,
};
pub use datastore::{DatastoreEntry, DynamicDatastore, Footprint, Neighbor, NeighborSet};
pub use error::{Error, Result};
pub use fusion::{
    beam_search, compute_lambda, fuse, knn_distribution, length_penalty, DecoderConfig,
    FusionConfig, Hypothesis, Mode, ReferenceStore, StepTrace, Translation,
};
pub use metrics::{chrf, corpus_bleu, r_indicator, MetricReport};
pub use model::{
    ContextVector, Distribution, ModelOutput, ToyModel, ToyModelSpec, TranslationModel,
};
pub use online::{run_online, Document, OnlineRunResult, OnlineSession};
pub use retrieval::{
    edit_distance, rank_references, rerank_similarity, retrieve_references, InvertedIndex,
    RetrievalConfig, ScoredCandidate,
};
