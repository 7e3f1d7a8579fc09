//! Word embeddings built by signed feature hashing of co-occurrence contexts.
//!
//! A single forward pass over a sentence-segmented token stream accumulates,
//! for every word, a fixed-width vector whose bucket `h(c)` receives
//! `xi(c) * f(d)` for each context word `c` seen at distance `d`. The result is
//! a random sparse projection of the (distance-weighted) co-occurrence matrix,
//! computed without ever materializing that matrix.
//!
//! Modules:
//!
//! * [`corpus`]: tokenization, frequency filtering, phrase joining, sentence sampling.
//! * [`hashing`]: seeded bucket and sign hashes, distance weights.
//! * [`embedder`]: streaming training, additive merge, text vector files.
//! * [`oracle`]: exact co-occurrence matrix, batch projection, distortion statistics.
//! * [`query`]: cosine, nearest neighbours, analogies.
//! * [`eval`]: similarity datasets, Spearman correlation, dimension sweeps.
//! * [`synth`]: deterministic generator for structured test corpora.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

pub mod corpus;
pub mod embedder;
mod error;
pub mod eval;
pub mod hashing;
pub mod oracle;
pub mod query;
mod scalar;
pub mod synth;

pub use corpus::{FilterConfig, FrequencyTable, PhraseConfig, SamplerConfig, TokenStream};
pub use embedder::{merge, train, EmbeddingTable, TrainParams, Trainer};
pub use error::{Error, Result};
pub use eval::{EvalReport, SimilarityDataset};
pub use hashing::{HasherSpec, WeightSpec};
pub use oracle::{CooccurrenceMatrix, DistortionReport};
pub use query::Neighbor;
pub use scalar::Real;

/// Double-precision embedding table; the default training target.
pub type Embeddings = EmbeddingTable<f64>;
/// Single-precision embedding table, for compact storage and querying.
pub type EmbeddingsF32 = EmbeddingTable<f32>;
/// Double-precision exact co-occurrence matrix.
pub type Cooccurrence = CooccurrenceMatrix<f64>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
