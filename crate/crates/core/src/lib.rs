//! Meta-embeddings from pre-trained word embedding sets.
//!
//! * [`embedding`] and [`io`]: embedding sets, vocabulary intersection, and
//!   text / word2vec / native file formats.
//! * [`vector_ops`]: normalization, zero-padding, distances and angles.
//! * [`combine`]: averaged and concatenated meta-embeddings.
//! * [`angles`]: sampled distribution of angles between cross-set difference
//!   vectors, which explains why averaging works.
//! * [`eval`]: Spearman word similarity and CosAdd analogy benchmarks.

pub mod angles;
pub mod combine;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod io;
pub mod vector_ops;

pub use angles::{sample_angles, variance_vs_dimension, AngleStats};
pub use combine::{average, combine_k, concatenate, AverageOptions, MetaRecipe, Method};
pub use embedding::{intersect, intersect_all, AlignedPair, EmbeddingSet, Loaded};
pub use error::{Error, Result};
pub use eval::{eval_analogy, eval_similarity, run_suite, spearman, EvalReport};
pub use vector_ops::{PadSide, PadSpec};
