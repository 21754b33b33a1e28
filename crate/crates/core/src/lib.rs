//! Diachronic word embeddings: token-balanced time bins, per-bin skip-gram
//! models, neighborhood drift and antonym-axis bias measures.

pub mod bias;
pub mod corpus;
pub mod drift;
pub mod error;
pub mod freq;
pub mod linalg;
pub mod report;
pub mod sgns;
pub mod store;
pub mod synth;
pub mod text;

#[cfg(test)]
mod testutil;

pub use bias::{AntonymPair, BiasSeries, MeanBias, Stream, StreamConfig};
pub use corpus::{BinPlan, Document, KeywordSet, TimeBin};
pub use drift::{DriftMode, DriftSeries, NeighborDiff};
pub use error::{Error, Result};
pub use freq::FrequencySeries;
pub use sgns::{BinMeta, EmbeddingModel, TrainConfig};
pub use store::{AnalysisModel, EmbeddingArchive};
pub use text::Vocabulary;
