//! Skip-gram with negative sampling, trained independently per time bin.

mod objective;
mod trainer;

pub use objective::{log_sigmoid, objective_and_gradient, sigmoid, PairGradient};
pub use trainer::{train, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::text::{Vocabulary, DEFAULT_MIN_COUNT};

pub const DEFAULT_DIM: usize = 300;
pub const DEFAULT_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context words on each side of the center.
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    /// Decays linearly towards `initial_lr * 1e-4` over all epochs.
    pub initial_lr: f64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample_threshold: f64,
    pub unigram_power: f64,
    pub seed: u64,
    /// Concurrent workers sharing the parameter matrices. With one worker
    /// training is deterministic for a given seed.
    pub workers: usize,
    /// Sample the effective window uniformly from `1..=window` per position.
    pub dynamic_window: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: DEFAULT_DIM,
            window: DEFAULT_WINDOW,
            min_count: DEFAULT_MIN_COUNT,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample_threshold: 1e-3,
            unigram_power: 0.75,
            seed: 1,
            workers: 1,
            dynamic_window: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if !(self.initial_lr.is_finite() && self.initial_lr >= 0.0) {
            return fail("initial_lr must be a finite non-negative number");
        }
        if !(self.subsample_threshold.is_finite() && self.subsample_threshold >= 0.0) {
            return fail("subsample_threshold must be a finite non-negative number");
        }
        if !self.unigram_power.is_finite() {
            return fail("unigram_power must be finite");
        }
        Ok(())
    }
}

/// Position of a model in the diachronic sequence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinMeta {
    pub index: u32,
    pub start_year: i32,
    pub end_year: i32,
}

impl BinMeta {
    pub fn label(&self) -> String {
        if self.start_year == self.end_year {
            self.start_year.to_string()
        } else {
            format!("{}-{}", self.start_year, self.end_year)
        }
    }
}

impl From<&crate::corpus::TimeBin> for BinMeta {
    fn from(b: &crate::corpus::TimeBin) -> Self {
        BinMeta {
            index: b.index,
            start_year: b.start_year,
            end_year: b.end_year,
        }
    }
}

/// A trained bin model. Row `i` of each matrix belongs to vocabulary id `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    pub input: Matrix<f32>,
    /// Context vectors; only needed to resume training.
    pub output: Option<Matrix<f32>>,
    pub bin: BinMeta,
}

impl EmbeddingModel {
    pub fn new(vocab: Vocabulary, input: Matrix<f32>, bin: BinMeta) -> Result<Self> {
        if input.rows() != vocab.len() {
            return Err(Error::Config(format!(
                "matrix has {} rows for {} vocabulary entries",
                input.rows(),
                vocab.len()
            )));
        }
        Ok(EmbeddingModel {
            vocab,
            input,
            output: None,
            bin,
        })
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn with_bin(mut self, bin: BinMeta) -> Self {
        self.bin = bin;
        self
    }

    pub fn is_finite(&self) -> bool {
        let finite = |m: &Matrix<f32>| m.as_slice().iter().all(|x| x.is_finite());
        finite(&self.input) && self.output.as_ref().is_none_or(finite)
    }

    /// SGNS loss and gradient at the current parameters.
    pub fn objective_and_gradient(
        &self,
        center: u32,
        context: u32,
        negatives: &[u32],
    ) -> Result<PairGradient<f32>> {
        let output = self
            .output
            .as_ref()
            .ok_or_else(|| Error::Config("model has no context vectors".into()))?;
        objective_and_gradient(&self.input, output, center, context, negatives)
    }
}
