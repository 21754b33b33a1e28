//! Relative frequencies of words across bins.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sgns::BinMeta;
use crate::text::{normalize_word, Vocabulary};

/// Exact counts of one bin: its vocabulary and the bin's total token count.
#[derive(Debug, Clone, Copy)]
pub struct BinCounts<'a> {
    pub bin: BinMeta,
    pub token_count: u64,
    pub vocab: &'a Vocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub bin: BinMeta,
    pub count: u64,
    pub relative_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySeries {
    pub word: String,
    pub points: Vec<FrequencyPoint>,
}

/// Count of `word` divided by the bin's token count, for every bin. Words
/// missing from a bin's vocabulary count as zero.
pub fn frequency_series(word: &str, bins: &[BinCounts<'_>]) -> Result<FrequencySeries> {
    let word = normalize_word(word);
    let points = bins
        .par_iter()
        .map(|b| {
            if b.token_count == 0 {
                return Err(Error::Config(format!("bin {} has no tokens", b.bin.index)));
            }
            let count = b.vocab.count_of(&word);
            Ok(FrequencyPoint {
                bin: b.bin,
                count,
                relative_frequency: count as f64 / b.token_count as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencySeries { word, points })
}
