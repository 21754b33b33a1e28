//! Bias along antonym-pair semantic axes.
//!
//! Each pair gives an axis `g = unit(w_neg) - unit(w_pos)`. A word's bias
//! for a stream is the mean projection of its unit vector onto the stream's
//! axes; positive values lean toward the negative poles (adverse), negative
//! values toward the positive poles (favorable).

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, symmetric_eigenvalues};
use crate::sgns::BinMeta;
use crate::store::AnalysisModel;

const DEFAULT_STREAMS_JSON: &str = include_str!("../data/streams.json");

/// Name used for the summed series over all streams.
pub const CUMULATIVE: &str = "cumulative";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntonymPair {
    #[serde(rename = "pos")]
    pub positive: String,
    #[serde(rename = "neg")]
    pub negative: String,
}

impl AntonymPair {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Result<Self> {
        let pair = AntonymPair {
            positive: positive.into(),
            negative: negative.into(),
        };
        pair.validate()?;
        Ok(pair)
    }

    fn validate(&self) -> Result<()> {
        if self.positive == self.negative {
            return Err(Error::Config(format!(
                "antonym pair has the same word {:?} at both poles",
                self.positive
            )));
        }
        Ok(())
    }

    /// The same pair with its poles exchanged.
    pub fn swapped(&self) -> Self {
        AntonymPair {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStream", into = "RawStream")]
pub struct Stream {
    pub name: String,
    pub seed: AntonymPair,
    pub pairs: Vec<AntonymPair>,
}

#[derive(Serialize, Deserialize)]
struct RawStream {
    name: String,
    seed_pos: String,
    seed_neg: String,
    pairs: Vec<AntonymPair>,
}

impl TryFrom<RawStream> for Stream {
    type Error = Error;

    fn try_from(raw: RawStream) -> Result<Self> {
        Stream::new(raw.name, AntonymPair::new(raw.seed_pos, raw.seed_neg)?, raw.pairs)
    }
}

impl From<Stream> for RawStream {
    fn from(s: Stream) -> Self {
        RawStream {
            name: s.name,
            seed_pos: s.seed.positive,
            seed_neg: s.seed.negative,
            pairs: s.pairs,
        }
    }
}

impl Stream {
    pub fn new(name: impl Into<String>, seed: AntonymPair, pairs: Vec<AntonymPair>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::Config(format!("stream {name:?} has no antonym pairs")));
        }
        seed.validate()?;
        for p in &pairs {
            p.validate()?;
        }
        Ok(Stream { name, seed, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The stream with every pair's poles exchanged.
    pub fn swapped(&self) -> Self {
        Stream {
            name: self.name.clone(),
            seed: self.seed.swapped(),
            pairs: self.pairs.iter().map(AntonymPair::swapped).collect(),
        }
    }
}

/// A stream configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub streams: Vec<Stream>,
}

impl StreamConfig {
    pub fn new(streams: Vec<Stream>) -> Result<Self> {
        let mut names = HashSet::new();
        for s in &streams {
            if !names.insert(s.name.as_str()) {
                return Err(Error::Config(format!("stream {:?} is defined twice", s.name)));
            }
        }
        Ok(StreamConfig { streams })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: StreamConfig = serde_json::from_str(json).map_err(|e| Error::json("stream config", e))?;
        StreamConfig::new(cfg.streams)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: StreamConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        StreamConfig::new(cfg.streams)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stream config serializes");
        s.push('\n');
        s
    }

    pub fn get(&self, name: &str) -> Option<&Stream> {
        self.streams.iter().find(|s| s.name == name)
    }
}

/// The six shipped streams: religious, economic, socio-political, racial,
/// conspiratorial and ethic.
pub fn default_streams() -> StreamConfig {
    StreamConfig::from_json(DEFAULT_STREAMS_JSON).expect("shipped stream config is valid")
}

/// `unit(negative) - unit(positive)`. Fails with [`Error::Oov`] when a pole
/// is missing and [`Error::Degenerate`] when the two vectors coincide.
pub fn bias_axis(model: &AnalysisModel, pair: &AntonymPair) -> Result<Vec<f64>> {
    let neg = model.unit_vector(&pair.negative)?;
    let pos = model.unit_vector(&pair.positive)?;
    let g: Vec<f64> = neg.iter().zip(pos).map(|(n, p)| n - p).collect();
    if g.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate(format!(
            "{:?} and {:?} give a zero axis in bin {}",
            pair.negative,
            pair.positive,
            model.bin().index
        )));
    }
    Ok(g)
}

/// Dot product of the unit vector of `word` with `g`.
pub fn project(model: &AnalysisModel, word: &str, g: &[f64]) -> Result<f64> {
    let w = model.unit_vector(word)?;
    if w.len() != g.len() {
        return Err(Error::Config(format!(
            "axis has {} components but the model has {}",
            g.len(),
            w.len()
        )));
    }
    Ok(linalg::dot(w, g))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPair {
    pub pair: AntonymPair,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanBias {
    pub value: f64,
    pub usable: usize,
    pub skipped: Vec<SkippedPair>,
}

/// Axes of `stream` that can be built in `model`, plus the skipped pairs.
pub fn stream_axes(model: &AnalysisModel, stream: &Stream) -> (Vec<Vec<f64>>, Vec<SkippedPair>) {
    let mut axes = Vec::with_capacity(stream.len());
    let mut skipped = Vec::new();
    for pair in &stream.pairs {
        match bias_axis(model, pair) {
            Ok(g) => axes.push(g),
            Err(e) => {
                log::debug!("stream {}: skipping {:?}/{:?}: {e}", stream.name, pair.positive, pair.negative);
                skipped.push(SkippedPair {
                    pair: pair.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    (axes, skipped)
}

/// Mean projection of `word` over the usable axes of `stream`.
pub fn mean_bias(model: &AnalysisModel, word: &str, stream: &Stream) -> Result<MeanBias> {
    let w = model.unit_vector(word)?;
    let (axes, skipped) = stream_axes(model, stream);
    if axes.is_empty() {
        return Err(Error::NoUsableAxis {
            stream: stream.name.clone(),
            bin: Some(model.bin().index),
        });
    }
    let sum: f64 = axes.iter().map(|g| linalg::dot(w, g)).sum();
    Ok(MeanBias {
        value: sum / axes.len() as f64,
        usable: axes.len(),
        skipped,
    })
}

/// Explained-variance fractions of the principal components of the
/// stream's usable axes, largest first. When the axes do not vary at all
/// the first component carries everything.
pub fn stream_variance(model: &AnalysisModel, stream: &Stream) -> Result<Vec<f64>> {
    let (axes, _) = stream_axes(model, stream);
    if axes.len() < 2 {
        return Err(Error::TooFewAxes {
            stream: stream.name.clone(),
            usable: axes.len(),
        });
    }
    Ok(explained_variance(&axes))
}

/// Explained-variance fractions of the rows of `axes` after centering.
pub fn explained_variance(axes: &[Vec<f64>]) -> Vec<f64> {
    let m = axes.len();
    let d = axes[0].len();
    let mut mean = vec![0.0; d];
    for a in axes {
        for (mu, x) in mean.iter_mut().zip(a) {
            *mu += x / m as f64;
        }
    }
    let centered: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| a.iter().zip(&mean).map(|(x, mu)| x - mu).collect())
        .collect();
    let scale: f64 = axes.iter().map(|a| linalg::dot(a, a)).sum();
    let total: f64 = centered.iter().map(|c| linalg::dot(c, c)).sum();

    let components = m.min(d);
    if total <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        let mut out = vec![0.0; components];
        out[0] = 1.0;
        return out;
    }

    // Gram and scatter matrices share their nonzero eigenvalues; use the smaller.
    let eig = if m <= d {
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = linalg::dot(&centered[i], &centered[j]);
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        symmetric_eigenvalues(gram, m)
    } else {
        let mut scatter = vec![0.0; d * d];
        for c in &centered {
            for i in 0..d {
                for j in i..d {
                    scatter[i * d + j] += c[i] * c[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                scatter[i * d + j] = scatter[j * d + i];
            }
        }
        symmetric_eigenvalues(scatter, d)
    };
    let eig: Vec<f64> = eig.into_iter().map(|x| x.max(0.0)).collect();
    let sum: f64 = eig.iter().sum();
    eig.into_iter().map(|x| x / sum).collect()
}

/// Sum of the word's mean bias over `streams`.
pub fn cumulative_bias(model: &AnalysisModel, word: &str, streams: &[Stream]) -> Result<f64> {
    streams
        .iter()
        .map(|s| mean_bias(model, word, s).map(|b| b.value))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasPoint {
    pub bin: BinMeta,
    pub mean_bias: f64,
    pub usable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasSeries {
    pub word: String,
    /// Stream name, or [`CUMULATIVE`] for the sum over streams.
    pub stream: String,
    pub points: Vec<BiasPoint>,
    pub warnings: Vec<String>,
}

fn series<F>(word: &str, name: &str, models: &[AnalysisModel], point: F) -> Result<BiasSeries>
where
    F: Fn(&AnalysisModel) -> Result<(f64, usize)> + Sync,
{
    let results: Vec<Result<(f64, usize)>> = models.par_iter().map(&point).collect();
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for (model, r) in models.iter().zip(results) {
        let bin = model.bin();
        match r {
            Ok((mean_bias, usable)) => {
                points.push(BiasPoint { bin, mean_bias, usable });
            }
            Err(e @ (Error::Oov { .. } | Error::NoUsableAxis { .. })) => {
                let w = format!("bin {} ({}): {e}", bin.index, bin.label());
                log::warn!("{w}");
                warnings.push(w);
            }
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(if models.iter().any(|m| m.contains(word)) {
            Error::NoUsableAxis {
                stream: name.to_owned(),
                bin: None,
            }
        } else {
            Error::Oov {
                word: word.to_owned(),
                bin: None,
            }
        });
    }
    Ok(BiasSeries {
        word: word.to_owned(),
        stream: name.to_owned(),
        points,
        warnings,
    })
}

/// Mean bias of `word` for `stream` in each bin. Bins where the word is out
/// of vocabulary or no axis is usable are skipped with a warning.
pub fn bias_series(word: &str, stream: &Stream, models: &[AnalysisModel]) -> Result<BiasSeries> {
    series(word, &stream.name, models, |m| {
        mean_bias(m, word, stream).map(|b| (b.value, b.usable))
    })
}

/// Cumulative bias of `word` in each bin; `usable` counts axes over all
/// streams. Bins where any stream has no usable axis are skipped.
pub fn cumulative_series(word: &str, streams: &[Stream], models: &[AnalysisModel]) -> Result<BiasSeries> {
    series(word, CUMULATIVE, models, |m| {
        let mut total = 0.0;
        let mut usable = 0;
        for s in streams {
            let b = mean_bias(m, word, s)?;
            total += b.value;
            usable += b.usable;
        }
        Ok((total, usable))
    })
}
