//! Model persistence and read-only similarity queries.

mod archive;
mod file;

pub use archive::{ArchiveEntry, EmbeddingArchive, INDEX_FILE};
pub use file::{context_path, decode_matrix, encode_matrix, load, save, vocab_path, MAGIC};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{normalized_f64, Matrix};
use crate::sgns::{BinMeta, EmbeddingModel};
use crate::text::Vocabulary;

/// Neighborhood size for k-NN queries.
pub const DEFAULT_K: usize = 100;

/// A bin model with every word vector scaled to unit length, in `f64`.
/// Cosine similarity is a plain dot product here.
#[derive(Debug, Clone)]
pub struct AnalysisModel {
    vocab: Vocabulary,
    unit: Matrix<f64>,
    bin: BinMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub word: String,
    pub id: u32,
    pub similarity: f64,
}

/// The `k` nearest words of a query in one bin, most similar first; ties
/// are broken by ascending vocabulary id. The query itself is excluded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborList {
    pub query: String,
    pub bin: BinMeta,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborList {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.word.as_str())
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

impl From<&EmbeddingModel> for AnalysisModel {
    fn from(model: &EmbeddingModel) -> Self {
        let n = model.input.rows();
        let dim = model.input.cols();
        let mut data = Vec::with_capacity(n * dim);
        for row in model.input.iter_rows() {
            data.extend(normalized_f64(row));
        }
        AnalysisModel {
            vocab: model.vocab.clone(),
            unit: Matrix::from_vec(n, dim, data),
            bin: model.bin,
        }
    }
}

impl From<EmbeddingModel> for AnalysisModel {
    fn from(model: EmbeddingModel) -> Self {
        AnalysisModel::from(&model)
    }
}

impl AnalysisModel {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn bin(&self) -> BinMeta {
        self.bin
    }

    pub fn dim(&self) -> usize {
        self.unit.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.id(word).is_some()
    }

    pub fn id(&self, word: &str) -> Result<u32> {
        self.vocab.id(word).ok_or_else(|| Error::Oov {
            word: word.to_owned(),
            bin: Some(self.bin.index),
        })
    }

    /// Unit-length vector of `word`.
    pub fn unit_vector(&self, word: &str) -> Result<&[f64]> {
        Ok(self.unit.row(self.id(word)? as usize))
    }

    pub fn unit_row(&self, id: u32) -> &[f64] {
        self.unit.row(id as usize)
    }

    /// Cosine similarity of two in-vocabulary words, in `[-1, 1]`.
    pub fn cosine_sim(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.unit_vector(a)?;
        let vb = self.unit_vector(b)?;
        Ok(crate::linalg::dot(va, vb).clamp(-1.0, 1.0))
    }

    /// Exact top-`k` neighbors of `word` over the whole vocabulary.
    pub fn knn(&self, word: &str, k: usize) -> Result<NeighborList> {
        let qid = self.id(word)?;
        if k == 0 || k >= self.len() {
            return Err(Error::InvalidK {
                k,
                vocab_size: self.len(),
            });
        }
        let q = self.unit_row(qid);
        let mut scored: Vec<(f64, u32)> = self
            .unit
            .iter_rows()
            .enumerate()
            .filter(|&(i, _)| i as u32 != qid)
            .map(|(i, row)| (crate::linalg::dot(q, row).clamp(-1.0, 1.0), i as u32))
            .collect();
        let order = |a: &(f64, u32), b: &(f64, u32)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(order);
        Ok(NeighborList {
            query: word.to_owned(),
            bin: self.bin,
            neighbors: scored
                .into_iter()
                .map(|(similarity, id)| Neighbor {
                    word: self.vocab.word(id).unwrap().to_owned(),
                    id,
                    similarity,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy;

    #[test]
    fn cosine_examples() {
        let m = toy(&["a", "b", "c"], &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert!((m.cosine_sim("a", "a").unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(m.cosine_sim("a", "b").unwrap(), 0.0);
        assert!((m.cosine_sim("c", "a").unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
    }

    #[test]
    fn oov_names_word_and_bin() {
        let m = toy(&["a", "b"], &[&[1.0], &[2.0]]);
        let err = m.cosine_sim("a", "zz").unwrap_err();
        assert!(matches!(&err, Error::Oov { word, bin: Some(0) } if word == "zz"));
        assert!(err.to_string().contains("\"zz\""));
    }

    #[test]
    fn knn_toy_matches_scan() {
        let m = toy(
            &["q", "a", "b", "c", "d"],
            &[&[1.0, 0.0], &[0.9, 0.1], &[0.0, 1.0], &[-1.0, 0.0], &[0.5, 0.5]],
        );
        let nn = m.knn("q", 3).unwrap();
        assert_eq!(nn.words().collect::<Vec<_>>(), ["a", "d", "b"]);
        assert!(nn.neighbors.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        let all = m.knn("q", 4).unwrap();
        assert_eq!(all.words().collect::<Vec<_>>(), ["a", "d", "b", "c"]);
    }

    #[test]
    fn knn_ties_break_by_id() {
        let m = toy(&["q", "a", "b", "c"], &[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 2.0], &[0.0, -1.0]]);
        let nn = m.knn("q", 2).unwrap();
        assert_eq!(nn.words().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn knn_rejects_bad_k() {
        let m = toy(&["a", "b", "c"], &[&[1.0], &[2.0], &[3.0]]);
        assert!(matches!(m.knn("a", 3), Err(Error::InvalidK { k: 3, vocab_size: 3 })));
        assert!(matches!(m.knn("a", 0), Err(Error::InvalidK { .. })));
        assert!(matches!(m.knn("x", 1), Err(Error::Oov { .. })));
        assert_eq!(DEFAULT_K, 100);
    }
}
