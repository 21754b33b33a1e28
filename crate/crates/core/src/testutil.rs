use crate::linalg::Matrix;
use crate::sgns::{BinMeta, EmbeddingModel};
use crate::store::AnalysisModel;
use crate::text::Vocabulary;

/// Builds a vocabulary whose ids follow the order of `words`.
pub fn vocab(words: &[&str]) -> Vocabulary {
    let tokens: Vec<&str> = words
        .iter()
        .enumerate()
        .flat_map(|(i, w)| std::iter::repeat_n(*w, words.len() - i))
        .collect();
    let vocab = Vocabulary::build(tokens, 1).unwrap();
    assert_eq!(vocab.words(), words);
    vocab
}

pub fn raw(words: &[&str], rows: &[&[f32]], bin: u32) -> EmbeddingModel {
    let dim = rows[0].len();
    let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let meta = BinMeta {
        index: bin,
        start_year: 1789 + bin as i32,
        end_year: 1789 + bin as i32,
    };
    EmbeddingModel::new(vocab(words), Matrix::from_vec(words.len(), dim, data), meta).unwrap()
}

pub fn toy(words: &[&str], rows: &[&[f32]]) -> AnalysisModel {
    AnalysisModel::from(raw(words, rows, 0))
}

pub fn toy_bin(words: &[&str], rows: &[&[f32]], bin: u32) -> AnalysisModel {
    AnalysisModel::from(raw(words, rows, bin))
}
