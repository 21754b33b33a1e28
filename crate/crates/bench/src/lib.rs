//! Fixtures shared by the benchmarks.

use chrono_embed::linalg::Matrix;
use chrono_embed::sgns::{BinMeta, EmbeddingModel};
use chrono_embed::store::AnalysisModel;
use chrono_embed::text::Vocabulary;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i:06}")).collect()
}

/// A model of `n` words with uniform random vectors.
pub fn random_model(n: usize, dim: usize, bin: u32, seed: u64) -> AnalysisModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::build(words(n), 1).expect("nonempty vocabulary");
    let data = (0..n * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    let meta = BinMeta {
        index: bin,
        start_year: 1789 + bin as i32,
        end_year: 1789 + bin as i32,
    };
    AnalysisModel::from(EmbeddingModel::new(vocab, Matrix::from_vec(n, dim, data), meta).expect("shapes match"))
}

/// French-looking running text of about `tokens` tokens.
pub fn sample_text(tokens: usize, seed: u64) -> String {
    const WORDS: [&str; 12] = [
        "le", "Juif", "errant", "l'usurier", "Israël", "société", "et", "des", "MOSAÏSME", "1848", "église", "peuple",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(tokens * 7);
    for i in 0..tokens {
        if i > 0 {
            out.push(if i % 17 == 0 { '.' } else { ' ' });
        }
        out.push_str(WORDS[rng.random_range(0..WORDS.len())]);
    }
    out
}
