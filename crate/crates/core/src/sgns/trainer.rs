use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::{log_sigmoid, sigmoid};
use super::{BinMeta, EmbeddingModel, TrainConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::text::Vocabulary;

const MIN_LR_FRACTION: f64 = 1e-4;
const LR_UPDATE_WORDS: u64 = 10_000;

/// Row access shared by the single-worker path (plain slices) and the
/// multi-worker path (relaxed atomics, lost updates tolerated).
trait Rows {
    fn read(&self, row: usize, dst: &mut [f32]);
    fn dot(&self, row: usize, x: &[f32]) -> f32;
    /// `dst += a * self[row]`
    fn add_scaled_to(&self, row: usize, a: f32, dst: &mut [f32]);
    /// `self[row] += a * x`
    fn axpy(&mut self, row: usize, a: f32, x: &[f32]);
}

struct PlainRows<'a> {
    data: &'a mut [f32],
    dim: usize,
}

impl PlainRows<'_> {
    fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }
}

impl Rows for PlainRows<'_> {
    fn read(&self, row: usize, dst: &mut [f32]) {
        dst.copy_from_slice(self.row(row));
    }

    fn dot(&self, row: usize, x: &[f32]) -> f32 {
        self.row(row).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    fn add_scaled_to(&self, row: usize, a: f32, dst: &mut [f32]) {
        for (d, &v) in dst.iter_mut().zip(self.row(row)) {
            *d += a * v;
        }
    }

    fn axpy(&mut self, row: usize, a: f32, x: &[f32]) {
        let r = &mut self.data[row * self.dim..(row + 1) * self.dim];
        for (v, &xi) in r.iter_mut().zip(x) {
            *v += a * xi;
        }
    }
}

#[derive(Clone, Copy)]
struct SharedRows<'a> {
    data: &'a [AtomicU32],
    dim: usize,
}

impl SharedRows<'_> {
    fn row(&self, row: usize) -> impl Iterator<Item = f32> + '_ {
        self.data[row * self.dim..(row + 1) * self.dim]
            .iter()
            .map(|a| f32::from_bits(a.load(Ordering::Relaxed)))
    }
}

impl Rows for SharedRows<'_> {
    fn read(&self, row: usize, dst: &mut [f32]) {
        for (d, v) in dst.iter_mut().zip(self.row(row)) {
            *d = v;
        }
    }

    fn dot(&self, row: usize, x: &[f32]) -> f32 {
        self.row(row).zip(x).map(|(a, b)| a * b).sum()
    }

    fn add_scaled_to(&self, row: usize, a: f32, dst: &mut [f32]) {
        for (d, v) in dst.iter_mut().zip(self.row(row)) {
            *d += a * v;
        }
    }

    fn axpy(&mut self, row: usize, a: f32, x: &[f32]) {
        let cells = &self.data[row * self.dim..(row + 1) * self.dim];
        for (cell, &xi) in cells.iter().zip(x) {
            let v = f32::from_bits(cell.load(Ordering::Relaxed)) + a * xi;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

/// One SGD step on the pair loss. Returns the loss before the update.
#[allow(clippy::too_many_arguments)]
fn pair_step<R: Rows>(
    input: &mut R,
    output: &mut R,
    center: usize,
    context: u32,
    negatives: &[u32],
    lr: f32,
    w: &mut [f32],
    grad: &mut [f32],
) -> f64 {
    input.read(center, w);
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0f64;
    let targets = std::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (target, positive) in targets {
        let t = target as usize;
        let score = output.dot(t, w);
        // step along label - σ(score), the negative loss derivative
        let (g, l) = if positive {
            (1.0 - sigmoid(score), -log_sigmoid(score))
        } else {
            (-sigmoid(score), -log_sigmoid(-score))
        };
        loss += f64::from(l);
        let g = g * lr;
        output.add_scaled_to(t, g, grad);
        output.axpy(t, g, w);
    }
    input.axpy(center, 1.0, grad);
    loss
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    /// Mean loss per (center, context) pair for each epoch.
    pub epoch_loss: Vec<f64>,
    pub epoch_pairs: Vec<u64>,
    /// In-vocabulary tokens per epoch, before subsampling.
    pub train_words: u64,
}

struct Shared<'a> {
    cfg: &'a TrainConfig,
    sampler: Option<&'a WeightedIndex<f64>>,
    keep: &'a [f64],
    progress: &'a AtomicU64,
    total_words: u64,
}

struct Worker<'a, R> {
    shared: &'a Shared<'a>,
    input: R,
    output: R,
    rng: ChaCha8Rng,
    dim: usize,
}

impl<R: Rows> Worker<'_, R> {
    fn lr(&self, done: u64) -> f32 {
        let frac = 1.0 - done as f64 / (self.shared.total_words + 1) as f64;
        (self.shared.cfg.initial_lr * frac.max(MIN_LR_FRACTION)) as f32
    }

    fn run(&mut self, docs: &[Vec<u32>]) -> Vec<(f64, u64)> {
        let cfg = self.shared.cfg;
        let mut w = vec![0.0f32; self.dim];
        let mut grad = vec![0.0f32; self.dim];
        let mut negs = Vec::with_capacity(cfg.negatives);
        let mut sentence = Vec::new();
        let mut per_epoch = Vec::with_capacity(cfg.epochs);
        let mut pending = 0u64;
        let mut lr = self.lr(self.shared.progress.load(Ordering::Relaxed));

        for _ in 0..cfg.epochs {
            let (mut loss, mut pairs) = (0.0f64, 0u64);
            for doc in docs {
                sentence.clear();
                for &id in doc {
                    let p = self.shared.keep[id as usize];
                    if p >= 1.0 || self.rng.random::<f64>() < p {
                        sentence.push(id);
                    }
                }
                pending += doc.len() as u64;
                if pending >= LR_UPDATE_WORDS {
                    let done = self.shared.progress.fetch_add(pending, Ordering::Relaxed) + pending;
                    pending = 0;
                    lr = self.lr(done);
                }

                for pos in 0..sentence.len() {
                    let span = if cfg.dynamic_window {
                        self.rng.random_range(1..=cfg.window)
                    } else {
                        cfg.window
                    };
                    let lo = pos.saturating_sub(span);
                    let hi = (pos + span).min(sentence.len() - 1);
                    let center = sentence[pos] as usize;
                    for (cpos, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                        if cpos == pos {
                            continue;
                        }
                        negs.clear();
                        if let Some(sampler) = self.shared.sampler {
                            for _ in 0..cfg.negatives {
                                let n = sampler.sample(&mut self.rng) as u32;
                                if n != context {
                                    negs.push(n);
                                }
                            }
                        }
                        loss += pair_step(
                            &mut self.input,
                            &mut self.output,
                            center,
                            context,
                            &negs,
                            lr,
                            &mut w,
                            &mut grad,
                        );
                        pairs += 1;
                    }
                }
            }
            per_epoch.push((loss, pairs));
        }
        self.shared.progress.fetch_add(pending, Ordering::Relaxed);
        per_epoch
    }
}

fn split_by_tokens(docs: &[Vec<u32>], parts: usize) -> Vec<&[Vec<u32>]> {
    let total: usize = docs.iter().map(Vec::len).sum();
    let per = total.div_ceil(parts.max(1)).max(1);
    let mut chunks = Vec::with_capacity(parts);
    let (mut start, mut acc) = (0, 0);
    for (i, d) in docs.iter().enumerate() {
        acc += d.len();
        if acc >= per && chunks.len() + 1 < parts {
            chunks.push(&docs[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    chunks.push(&docs[start..]);
    chunks
}

fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64 + 1);
    rng
}

/// Trains one SGNS model on the documents of a bin.
///
/// Tokens missing from `vocab` are dropped before windowing; windows never
/// cross document boundaries. Input vectors start uniform in
/// `[-0.5/dim, 0.5/dim)` and output vectors at zero. With `workers == 1`
/// the result is bit-identical across runs for the same seed.
pub fn train<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocab);
    }
    let dim = cfg.dim;
    let n = vocab.len();

    let encoded: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|t| vocab.id(t.as_ref())).collect::<Vec<u32>>())
        .filter(|d| !d.is_empty())
        .collect();
    let train_words: u64 = encoded.iter().map(|d| d.len() as u64).sum();

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / dim as f32;
    let mut input: Vec<f32> = (0..n * dim).map(|_| init_rng.random_range(-half..half)).collect();
    let mut output = vec![0.0f32; n * dim];

    let weights: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| (c as f64).powf(cfg.unigram_power))
        .collect();
    let sampler = WeightedIndex::new(&weights).ok();

    // keep probability (sqrt(f / (t T)) + 1) (t T) / f
    let keep: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| {
            if cfg.subsample_threshold <= 0.0 {
                return 1.0;
            }
            let thresh = cfg.subsample_threshold * train_words as f64;
            let f = c as f64;
            ((f / thresh).sqrt() + 1.0) * thresh / f
        })
        .collect();

    let progress = AtomicU64::new(0);
    let shared = Shared {
        cfg,
        sampler: sampler.as_ref(),
        keep: &keep,
        progress: &progress,
        total_words: train_words * cfg.epochs as u64,
    };

    let per_worker: Vec<Vec<(f64, u64)>> = if cfg.workers == 1 {
        let mut worker = Worker {
            shared: &shared,
            input: PlainRows { data: &mut input, dim },
            output: PlainRows { data: &mut output, dim },
            rng: worker_rng(cfg.seed, 0),
            dim,
        };
        vec![worker.run(&encoded)]
    } else {
        let atomic_in: Vec<AtomicU32> = input.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let atomic_out: Vec<AtomicU32> = output.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let chunks = split_by_tokens(&encoded, cfg.workers);
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .enumerate()
                .map(|(i, chunk)| {
                    let mut worker = Worker {
                        shared: &shared,
                        input: SharedRows { data: &atomic_in, dim },
                        output: SharedRows { data: &atomic_out, dim },
                        rng: worker_rng(cfg.seed, i),
                        dim,
                    };
                    scope.spawn(move || worker.run(chunk))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });
        input = atomic_in.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
        output = atomic_out.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
        results
    };

    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut epoch_pairs = Vec::with_capacity(cfg.epochs);
    for e in 0..cfg.epochs {
        let (loss, pairs) = per_worker
            .iter()
            .fold((0.0, 0u64), |(l, p), w| (l + w[e].0, p + w[e].1));
        epoch_pairs.push(pairs);
        epoch_loss.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }

    let model = EmbeddingModel {
        vocab: vocab.clone(),
        input: Matrix::from_vec(n, dim, input),
        output: Some(Matrix::from_vec(n, dim, output)),
        bin: BinMeta::default(),
    };
    if !model.is_finite() {
        return Err(Error::Degenerate(
            "training produced non-finite parameters; lower the learning rate".into(),
        ));
    }
    Ok(TrainOutcome {
        model,
        epoch_loss,
        epoch_pairs,
        train_words,
    })
}
