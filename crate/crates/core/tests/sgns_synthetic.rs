use chrono_embed::bias::{default_streams, mean_bias};
use chrono_embed::drift::local_change;
use chrono_embed::sgns::{train, TrainConfig};
use chrono_embed::store::AnalysisModel;
use chrono_embed::synth;
use chrono_embed::text::Vocabulary;

fn small(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 32,
        window: 4,
        min_count: 5,
        epochs: 3,
        seed,
        ..TrainConfig::default()
    }
}

fn vocab(docs: &[Vec<String>], cfg: &TrainConfig) -> Vocabulary {
    Vocabulary::build(docs.iter().flatten(), cfg.min_count).unwrap()
}

fn fit(docs: &[Vec<String>], cfg: &TrainConfig) -> AnalysisModel {
    AnalysisModel::from(train(docs, &vocab(docs, cfg), cfg).unwrap().model)
}

#[test]
fn epoch_loss_does_not_increase() {
    let docs = synth::planted_drift(5, 60_000)[0].clone();
    let cfg = TrainConfig { epochs: 5, ..small(5) };
    let out = train(&docs, &vocab(&docs, &cfg), &cfg).unwrap();
    assert_eq!(out.epoch_loss.len(), 5);
    for w in out.epoch_loss.windows(2) {
        assert!(w[1] <= w[0] + 1e-3, "{:?}", out.epoch_loss);
    }
    assert!(out.epoch_loss[4] < out.epoch_loss[0]);
}

#[test]
fn interchangeable_words_end_up_close() {
    let docs = synth::interchangeable_pair(2, 100_000);
    let m = fit(&docs, &small(2));
    let cos = m.cosine_sim("aa", "bb").unwrap();
    assert!(cos >= 0.9, "cos(aa, bb) = {cos}");
}

#[test]
fn planted_drift_single_run() {
    let [a, b] = synth::planted_drift(11, 100_000);
    let cfg = small(11);
    let (ma, mb) = (fit(&a, &cfg), fit(&b, &cfg));
    let target = local_change(synth::TARGET, &ma, &mb, 10).unwrap();
    let control = local_change(synth::CONTROL, &ma, &mb, 10).unwrap();
    assert!(target > control, "target {target} control {control}");
}

#[test]
fn planted_bias_single_run() {
    let stream = default_streams().get("ethic").unwrap().clone();
    let docs = synth::planted_bias(4, &stream, 100_000);
    let m = fit(&docs, &small(4));
    let target = mean_bias(&m, synth::TARGET, &stream).unwrap();
    let control = mean_bias(&m, synth::CONTROL, &stream).unwrap();
    assert_eq!(target.usable, stream.len());
    assert!(target.value > 0.0 && target.value > control.value, "{} {}", target.value, control.value);
}

#[test]
fn multi_worker_training_learns_the_same_structure() {
    let docs = synth::interchangeable_pair(8, 60_000);
    let cfg = TrainConfig { workers: 3, ..small(8) };
    let m = fit(&docs, &cfg);
    assert!(m.cosine_sim("aa", "bb").unwrap() > 0.8);
}
