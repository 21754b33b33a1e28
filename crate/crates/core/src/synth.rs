//! Synthetic corpora with planted structure.
//!
//! Sentences are drawn from disjoint topics of made-up words (`t3w17` is
//! word 17 of topic 3). Probe words are inserted into chosen topics so that
//! their true neighborhoods are known in advance.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bias::Stream;
use crate::corpus::{DocKind, Document};

pub const TARGET: &str = "target";
pub const CONTROL: &str = "control";
pub const SENTENCE_LEN: usize = 12;

pub type Sentences = Vec<Vec<String>>;

#[derive(Debug, Clone)]
pub struct Topics {
    words: Vec<Vec<String>>,
}

impl Topics {
    pub fn new(topics: usize, words_per_topic: usize) -> Self {
        Topics {
            words: (0..topics)
                .map(|t| (0..words_per_topic).map(|i| format!("t{t}w{i}")).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self, topic: usize) -> &[String] {
        &self.words[topic]
    }

    /// Adds `extra` to the word list of `topic`.
    pub fn extend(&mut self, topic: usize, extra: impl IntoIterator<Item = String>) {
        self.words[topic].extend(extra);
    }

    pub fn sentence(&self, rng: &mut impl Rng, topic: usize) -> Vec<String> {
        let words = &self.words[topic];
        (0..SENTENCE_LEN).map(|_| words.choose(rng).unwrap().clone()).collect()
    }
}

/// A word inserted into sentences of one topic with some probability.
#[derive(Debug, Clone, Copy)]
pub struct Probe<'a> {
    pub word: &'a str,
    pub topic: usize,
    pub rate: f64,
}

/// About `tokens` tokens of topic sentences with the probes planted.
pub fn sentences(rng: &mut impl Rng, topics: &Topics, tokens: usize, probes: &[Probe<'_>]) -> Sentences {
    let mut out = Vec::with_capacity(tokens / SENTENCE_LEN + 1);
    for _ in 0..tokens.div_ceil(SENTENCE_LEN) {
        let topic = rng.random_range(0..topics.len());
        let mut s = topics.sentence(rng, topic);
        for p in probes.iter().filter(|p| p.topic == topic) {
            if rng.random_bool(p.rate) {
                let at = rng.random_range(0..s.len());
                s[at] = p.word.to_owned();
            }
        }
        out.push(s);
    }
    out
}

/// Two bins: [`TARGET`] moves from topic 0 to topic 1, [`CONTROL`] stays
/// in topic 2.
pub fn planted_drift(seed: u64, tokens_per_bin: usize) -> [Sentences; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = Topics::new(8, 40);
    let bin = |rng: &mut ChaCha8Rng, target_topic| {
        let probes = [
            Probe { word: TARGET, topic: target_topic, rate: 0.5 },
            Probe { word: CONTROL, topic: 2, rate: 0.5 },
        ];
        sentences(rng, &topics, tokens_per_bin, &probes)
    };
    let first = bin(&mut rng, 0);
    let second = bin(&mut rng, 1);
    [first, second]
}

/// Positive poles of `stream` form topic 0 and negative poles topic 1;
/// [`TARGET`] appears with the negative poles and [`CONTROL`] in the
/// neutral topic 2.
pub fn planted_bias(seed: u64, stream: &Stream, tokens: usize) -> Sentences {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut topics = Topics::new(6, 30);
    let mut pos: Vec<String> = stream.pairs.iter().map(|p| p.positive.clone()).collect();
    let mut neg: Vec<String> = stream.pairs.iter().map(|p| p.negative.clone()).collect();
    pos.sort();
    pos.dedup();
    neg.sort();
    neg.dedup();
    topics.extend(0, pos);
    topics.extend(1, neg);
    let probes = [
        Probe { word: TARGET, topic: 1, rate: 0.5 },
        Probe { word: CONTROL, topic: 2, rate: 0.5 },
    ];
    sentences(&mut rng, &topics, tokens, &probes)
}

/// Sentences where `aa` and `bb` fill the same slots interchangeably.
pub fn interchangeable_pair(seed: u64, tokens: usize) -> Sentences {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = Topics::new(6, 30);
    let mut out = sentences(&mut rng, &topics, tokens, &[]);
    for s in &mut out {
        if s[0].starts_with("t0") {
            let at = rng.random_range(0..s.len());
            s[at] = if rng.random_bool(0.5) { "aa" } else { "bb" }.to_owned();
        }
    }
    out
}

/// Year-stamped documents for 1789..1789+years. Most mention the keyword
/// "juif"; some do not, and some have low OCR quality. The keyword's topic
/// shifts halfway through the period.
pub fn pipeline_documents(seed: u64, years: i32, docs_per_year: usize, sentences_per_doc: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = Topics::new(5, 20);
    let mut docs = Vec::new();
    for y in 0..years {
        let year = 1789 + y;
        let keyword_topic = if y < years / 2 { 0 } else { 1 };
        let probes = [
            Probe { word: "juif", topic: keyword_topic, rate: 0.6 },
            Probe { word: "catholique", topic: 3, rate: 0.6 },
        ];
        for d in 0..docs_per_year {
            let roll: f64 = rng.random();
            let body = if roll < 0.1 { &[][..] } else { &probes[..] };
            let text: Vec<String> = sentences(&mut rng, &topics, sentences_per_doc * SENTENCE_LEN, body)
                .into_iter()
                .map(|s| s.join(" ") + ".")
                .collect();
            let mut text = text.join(" ");
            if !body.is_empty() && !text.contains("juif") {
                text.push_str(" Juif.");
            }
            let ocr_quality = if rng.random_bool(0.1) { 0.9 } else { 0.99 };
            let kind = if d % 2 == 0 { DocKind::Book } else { DocKind::Periodical };
            docs.push(Document::new(format!("doc-{year}-{d}"), year, kind, ocr_quality, text).unwrap());
        }
    }
    docs
}

/// One JSON object per line, in the ingest input format.
pub fn to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d).expect("documents serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::default_streams;

    fn count(s: &Sentences, w: &str) -> usize {
        s.iter().flatten().filter(|t| *t == w).count()
    }

    #[test]
    fn drift_probes_land_in_their_topics() {
        let [a, b] = planted_drift(3, 20_000);
        assert!(a.len() * SENTENCE_LEN >= 20_000);
        for s in &a {
            if s.contains(&TARGET.to_owned()) {
                assert!(s.iter().all(|w| w == TARGET || w == CONTROL || w.starts_with("t0")));
            }
        }
        for s in &b {
            if s.contains(&TARGET.to_owned()) {
                assert!(s.iter().all(|w| w == TARGET || w.starts_with("t1")));
            }
        }
        assert!(count(&a, TARGET) > 50 && count(&b, CONTROL) > 50);
        assert_eq!(planted_drift(3, 1000), planted_drift(3, 1000));
    }

    #[test]
    fn bias_target_sits_with_negative_poles() {
        let stream = default_streams().get("ethic").unwrap().clone();
        let s = planted_bias(1, &stream, 30_000);
        assert!(count(&s, "immoral") > 50);
        for sent in s.iter().filter(|x| x.iter().any(|w| w == TARGET)) {
            assert!(!sent.iter().any(|w| w == "moral"));
        }
    }

    #[test]
    fn pipeline_documents_roundtrip_as_jsonl() {
        let docs = pipeline_documents(7, 10, 3, 4);
        assert_eq!(docs.len(), 30);
        let (back, report) = crate::corpus::read_documents(to_jsonl(&docs).as_bytes()).unwrap();
        assert_eq!(back, docs);
        assert_eq!(report.malformed, 0);
    }
}
