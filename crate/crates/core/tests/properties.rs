use std::collections::{BTreeMap, HashSet};

use chrono_embed::bias::{explained_variance, mean_bias, stream_axes, AntonymPair, Stream};
use chrono_embed::corpus::{filter_documents, plan_bins_counted, DocKind, DocTokens, Document, KeywordSet};
use chrono_embed::drift::{local_change, neighbor_diff};
use chrono_embed::linalg::{dot, Matrix};
use chrono_embed::sgns::{BinMeta, EmbeddingModel};
use chrono_embed::store::AnalysisModel;
use chrono_embed::text::{tokenize, Vocabulary};
use proptest::prelude::*;

fn words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i:02}")).collect()
}

fn model(n: usize, dim: usize, data: Vec<f32>, bin: u32) -> AnalysisModel {
    let ws = words(n);
    let tokens: Vec<&str> = ws
        .iter()
        .enumerate()
        .flat_map(|(i, w)| std::iter::repeat_n(w.as_str(), n - i))
        .collect();
    let vocab = Vocabulary::build(tokens, 1).unwrap();
    let meta = BinMeta {
        index: bin,
        start_year: 1800 + bin as i32,
        end_year: 1800 + bin as i32,
    };
    AnalysisModel::from(EmbeddingModel::new(vocab, Matrix::from_vec(n, dim, data), meta).unwrap())
}

fn nonzero_rows(n: usize, dim: usize) -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(-1.0f32..1.0, n * dim).prop_filter("zero row", move |v| {
        v.chunks(dim).all(|r| r.iter().any(|x| x.abs() > 1e-3))
    })
}

fn year_docs() -> impl Strategy<Value = Vec<DocTokens>> {
    prop::collection::vec((1789i32..1830, 0u64..500), 0..60).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (year, tokens))| DocTokens {
                id: format!("d{i}"),
                year,
                tokens,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bins_partition_and_balance(docs in year_docs(), target in 1u64..2000) {
        let bins = plan_bins_counted(&docs, target).unwrap();
        let total: u64 = docs.iter().map(|d| d.tokens).sum();
        prop_assert_eq!(bins.iter().map(|b| b.token_count).sum::<u64>(), total);

        let mut seen = HashSet::new();
        for b in &bins {
            for id in &b.doc_ids {
                prop_assert!(seen.insert(id.clone()));
            }
        }
        prop_assert_eq!(seen.len(), docs.len());

        let mut per_year: BTreeMap<i32, u64> = BTreeMap::new();
        for d in &docs {
            *per_year.entry(d.year).or_default() += d.tokens;
        }
        let year_of: BTreeMap<&str, i32> = docs.iter().map(|d| (d.id.as_str(), d.year)).collect();
        for (i, b) in bins.iter().enumerate() {
            prop_assert_eq!(b.index as usize, i);
            prop_assert!(b.start_year <= b.end_year);
            if i > 0 {
                prop_assert!(bins[i - 1].end_year < b.start_year);
            }
            for id in &b.doc_ids {
                let y = year_of[id.as_str()];
                prop_assert!(b.start_year <= y && y <= b.end_year);
            }
            let max_year = per_year.range(b.start_year..=b.end_year).map(|(_, t)| *t).max().unwrap_or(0);
            if i + 1 < bins.len() {
                prop_assert!(target <= b.token_count);
                prop_assert!(b.token_count < target + max_year);
            }
        }
    }
}

fn doc_strategy() -> impl Strategy<Value = Document> {
    const POOL: [&str; 11] = ["le", "Juif", "juif", "JUIF", "Israël", "Israel", "juifs", "talmud", "errant", "l'usurier", "1848"];
    (prop::collection::vec(prop::sample::select(&POOL[..]), 0..8), 0.9f64..1.0, 1789i32..1915).prop_map(
        |(ws, ocr, year)| Document::new("d", year, DocKind::Book, ocr, ws.join(" ")).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn filtering_is_idempotent(docs in prop::collection::vec(doc_strategy(), 0..20), min_ocr in 0.9f64..1.0) {
        let kw = KeywordSet::default_set();
        let once = filter_documents(docs, &kw, min_ocr).unwrap();
        let twice = filter_documents(once.clone(), &kw, min_ocr).unwrap();
        prop_assert_eq!(&once, &twice);
        for d in &once {
            prop_assert!(d.ocr_quality >= min_ocr);
        }
    }

    #[test]
    fn tokens_are_lowercase_and_stable(text in "[A-Za-zéÉèëï0-9' ,.-]{0,60}") {
        let tokens = tokenize(&text);
        for t in &tokens {
            prop_assert_eq!(t.to_lowercase(), t.clone());
            prop_assert!(!t.chars().all(|c| c.is_numeric()));
        }
        prop_assert_eq!(tokenize(&tokens.join(" ")), tokens);
    }

    #[test]
    fn local_change_is_bounded_and_symmetric(
        a in nonzero_rows(12, 4),
        b in nonzero_rows(12, 4),
        k in 1usize..11,
        target in 0usize..12,
    ) {
        let (ma, mb) = (model(12, 4, a, 0), model(12, 4, b, 1));
        let w = format!("w{target:02}");
        match (local_change(&w, &ma, &mb, k), local_change(&w, &mb, &ma, k)) {
            (Ok(ab), Ok(ba)) => {
                prop_assert!((0.0..=2.0).contains(&ab));
                prop_assert!((ab - ba).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric result {other:?}"),
        }
        prop_assert!(local_change(&w, &ma, &ma, k).unwrap() < 1e-12);
        let diff = neighbor_diff(&w, &ma, &mb, k).unwrap();
        prop_assert_eq!(diff.introduced.len(), diff.eliminated.len());
    }

    #[test]
    fn mean_bias_is_linear_and_antisymmetric(
        data in nonzero_rows(10, 5),
        pairs in prop::collection::vec((0usize..10, 0usize..10), 1..6),
        target in 0usize..10,
    ) {
        let m = model(10, 5, data, 0);
        let pairs: Vec<AntonymPair> = pairs
            .into_iter()
            .filter(|(p, n)| p != n)
            .map(|(p, n)| AntonymPair::new(format!("w{p:02}"), format!("w{n:02}")).unwrap())
            .collect();
        prop_assume!(!pairs.is_empty());
        let stream = Stream::new("s", pairs[0].clone(), pairs).unwrap();
        let w = format!("w{target:02}");
        let b = mean_bias(&m, &w, &stream).unwrap();

        let (axes, _) = stream_axes(&m, &stream);
        let mut mean_axis = vec![0.0; 5];
        for g in &axes {
            for (acc, x) in mean_axis.iter_mut().zip(g) {
                *acc += x / axes.len() as f64;
            }
        }
        let direct = dot(m.unit_vector(&w).unwrap(), &mean_axis);
        prop_assert!((b.value - direct).abs() <= 1e-12);
        prop_assert_eq!(mean_bias(&m, &w, &stream.swapped()).unwrap().value, -b.value);
    }

    #[test]
    fn explained_variance_fractions(rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 2..10)) {
        let f = explained_variance(&rows);
        prop_assert_eq!(f.len(), rows.len().min(6));
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(f.iter().all(|&x| x >= 0.0));
        prop_assert!(f.windows(2).all(|w| w[0] >= w[1]));
    }
}
