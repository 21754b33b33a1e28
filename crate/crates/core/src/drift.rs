//! Local neighborhood change of a word between bins.
//!
//! For two models the target's k-NN sets are merged into one support list;
//! in each model the target's cosine similarities to that list form a
//! second-order vector, and the change is the cosine distance between the
//! two vectors. No alignment of the embedding spaces is needed.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sgns::BinMeta;
use crate::store::{AnalysisModel, Neighbor};

/// Second-order vectors of one word in two models over a shared support.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderVectors {
    pub word: String,
    /// Union of both k-NN sets, sorted lexicographically.
    pub support: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Support words absent from model A (their value in `a` is 0).
    pub missing_in_a: Vec<String>,
    pub missing_in_b: Vec<String>,
}

fn similarities(model: &AnalysisModel, word: &str, support: &[String]) -> Result<(Vec<f64>, Vec<String>)> {
    let target = model.unit_vector(word)?;
    let mut missing = Vec::new();
    let values = support
        .iter()
        .map(|s| match model.vocab().id(s) {
            Some(id) => linalg::dot(target, model.unit_row(id)).clamp(-1.0, 1.0),
            None => {
                log::info!("{s:?} is out of vocabulary in bin {}; using similarity 0", model.bin().index);
                missing.push(s.clone());
                0.0
            }
        })
        .collect();
    Ok((values, missing))
}

pub fn second_order_vectors(word: &str, a: &AnalysisModel, b: &AnalysisModel, k: usize) -> Result<SecondOrderVectors> {
    let nn_a = a.knn(word, k)?;
    let nn_b = b.knn(word, k)?;
    let support: Vec<String> = nn_a
        .words()
        .chain(nn_b.words())
        .collect::<BTreeSet<&str>>()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let (va, missing_in_a) = similarities(a, word, &support)?;
    let (vb, missing_in_b) = similarities(b, word, &support)?;
    Ok(SecondOrderVectors {
        word: word.to_owned(),
        support,
        a: va,
        b: vb,
        missing_in_a,
        missing_in_b,
    })
}

/// Cosine distance between the second-order vectors of `word` in `a` and
/// `b`, in `[0, 2]`. Symmetric in `a` and `b`.
pub fn local_change(word: &str, a: &AnalysisModel, b: &AnalysisModel, k: usize) -> Result<f64> {
    let s = second_order_vectors(word, a, b, k)?;
    let (na, nb) = (linalg::norm(&s.a), linalg::norm(&s.b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate(format!(
            "second-order vector of {word:?} has zero norm in bin {}",
            if na == 0.0 { a.bin().index } else { b.bin().index }
        )));
    }
    let cos = linalg::dot(&s.a, &s.b) / (na * nb);
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    /// Every bin against the earliest usable bin.
    VsFirst,
    /// Every bin against its predecessor.
    VsPrevious,
}

impl fmt::Display for DriftMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriftMode::VsFirst => "vs_first",
            DriftMode::VsPrevious => "vs_previous",
        })
    }
}

impl FromStr for DriftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vs_first" => Ok(DriftMode::VsFirst),
            "vs_previous" => Ok(DriftMode::VsPrevious),
            other => Err(Error::Config(format!(
                "unknown drift mode {other:?}, expected vs_first or vs_previous"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftPoint {
    pub bin: BinMeta,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSeries {
    pub word: String,
    pub mode: DriftMode,
    pub points: Vec<DriftPoint>,
    /// Bins skipped because the word was unusable there.
    pub warnings: Vec<String>,
}

fn usable(model: &AnalysisModel, word: &str, k: usize) -> std::result::Result<(), String> {
    let bin = model.bin();
    if !model.contains(word) {
        return Err(format!("bin {} ({}): {word:?} is out of vocabulary", bin.index, bin.label()));
    }
    if k == 0 || k >= model.len() {
        return Err(format!(
            "bin {} ({}): k = {k} is invalid for {} words",
            bin.index,
            bin.label(),
            model.len()
        ));
    }
    Ok(())
}

/// Change series of `word` over chronologically ordered `models`. Bins
/// where the word is out of vocabulary are skipped with a warning.
pub fn drift_series(word: &str, models: &[AnalysisModel], k: usize, mode: DriftMode) -> Result<DriftSeries> {
    let mut warnings = Vec::new();
    let kept: Vec<&AnalysisModel> = models
        .iter()
        .filter(|m| match usable(m, word, k) {
            Ok(()) => true,
            Err(w) => {
                log::warn!("{w}");
                warnings.push(w);
                false
            }
        })
        .collect();
    if kept.len() < 2 {
        return Err(Error::TooFewBins {
            word: word.to_owned(),
            usable: kept.len(),
            required: 2,
        });
    }

    let points = match mode {
        DriftMode::VsFirst => {
            let reference = kept[0];
            let mut points = vec![DriftPoint {
                bin: reference.bin(),
                distance: 0.0,
            }];
            let rest: Result<Vec<DriftPoint>> = kept[1..]
                .par_iter()
                .map(|m| {
                    Ok(DriftPoint {
                        bin: m.bin(),
                        distance: local_change(word, reference, m, k)?,
                    })
                })
                .collect();
            points.extend(rest?);
            points
        }
        DriftMode::VsPrevious => kept
            .par_windows(2)
            .map(|pair| {
                Ok(DriftPoint {
                    bin: pair[1].bin(),
                    distance: local_change(word, pair[0], pair[1], k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(DriftSeries {
        word: word.to_owned(),
        mode,
        points,
        warnings,
    })
}

/// Neighbors gained and lost by `word` between bins `a` and `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborDiff {
    pub word: String,
    pub from: BinMeta,
    pub to: BinMeta,
    /// In the k-NN of `b` but not of `a`, by similarity in `b`.
    pub introduced: Vec<Neighbor>,
    /// In the k-NN of `a` but not of `b`, by similarity in `a`.
    pub eliminated: Vec<Neighbor>,
}

pub fn neighbor_diff(word: &str, a: &AnalysisModel, b: &AnalysisModel, k: usize) -> Result<NeighborDiff> {
    let nn_a = a.knn(word, k)?;
    let nn_b = b.knn(word, k)?;
    let in_a: HashSet<&str> = nn_a.words().collect();
    let in_b: HashSet<&str> = nn_b.words().collect();
    let introduced = nn_b
        .neighbors
        .iter()
        .filter(|n| !in_a.contains(n.word.as_str()))
        .cloned()
        .collect();
    let eliminated = nn_a
        .neighbors
        .iter()
        .filter(|n| !in_b.contains(n.word.as_str()))
        .cloned()
        .collect();
    Ok(NeighborDiff {
        word: word.to_owned(),
        from: a.bin(),
        to: b.bin(),
        introduced,
        eliminated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy_bin;

    const WORDS: [&str; 5] = ["t", "a", "b", "c", "d"];

    fn model_a() -> AnalysisModel {
        toy_bin(&WORDS, &[&[1.0, 0.0], &[1.0, 0.2], &[0.8, 0.6], &[0.0, 1.0], &[-1.0, 0.1]], 0)
    }

    fn model_b() -> AnalysisModel {
        toy_bin(&WORDS, &[&[1.0, 0.0], &[0.0, 1.0], &[0.9, 0.1], &[1.0, 0.3], &[-1.0, 0.1]], 1)
    }

    fn cos2(u: [f64; 2], v: [f64; 2]) -> f64 {
        (u[0] * v[0] + u[1] * v[1]) / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt())
    }

    #[test]
    fn hand_computed_second_order_vectors() {
        // k=2: A neighbors {a, b}, B neighbors {b, c}; union sorted = [a, b, c]
        let s = second_order_vectors("t", &model_a(), &model_b(), 2).unwrap();
        assert_eq!(s.support, ["a", "b", "c"]);
        let ea = [cos2([1.0, 0.0], [1.0, 0.2]), cos2([1.0, 0.0], [0.8, 0.6]), 0.0];
        let eb = [0.0, cos2([1.0, 0.0], [0.9, 0.1]), cos2([1.0, 0.0], [1.0, 0.3])];
        for i in 0..3 {
            assert!((s.a[i] - ea[i]).abs() < 1e-6, "{i}");
            assert!((s.b[i] - eb[i]).abs() < 1e-6, "{i}");
        }
        let d = local_change("t", &model_a(), &model_b(), 2).unwrap();
        let dot: f64 = ea.iter().zip(&eb).map(|(x, y)| x * y).sum();
        let n = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((d - (1.0 - dot / (n(&ea) * n(&eb)))).abs() < 1e-6);
    }

    #[test]
    fn identical_models_have_zero_change() {
        let a = model_a();
        let s = second_order_vectors("t", &a, &a, 3).unwrap();
        assert_eq!(s.a, s.b);
        assert!(local_change("t", &a, &a, 3).unwrap().abs() < 1e-12);
        let diff = neighbor_diff("t", &a, &a, 2).unwrap();
        assert!(diff.introduced.is_empty() && diff.eliminated.is_empty());
    }

    #[test]
    fn symmetric() {
        let (a, b) = (model_a(), model_b());
        for k in 1..4 {
            let ab = local_change("t", &a, &b, k).unwrap();
            let ba = local_change("t", &b, &a, k).unwrap();
            assert!((ab - ba).abs() < 1e-15);
            assert!((0.0..=2.0).contains(&ab));
        }
    }

    #[test]
    fn oov_support_word_counts_as_zero() {
        let a = toy_bin(&["t", "a", "x"], &[&[1.0, 0.0], &[1.0, 0.1], &[0.0, 1.0]], 0);
        let b = toy_bin(&["t", "a", "y"], &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.1]], 1);
        let s = second_order_vectors("t", &a, &b, 1).unwrap();
        assert_eq!(s.support, ["a", "y"]);
        assert_eq!(s.missing_in_a, ["y"]);
        assert_eq!(s.a[1], 0.0);
        assert!(s.missing_in_b.is_empty());
    }

    #[test]
    fn target_oov_is_an_error() {
        let a = model_a();
        let b = toy_bin(&["x", "a", "b"], &[&[1.0], &[1.0], &[1.0]], 1);
        assert!(matches!(local_change("t", &a, &b, 1), Err(Error::Oov { .. })));
    }

    #[test]
    fn zero_second_order_vector_is_degenerate() {
        let a = toy_bin(&["t", "a", "b"], &[&[1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]], 0);
        let b = toy_bin(&["t", "a", "b"], &[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]], 1);
        assert!(matches!(local_change("t", &a, &b, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn series_modes() {
        let models = vec![model_a(), model_b(), toy_bin(&WORDS, &[&[1.0, 0.0], &[1.0, 0.2], &[0.8, 0.6], &[0.0, 1.0], &[-1.0, 0.1]], 2)];
        let first = drift_series("t", &models, 2, DriftMode::VsFirst).unwrap();
        assert_eq!(first.points.len(), 3);
        assert_eq!(first.points[0].distance, 0.0);
        assert!(first.points[1].distance > 0.0);
        // bin 2 repeats bin 0
        assert!(first.points[2].distance < 1e-12);

        let prev = drift_series("t", &models, 2, DriftMode::VsPrevious).unwrap();
        assert_eq!(prev.points.iter().map(|p| p.bin.index).collect::<Vec<_>>(), [1, 2]);
        assert!((prev.points[0].distance - prev.points[1].distance).abs() < 1e-12);
    }

    #[test]
    fn identical_bins_give_zero_curves() {
        let models: Vec<_> = (0..3).map(|i| toy_bin(&WORDS, &[&[1.0, 0.0], &[1.0, 0.2], &[0.8, 0.6], &[0.0, 1.0], &[-1.0, 0.1]], i)).collect();
        for mode in [DriftMode::VsFirst, DriftMode::VsPrevious] {
            let s = drift_series("t", &models, 3, mode).unwrap();
            assert!(s.points.iter().all(|p| p.distance.abs() < 1e-12));
        }
    }

    #[test]
    fn series_skips_oov_bins_and_needs_two() {
        let other = toy_bin(&["x", "y", "z"], &[&[1.0], &[1.0], &[1.0]], 1);
        let models = vec![model_a(), other.clone(), model_b()];
        let s = drift_series("t", &models, 2, DriftMode::VsPrevious).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.warnings.len(), 1);
        assert!(matches!(
            drift_series("t", &[model_a(), other], 2, DriftMode::VsFirst),
            Err(Error::TooFewBins { usable: 1, .. })
        ));
    }

    #[test]
    fn diff_matches_set_difference() {
        let d = neighbor_diff("t", &model_a(), &model_b(), 2).unwrap();
        assert_eq!(d.introduced.iter().map(|n| n.word.as_str()).collect::<Vec<_>>(), ["c"]);
        assert_eq!(d.eliminated.iter().map(|n| n.word.as_str()).collect::<Vec<_>>(), ["a"]);
        assert_eq!(d.introduced.len(), d.eliminated.len());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("vs_first".parse::<DriftMode>().unwrap(), DriftMode::VsFirst);
        assert_eq!(DriftMode::VsPrevious.to_string(), "vs_previous");
        assert!("first".parse::<DriftMode>().is_err());
    }
}
