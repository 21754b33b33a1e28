//! Year-stamped documents, keyword/OCR filtering and token-balanced time bins.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{count_tokens, tokenize};

/// Documents below this OCR quality are discarded.
pub const DEFAULT_MIN_OCR: f64 = 0.98;

/// Token budget of one time bin.
pub const DEFAULT_TARGET_TOKENS: u64 = 450_000_000;

const DEFAULT_KEYWORDS: &str = include_str!("../data/keywords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    Book,
    Periodical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub year: i32,
    pub kind: DocKind,
    pub ocr_quality: f64,
    pub text: String,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        year: i32,
        kind: DocKind,
        ocr_quality: f64,
        text: impl Into<String>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&ocr_quality) {
            return Err(Error::Config(format!(
                "ocr_quality {ocr_quality} is outside [0, 1]"
            )));
        }
        Ok(Document {
            id: id.into(),
            year,
            kind,
            ocr_quality,
            text: text.into(),
        })
    }
}

/// Keywords selecting the documents of interest. Matching is on whole
/// tokens, case-insensitive, and diacritics-sensitive.
#[derive(Debug, Clone)]
pub struct KeywordSet {
    keywords: Vec<String>,
    single: HashSet<String>,
    phrases: Vec<Vec<String>>,
}

impl KeywordSet {
    pub fn new<I, S>(keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let keywords: Vec<String> = keywords
            .into_iter()
            .map(Into::into)
            .filter(|k: &String| !k.trim().is_empty())
            .collect();
        let mut single = HashSet::new();
        let mut phrases = Vec::new();
        for k in &keywords {
            let mut toks = tokenize(k);
            match toks.len() {
                0 => {
                    return Err(Error::Config(format!(
                        "keyword {k:?} contains no word characters"
                    )))
                }
                1 => {
                    single.insert(toks.pop().unwrap());
                }
                _ => phrases.push(toks),
            }
        }
        if keywords.is_empty() {
            return Err(Error::Config("keyword set is empty".into()));
        }
        Ok(KeywordSet {
            keywords,
            single,
            phrases,
        })
    }

    /// Parses one keyword per line; blank lines and `#` comments are skipped.
    pub fn from_lines(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    /// The eleven keywords used to select the nineteenth-century corpus.
    pub fn default_set() -> Self {
        Self::from_lines(DEFAULT_KEYWORDS).expect("shipped keyword list is valid")
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    pub fn matches(&self, text: &str) -> bool {
        let tokens = tokenize(text);
        if tokens.iter().any(|t| self.single.contains(t)) {
            return true;
        }
        self.phrases.iter().any(|p| {
            tokens
                .windows(p.len())
                .any(|w| w.iter().zip(p).all(|(a, b)| a == b))
        })
    }
}

/// Keeps the documents with `ocr_quality >= min_ocr` that contain at least
/// one keyword. Input order is preserved.
pub fn filter_documents(docs: Vec<Document>, keywords: &KeywordSet, min_ocr: f64) -> Result<Vec<Document>> {
    if !(0.0..=1.0).contains(&min_ocr) {
        return Err(Error::Config(format!("min_ocr {min_ocr} is outside [0, 1]")));
    }
    if keywords.is_empty() {
        return Err(Error::Config("keyword set is empty".into()));
    }
    Ok(docs
        .into_par_iter()
        .filter(|d| d.ocr_quality >= min_ocr && keywords.matches(&d.text))
        .collect())
}

/// Problems found while reading a JSON Lines document stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReadReport {
    pub lines: usize,
    pub malformed: usize,
    pub bad_year: usize,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct RawDocument {
    id: String,
    #[serde(default)]
    year: Option<serde_json::Value>,
    kind: DocKind,
    ocr_quality: f64,
    text: String,
}

/// Reads one document per line. Malformed lines and documents without a
/// usable year are skipped and reported; only I/O failures are errors.
pub fn read_documents<R: BufRead>(input: R) -> std::io::Result<(Vec<Document>, ReadReport)> {
    let mut docs = Vec::new();
    let mut report = ReadReport::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        let raw: RawDocument = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                report.malformed += 1;
                report.warnings.push(format!("line {}: malformed document: {e}", i + 1));
                continue;
            }
        };
        let year = raw
            .year
            .as_ref()
            .and_then(serde_json::Value::as_i64)
            .and_then(|y| i32::try_from(y).ok());
        let Some(year) = year else {
            report.bad_year += 1;
            report.warnings.push(format!(
                "line {}: document {:?} has a missing or unparseable year",
                i + 1,
                raw.id
            ));
            continue;
        };
        match Document::new(raw.id, year, raw.kind, raw.ocr_quality, raw.text) {
            Ok(d) => docs.push(d),
            Err(e) => {
                report.malformed += 1;
                report.warnings.push(format!("line {}: {e}", i + 1));
            }
        }
    }
    Ok((docs, report))
}

/// A contiguous, non-overlapping year range trained as one embedding model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBin {
    pub index: u32,
    pub start_year: i32,
    pub end_year: i32,
    pub token_count: u64,
    pub doc_ids: Vec<String>,
}

impl TimeBin {
    pub fn label(&self) -> String {
        if self.start_year == self.end_year {
            self.start_year.to_string()
        } else {
            format!("{}-{}", self.start_year, self.end_year)
        }
    }
}

/// Persisted form of a bin plan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinPlan {
    pub bins: Vec<TimeBin>,
}

/// Token count of one document, the input of [`plan_bins_counted`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTokens {
    pub id: String,
    pub year: i32,
    pub tokens: u64,
}

/// Tokenizes every document and plans bins with [`plan_bins_counted`].
pub fn plan_bins(docs: &[Document], target_tokens: u64) -> Result<Vec<TimeBin>> {
    let counted: Vec<DocTokens> = docs
        .par_iter()
        .map(|d| DocTokens {
            id: d.id.clone(),
            year: d.year,
            tokens: count_tokens(&d.text),
        })
        .collect();
    plan_bins_counted(&counted, target_tokens)
}

/// Greedy chronological binning: whole years are appended to the current
/// bin until its token count first reaches `target_tokens`. A year is never
/// split, and the last bin may fall short of the target.
pub fn plan_bins_counted(docs: &[DocTokens], target_tokens: u64) -> Result<Vec<TimeBin>> {
    if target_tokens == 0 {
        return Err(Error::Config("target_tokens must be positive".into()));
    }
    let mut years: BTreeMap<i32, (u64, Vec<&str>)> = BTreeMap::new();
    for d in docs {
        let entry = years.entry(d.year).or_default();
        entry.0 += d.tokens;
        entry.1.push(&d.id);
    }

    let mut bins = Vec::new();
    let mut current: Option<TimeBin> = None;
    for (year, (tokens, ids)) in years {
        let bin = current.get_or_insert_with(|| TimeBin {
            index: bins.len() as u32,
            start_year: year,
            end_year: year,
            token_count: 0,
            doc_ids: Vec::new(),
        });
        bin.end_year = year;
        bin.token_count += tokens;
        bin.doc_ids.extend(ids.into_iter().map(str::to_owned));
        if bin.token_count >= target_tokens {
            bins.push(current.take().unwrap());
        }
    }
    bins.extend(current);
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinReportRow {
    pub index: u32,
    pub start_year: i32,
    pub end_year: i32,
    pub token_count: u64,
    pub doc_count: usize,
}

pub fn bin_report(bins: &[TimeBin]) -> Vec<BinReportRow> {
    bins.iter()
        .map(|b| BinReportRow {
            index: b.index,
            start_year: b.start_year,
            end_year: b.end_year,
            token_count: b.token_count,
            doc_count: b.doc_ids.len(),
        })
        .collect()
}
