//! Tokenization and per-bin vocabularies.
//!
//! Tokens are NFC-normalized and lowercased. Diacritics are kept, so
//! `"israël"` and `"israel"` stay distinct words.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Words rarer than this are removed from every bin vocabulary.
pub const DEFAULT_MIN_COUNT: u64 = 25;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || ('\u{0300}'..='\u{036F}').contains(&c)
}

fn keep_token(token: &str) -> bool {
    !token.is_empty() && !token.chars().all(|c| c.is_numeric())
}

/// Splits `text` into lowercase word tokens.
///
/// Whitespace and punctuation separate tokens, which also splits elided
/// articles (`"l'usurier"` gives `"l"`, `"usurier"`). Purely numeric tokens
/// are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for_each_token(text, |t| tokens.push(t.to_owned()));
    tokens
}

/// Streaming form of [`tokenize`]: calls `f` with each token in order
/// without allocating a vector of owned strings.
pub fn for_each_token(text: &str, mut f: impl FnMut(&str)) {
    let mut buf = String::new();
    for c in text.nfc() {
        if is_word_char(c) {
            buf.extend(c.to_lowercase());
        } else if !buf.is_empty() {
            if keep_token(&buf) {
                f(&buf);
            }
            buf.clear();
        }
    }
    if keep_token(&buf) {
        f(&buf);
    }
}

/// Query form of a word: NFC-normalized and lowercased, as tokens are.
pub fn normalize_word(word: &str) -> String {
    word.nfc().collect::<String>().to_lowercase()
}

/// Number of tokens [`tokenize`] would produce.
pub fn count_tokens(text: &str) -> u64 {
    let mut n = 0;
    for_each_token(text, |_| n += 1);
    n
}

/// Raw token frequencies. Counting is associative: shards can be counted
/// independently and merged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenCounts {
    counts: HashMap<String, u64>,
    total: u64,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        self.total += 1;
        match self.counts.get_mut(token) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(token.to_owned(), 1);
            }
        }
    }

    pub fn add_all<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for t in tokens {
            self.add(t.as_ref());
        }
    }

    pub fn merge(&mut self, other: TokenCounts) {
        self.total += other.total;
        for (word, n) in other.counts {
            *self.counts.entry(word).or_insert(0) += n;
        }
    }

    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Total number of tokens seen, including rare ones.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenCounts {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut counts = TokenCounts::new();
        counts.add_all(iter);
        counts
    }
}

/// Per-bin vocabulary. Ids are dense, assigned by descending count with
/// ties broken lexicographically, so the same corpus always yields the
/// same ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    /// Counts `tokens` and keeps the words occurring at least `min_count` times.
    pub fn build<I, S>(tokens: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::from_counts(&tokens.into_iter().collect(), min_count)
    }

    pub fn from_counts(counts: &TokenCounts, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut entries: Vec<(&str, u64)> = counts
            .counts
            .iter()
            .filter(|(_, &n)| n >= min_count)
            .map(|(w, &n)| (w.as_str(), n))
            .collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_sorted(
            entries.into_iter().map(|(w, n)| (w.to_owned(), n)),
            min_count,
        ))
    }

    fn from_sorted(entries: impl Iterator<Item = (String, u64)>, min_count: u64) -> Self {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut ids = HashMap::new();
        for (i, (w, n)) in entries.enumerate() {
            ids.insert(w.clone(), i as u32);
            words.push(w);
            counts.push(n);
        }
        Vocabulary {
            words,
            counts,
            ids,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Corpus frequency of `word`, 0 if it is not in the vocabulary.
    pub fn count_of(&self, word: &str) -> u64 {
        self.id(word).map_or(0, |id| self.count(id))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sum of the counts of all retained words.
    pub fn retained_tokens(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Writes the `word<TAB>count` sidecar, one line per entry in id order.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (w, n) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{w}\t{n}")?;
        }
        out.flush()
    }

    /// Reads a sidecar written by [`Vocabulary::write_sidecar`]. Entries must
    /// be in canonical id order.
    pub fn read_sidecar<R: BufRead>(input: R, min_count: u64) -> std::io::Result<Self> {
        use std::io::{Error as IoError, ErrorKind};
        let bad = |line: usize, msg: &str| {
            IoError::new(ErrorKind::InvalidData, format!("vocabulary line {line}: {msg}"))
        };
        let mut entries: Vec<(String, u64)> = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let (word, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| bad(i + 1, "missing tab separator"))?;
            let count: u64 = count
                .parse()
                .map_err(|_| bad(i + 1, "count is not an unsigned integer"))?;
            if word.is_empty() {
                return Err(bad(i + 1, "empty word"));
            }
            if count < min_count {
                return Err(bad(i + 1, "count below min_count"));
            }
            if let Some((pw, pc)) = entries.last() {
                if count > *pc || (count == *pc && word <= pw.as_str()) {
                    return Err(bad(i + 1, "entries are not in id order"));
                }
            }
            entries.push((word.to_owned(), count));
        }
        Ok(Self::from_sorted(entries.into_iter(), min_count))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Le Juif errant."), ["le", "juif", "errant"]);
        assert_eq!(tokenize("l'antisémitisme, 1886"), ["l", "antisémitisme"]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_elision_and_typographic_apostrophe() {
        assert_eq!(tokenize("l'usurier"), ["l", "usurier"]);
        assert_eq!(tokenize("d’Israël"), ["d", "israël"]);
    }

    #[test]
    fn tokenize_keeps_diacritics_and_normalizes_composition() {
        // "e" + combining diaeresis composes to "ë".
        assert_eq!(tokenize("Israe\u{0308}l"), ["israël"]);
        assert_ne!(tokenize("Israël"), tokenize("Israel"));
    }

    #[test]
    fn tokenize_drops_numbers_and_punctuation() {
        assert_eq!(tokenize("... 12 -- ; 1789!"), Vec::<String>::new());
        assert_eq!(tokenize("xiv3 ok"), ["xiv3", "ok"]);
        assert_eq!(count_tokens("a b, c 4"), 3);
    }

    #[test]
    fn build_vocab_min_count() {
        let v = Vocabulary::build("a a a b".split(' '), 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.count_of("a"), 3);
        assert_eq!(v.id("b"), None);
    }

    #[test]
    fn build_vocab_boundary() {
        let mut tokens = vec!["rare"; 24];
        tokens.extend(vec!["kept"; 25]);
        let v = Vocabulary::build(tokens, DEFAULT_MIN_COUNT).unwrap();
        assert_eq!(v.words(), ["kept"]);
        assert_eq!(DEFAULT_MIN_COUNT, 25);
    }

    #[test]
    fn ids_are_count_desc_then_lexicographic() {
        let v = Vocabulary::build("c b b a a d d d".split(' '), 1).unwrap();
        assert_eq!(v.words(), ["d", "a", "b", "c"]);
        for (i, w) in v.words().iter().enumerate() {
            assert_eq!(v.id(w), Some(i as u32));
            assert_eq!(v.word(i as u32), Some(w.as_str()));
        }
    }

    #[test]
    fn zero_min_count_is_rejected() {
        assert!(Vocabulary::build(["a"], 0).is_err());
    }

    #[test]
    fn merged_counts_equal_whole_counts() {
        let text = "a b c a b a d e f a";
        let whole: TokenCounts = text.split(' ').collect();
        let (left, right) = text.split_at(9);
        let mut merged: TokenCounts = left.split_whitespace().collect();
        merged.merge(right.split_whitespace().collect());
        assert_eq!(whole, merged);
        assert_eq!(merged.total(), 10);
    }

    #[test]
    fn sidecar_roundtrip_and_validation() {
        let v = Vocabulary::build("x y y z z z".split(' '), 1).unwrap();
        let mut buf = Vec::new();
        v.write_sidecar(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "z\t3\ny\t2\nx\t1\n");
        let back = Vocabulary::read_sidecar(&buf[..], 1).unwrap();
        assert_eq!(back, v);

        assert!(Vocabulary::read_sidecar(&b"x\t1\nz\t3\n"[..], 1).is_err());
        assert!(Vocabulary::read_sidecar(&b"x 1\n"[..], 1).is_err());
        assert!(Vocabulary::read_sidecar(&b"x\t1\n"[..], 2).is_err());
    }
}
