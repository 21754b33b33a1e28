use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// A word is missing from the vocabulary of a bin.
    #[error("word {word:?} is out of vocabulary{}", bin_suffix(*.bin))]
    Oov { word: String, bin: Option<u32> },

    #[error("id {id} is out of range for a vocabulary of {vocab_size} words")]
    IdOutOfRange { id: usize, vocab_size: usize },

    #[error("k = {k} is invalid for a vocabulary of {vocab_size} words (need 1 <= k < |V|)")]
    InvalidK { k: usize, vocab_size: usize },

    #[error("vocabulary is empty")]
    EmptyVocab,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("stream {stream:?} has no usable axis{}", bin_suffix(*.bin))]
    NoUsableAxis { stream: String, bin: Option<u32> },

    #[error("stream {stream:?} has {usable} usable axes, at least 2 are required")]
    TooFewAxes { stream: String, usable: usize },

    #[error("word {word:?} is usable in {usable} bins, at least {required} required")]
    TooFewBins {
        word: String,
        usable: usize,
        required: usize,
    },

    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        found: [u8; 4],
        expected: [u8; 4],
    },

    #[error("{path}: truncated, expected {expected} bytes but found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: checksum mismatch, stored {stored:08x} but computed {computed:08x}")]
    Checksum {
        path: PathBuf,
        stored: u32,
        computed: u32,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn bin_suffix(bin: Option<u32>) -> String {
    match bin {
        Some(b) => format!(" in bin {b}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
