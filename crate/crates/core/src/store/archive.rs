use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::file::{context_path, decode_matrix, encode_matrix, encode_vocab, read_file, vocab_path, write_file};
use crate::error::{Error, Result};
use crate::sgns::{BinMeta, EmbeddingModel};

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub index: u32,
    pub start_year: i32,
    pub end_year: i32,
    /// Tokens in the bin before the frequency cutoff.
    pub token_count: u64,
    pub min_count: u64,
    pub dim: usize,
    pub vocab_size: usize,
    /// Model file, relative to the archive directory.
    pub model: String,
    pub model_crc32: String,
    pub vocab_crc32: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_crc32: Option<String>,
}

impl ArchiveEntry {
    pub fn bin(&self) -> BinMeta {
        BinMeta {
            index: self.index,
            start_year: self.start_year,
            end_year: self.end_year,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Index {
    bins: Vec<ArchiveEntry>,
}

/// A directory of per-bin models and an `index.json` describing them.
#[derive(Debug, Clone)]
pub struct EmbeddingArchive {
    dir: PathBuf,
    index: Index,
}

fn crc_hex(bytes: &[u8]) -> String {
    format!("{:08x}", crc32fast::hash(bytes))
}

impl EmbeddingArchive {
    /// Starts an empty archive in `dir`, creating the directory if needed.
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(EmbeddingArchive {
            dir,
            index: Index::default(),
        })
    }

    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let path = dir.join(INDEX_FILE);
        let bytes = read_file(&path)?;
        let index: Index = serde_json::from_slice(&bytes).map_err(|e| Error::json(path.display().to_string(), e))?;
        let mut seen = std::collections::HashSet::new();
        for e in &index.bins {
            if !seen.insert(e.index) {
                return Err(Error::format(&path, format!("bin index {} appears twice", e.index)));
            }
        }
        Ok(EmbeddingArchive { dir, index })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Entries in chronological order.
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.index.bins
    }

    pub fn len(&self) -> usize {
        self.index.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.bins.is_empty()
    }

    pub fn entry(&self, bin_index: u32) -> Option<&ArchiveEntry> {
        self.index.bins.iter().find(|e| e.index == bin_index)
    }

    /// Writes the model files and records the entry. Call
    /// [`EmbeddingArchive::write_index`] once all bins are added.
    pub fn add(&mut self, model: &EmbeddingModel, token_count: u64, keep_context: bool) -> Result<&ArchiveEntry> {
        if self.entry(model.bin.index).is_some() {
            return Err(Error::Config(format!("bin {} is already archived", model.bin.index)));
        }
        let name = format!("bin_{:03}.dwe", model.bin.index);
        let path = self.dir.join(&name);
        let model_bytes = encode_matrix(&model.input, model.bin);
        let vocab_bytes = encode_vocab(&model.vocab);
        write_file(&path, &model_bytes)?;
        write_file(&vocab_path(&path), &vocab_bytes)?;
        let context_crc32 = match (&model.output, keep_context) {
            (Some(out), true) => {
                let bytes = encode_matrix(out, model.bin);
                write_file(&context_path(&path), &bytes)?;
                Some(crc_hex(&bytes))
            }
            _ => None,
        };
        self.index.bins.push(ArchiveEntry {
            index: model.bin.index,
            start_year: model.bin.start_year,
            end_year: model.bin.end_year,
            token_count,
            min_count: model.vocab.min_count(),
            dim: model.dim(),
            vocab_size: model.vocab.len(),
            model: name,
            model_crc32: crc_hex(&model_bytes),
            vocab_crc32: crc_hex(&vocab_bytes),
            context_crc32,
        });
        self.index.bins.sort_by_key(|e| e.index);
        Ok(self.entry(model.bin.index).unwrap())
    }

    pub fn write_index(&self) -> Result<()> {
        let path = self.dir.join(INDEX_FILE);
        let mut json = serde_json::to_vec_pretty(&self.index).map_err(|e| Error::json("archive index", e))?;
        json.push(b'\n');
        write_file(&path, &json)
    }

    /// Loads one bin, verifying the index checksums and the file checksum.
    pub fn load(&self, bin_index: u32) -> Result<EmbeddingModel> {
        let entry = self
            .entry(bin_index)
            .ok_or_else(|| Error::Config(format!("bin {bin_index} is not in the archive")))?;
        let path = self.dir.join(&entry.model);
        let model_bytes = read_file(&path)?;
        verify(&path, &model_bytes, &entry.model_crc32)?;
        let vpath = vocab_path(&path);
        let vocab_bytes = read_file(&vpath)?;
        verify(&vpath, &vocab_bytes, &entry.vocab_crc32)?;

        let (input, bin) = decode_matrix(&model_bytes, &path)?;
        if bin != entry.bin() {
            return Err(Error::format(&path, "bin header does not match the archive index"));
        }
        let vocab = super::file::decode_vocab(&vocab_bytes, Some(entry.min_count), &vpath)?;
        if vocab.len() != input.rows() {
            return Err(Error::format(&path, "vocabulary size does not match the matrix"));
        }
        let output = match &entry.context_crc32 {
            Some(crc) => {
                let cpath = context_path(&path);
                let bytes = read_file(&cpath)?;
                verify(&cpath, &bytes, crc)?;
                Some(decode_matrix(&bytes, &cpath)?.0)
            }
            None => None,
        };
        Ok(EmbeddingModel {
            vocab,
            input,
            output,
            bin,
        })
    }

    pub fn load_all(&self) -> Result<Vec<EmbeddingModel>> {
        self.index.bins.iter().map(|e| self.load(e.index)).collect()
    }
}

fn verify(path: &Path, bytes: &[u8], expected: &str) -> Result<()> {
    let computed = crc32fast::hash(bytes);
    let stored = u32::from_str_radix(expected, 16)
        .map_err(|_| Error::format(path, format!("invalid checksum {expected:?} in the archive index")))?;
    if stored != computed {
        return Err(Error::Checksum {
            path: path.to_owned(),
            stored,
            computed,
        });
    }
    Ok(())
}
