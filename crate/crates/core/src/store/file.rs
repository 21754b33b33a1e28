//! Binary model files.
//!
//! Little-endian layout: magic `DWE1`, `u32` dim, `u64` vocabulary size,
//! `u32` bin index, `i32` start year, `i32` end year, then `size x dim`
//! `f32` rows in id order, then the CRC-32 of every preceding byte. The
//! vocabulary lives next to it in a `.vocab` sidecar.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sgns::{BinMeta, EmbeddingModel};
use crate::text::Vocabulary;

pub const MAGIC: [u8; 4] = *b"DWE1";
const HEADER_LEN: usize = 4 + 4 + 8 + 4 + 4 + 4;
const CRC_LEN: usize = 4;

pub fn encode_matrix(matrix: &Matrix<f32>, bin: BinMeta) -> Vec<u8> {
    let payload = matrix.rows() * matrix.cols() * 4;
    let mut buf = Vec::with_capacity(HEADER_LEN + payload + CRC_LEN);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&(matrix.cols() as u32).to_le_bytes());
    buf.extend_from_slice(&(matrix.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&bin.index.to_le_bytes());
    buf.extend_from_slice(&bin.start_year.to_le_bytes());
    buf.extend_from_slice(&bin.end_year.to_le_bytes());
    for x in matrix.as_slice() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub fn decode_matrix(bytes: &[u8], path: &Path) -> Result<(Matrix<f32>, BinMeta)> {
    let found = bytes.len() as u64;
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&bytes[..4]);
        return Err(Error::BadMagic {
            path: path.to_owned(),
            found: magic,
            expected: MAGIC,
        });
    }
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(Error::Truncated {
            path: path.to_owned(),
            expected: (HEADER_LEN + CRC_LEN) as u64,
            found,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let i32_at = |o: usize| i32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let dim = u32_at(4) as u64;
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let bin = BinMeta {
        index: u32_at(16),
        start_year: i32_at(20),
        end_year: i32_at(24),
    };
    let expected = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add((HEADER_LEN + CRC_LEN) as u64))
        .ok_or_else(|| Error::format(path, format!("header declares an impossible size {rows} x {dim}")))?;
    if found < expected {
        return Err(Error::Truncated {
            path: path.to_owned(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::format(
            path,
            format!("{} trailing bytes after the checksum", found - expected),
        ));
    }
    let body = &bytes[..bytes.len() - CRC_LEN];
    let stored = u32::from_le_bytes(bytes[bytes.len() - CRC_LEN..].try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum {
            path: path.to_owned(),
            stored,
            computed,
        });
    }
    let data: Vec<f32> = body[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((Matrix::from_vec(rows as usize, dim as usize, data), bin))
}

/// Sidecar path of a model file: same stem, `.vocab` extension.
pub fn vocab_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("vocab")
}

/// Context-vector file written next to a model when the output matrix is kept.
pub fn context_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("ctx.dwe")
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn encode_vocab(vocab: &Vocabulary) -> Vec<u8> {
    let mut buf = Vec::new();
    vocab.write_sidecar(&mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub(crate) fn decode_vocab(bytes: &[u8], min_count: Option<u64>, path: &Path) -> Result<Vocabulary> {
    let floor = min_count.unwrap_or(1);
    let mut vocab = Vocabulary::read_sidecar(BufReader::new(bytes), floor)
        .map_err(|e| Error::format(path, e.to_string()))?;
    if min_count.is_none() {
        let inferred = vocab.counts().iter().copied().min().unwrap_or(1);
        vocab = Vocabulary::read_sidecar(BufReader::new(bytes), inferred)
            .map_err(|e| Error::format(path, e.to_string()))?;
    }
    Ok(vocab)
}

/// Writes `model` to `path` plus its vocabulary sidecar, and the context
/// vectors when `keep_context` is set and the model has them.
pub fn save(model: &EmbeddingModel, path: &Path, keep_context: bool) -> Result<()> {
    write_file(path, &encode_matrix(&model.input, model.bin))?;
    write_file(&vocab_path(path), &encode_vocab(&model.vocab))?;
    if keep_context {
        if let Some(out) = &model.output {
            write_file(&context_path(path), &encode_matrix(out, model.bin))?;
        }
    }
    Ok(())
}

/// Loads a model written by [`save`]. Without an archive index the
/// vocabulary's `min_count` is taken to be its smallest stored count.
pub fn load(path: &Path) -> Result<EmbeddingModel> {
    load_with_min_count(path, None)
}

pub(crate) fn load_with_min_count(path: &Path, min_count: Option<u64>) -> Result<EmbeddingModel> {
    let (input, bin) = decode_matrix(&read_file(path)?, path)?;
    let vpath = vocab_path(path);
    let vocab = decode_vocab(&read_file(&vpath)?, min_count, &vpath)?;
    if vocab.len() != input.rows() {
        return Err(Error::format(
            path,
            format!(
                "model has {} rows but its vocabulary has {} entries",
                input.rows(),
                vocab.len()
            ),
        ));
    }
    let cpath = context_path(path);
    let output = if cpath.exists() {
        let (out, _) = decode_matrix(&read_file(&cpath)?, &cpath)?;
        if out.rows() != input.rows() || out.cols() != input.cols() {
            return Err(Error::format(&cpath, "context matrix shape differs from the model"));
        }
        Some(out)
    } else {
        None
    };
    Ok(EmbeddingModel {
        vocab,
        input,
        output,
        bin,
    })
}
