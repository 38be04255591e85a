//! Versioned binary container for level Gram matrices and operator blocks.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `QFKC`                            |
//! | 4     | `format_version` (u32)                  |
//! | 4     | payload kind (u32: 1 gram, 2 operator)  |
//! | 8     | `q` as IEEE-754 f64 bits                |
//! | 4     | `d` (u32)                               |
//! | 4     | `n`: level, or truncation degree (u32)  |
//! | 8     | payload length in bytes (u64)           |
//! | 32    | SHA-256 of the payload                  |
//!
//! A gram payload is the row-major f64 Gram matrix followed by the row-major
//! Cholesky factor. Writes go to a temporary file that is renamed into
//! place, so readers never observe a torn file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::level::LevelSpace;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"QFKC";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 68;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum PayloadKind {
    LevelGram = 1,
    OperatorBlocks = 2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainerHeader {
    pub format_version: u32,
    pub kind: PayloadKind,
    pub q: f64,
    pub d: u32,
    pub n: u32,
    pub payload_len: u64,
    pub checksum: [u8; 32],
}

fn cache_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Cache {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Serializes header and payload into one buffer.
pub fn encode_container(kind: PayloadKind, q: f64, d: usize, n: usize, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(kind as u32).to_le_bytes());
    out.extend_from_slice(&q.to_bits().to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(payload));
    out.extend_from_slice(payload);
    out
}

/// Parses and checksum-verifies a container; returns the header and payload.
pub fn decode_container<'a>(path: &Path, bytes: &'a [u8]) -> Result<(ContainerHeader, &'a [u8])> {
    if bytes.len() < HEADER_LEN {
        return Err(cache_err(path, "file shorter than header"));
    }
    if bytes[..4] != MAGIC {
        return Err(cache_err(path, "bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let format_version = u32_at(4);
    if format_version != FORMAT_VERSION {
        return Err(cache_err(
            path,
            format!("unsupported format version {format_version}"),
        ));
    }
    let kind = match u32_at(8) {
        1 => PayloadKind::LevelGram,
        2 => PayloadKind::OperatorBlocks,
        other => return Err(cache_err(path, format!("unknown payload kind {other}"))),
    };
    let header = ContainerHeader {
        format_version,
        kind,
        q: f64::from_bits(u64_at(12)),
        d: u32_at(20),
        n: u32_at(24),
        payload_len: u64_at(28),
        checksum: bytes[36..68].try_into().unwrap(),
    };
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != header.payload_len {
        return Err(cache_err(path, "payload length mismatch"));
    }
    if Sha256::digest(payload).as_slice() != header.checksum {
        return Err(cache_err(path, "checksum mismatch"));
    }
    Ok((header, payload))
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub(crate) fn push_f64s(out: &mut Vec<u8>, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
}

pub(crate) fn read_f64s(bytes: &[u8], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_iterator(
        rows,
        cols,
        bytes
            .chunks_exact(8)
            .take(rows * cols)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap())),
    )
}

/// Cache hit/miss statistics for one space construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Files that failed validation and were rebuilt.
    pub rebuilt: usize,
}

/// Directory of per-(q, d, n) level files, keyed by the exact bits of `q`.
#[derive(Clone, Debug)]
pub struct GramCache {
    dir: PathBuf,
}

impl GramCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, q: f64, d: usize, n: usize) -> PathBuf {
        self.dir
            .join(format!("gram_q{:016x}_d{d}_n{n}.bin", q.to_bits()))
    }

    pub fn store(&self, q: f64, level: &LevelSpace) -> Result<()> {
        let mut payload = Vec::with_capacity(16 * level.dim() * level.dim());
        push_f64s(&mut payload, level.gram());
        push_f64s(&mut payload, level.chol());
        let bytes = encode_container(
            PayloadKind::LevelGram,
            q,
            level.d(),
            level.level(),
            &payload,
        );
        write_atomic(&self.path_for(q, level.d(), level.level()), &bytes)
    }

    /// `Ok(None)` when no file exists; an error when one exists but is invalid.
    pub fn load(&self, q: f64, d: usize, n: usize) -> Result<Option<LevelSpace>> {
        let path = self.path_for(q, d, n);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (header, payload) = decode_container(&path, &bytes)?;
        if header.kind != PayloadKind::LevelGram
            || header.q.to_bits() != q.to_bits()
            || header.d as usize != d
            || header.n as usize != n
        {
            return Err(cache_err(
                &path,
                "header does not match the requested level",
            ));
        }
        let dim =
            super::word::level_dim(d, n).ok_or_else(|| cache_err(&path, "dimension overflow"))?;
        if payload.len() != 16 * dim * dim {
            return Err(cache_err(&path, "payload size does not match d^n"));
        }
        let gram = read_f64s(payload, dim, dim);
        let chol = read_f64s(&payload[8 * dim * dim..], dim, dim);
        LevelSpace::from_parts(n, d, gram, chol).map(Some)
    }
}
