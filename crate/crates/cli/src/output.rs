use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use qfock::fock::cache::write_atomic;
use qfock::{CacheStats, Error};

use crate::config::RunConfig;

/// Version of the JSON envelope written by every command.
pub const ENVELOPE_FORMAT_VERSION: u32 = 1;

#[derive(Debug)]
pub struct Failure(pub Error);

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match &self.0 {
            Error::InvalidInput(_) | Error::TruncationInsufficient { .. } => 3,
            Error::ResourceLimit { .. } => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(Error::Io(e))
    }
}

/// Timing and cache behaviour: reported, but not part of the
/// deterministic payload.
#[derive(Debug, Default, Serialize)]
pub struct Diagnostics {
    pub elapsed_ms: f64,
    pub gram_cache: CacheStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_resumed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_computed: Option<usize>,
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub format_version: u32,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub warnings: Vec<String>,
    pub passed: bool,
    pub result: T,
    pub diagnostics: Diagnostics,
}

pub struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Timer(Instant::now())
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// Writes to `out` atomically, or to standard output.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn emit_json<T: Serialize>(
    envelope: &Envelope<'_, T>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(envelope)
        .map_err(|e| Failure(Error::Io(std::io::Error::other(e))))?;
    bytes.push(b'\n');
    emit(&bytes, out)
}
