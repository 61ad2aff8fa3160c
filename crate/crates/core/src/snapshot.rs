//! Versioned on-disk snapshots of built indexes.
//!
//! A snapshot is a single JSON document whose first two fields identify the
//! payload: `{"format": "<kind>", "version": N, "index": {...}}`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T> {
    format: &'a str,
    version: u32,
    index: &'a T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Body<T> {
    index: T,
}

pub fn write<T: Serialize>(path: &Path, format: &str, index: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(BufWriter::new(file), &Envelope { format, version: VERSION, index })
        .map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))
}

/// Read the format tag of a snapshot without decoding the payload.
pub fn peek_format(path: &Path) -> Result<String> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&raw).map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))?;
    Ok(header.format)
}

pub fn read<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&raw).map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))?;
    if header.format != format {
        return Err(Error::Snapshot(format!(
            "{}: expected a `{format}` snapshot, found `{}`",
            path.display(),
            header.format
        )));
    }
    if header.version != VERSION {
        return Err(Error::Snapshot(format!(
            "{}: unsupported snapshot version {} (this build reads {VERSION})",
            path.display(),
            header.version
        )));
    }
    let body: Body<T> = serde_json::from_str(&raw).map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))?;
    Ok(body.index)
}
