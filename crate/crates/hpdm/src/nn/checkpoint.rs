//! Checkpoint file format.
//!
//! ```text
//! magic   4 bytes  "HPDM"
//! version u16 LE
//! meta    u32 LE byte length, then UTF-8 "key=value\n" lines
//! count   u64 LE  number of parameters
//! params  count little-endian f32 values, declaration order
//! ```
//!
//! Files are written to a temporary sibling and renamed into place so a
//! checkpoint is never observed half-written.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"HPDM";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u16),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("checkpoint does not match: {0}")]
    Incompatible(String),
}

/// Serialize metadata and flat f32 parameters. Metadata order is
/// preserved verbatim so save -> load -> save is byte-identical.
pub fn save_checkpoint(
    path: &Path,
    meta: &[(String, String)],
    params: &[f32],
) -> Result<(), CheckpointError> {
    for x in params {
        if !x.is_finite() {
            return Err(CheckpointError::Malformed(
                "refusing to write non-finite parameters".into(),
            ));
        }
    }
    let mut meta_bytes = Vec::new();
    for (k, v) in meta {
        if k.is_empty() || k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(CheckpointError::Malformed(format!(
                "invalid metadata entry `{k}`"
            )));
        }
        meta_bytes.extend_from_slice(k.as_bytes());
        meta_bytes.push(b'=');
        meta_bytes.extend_from_slice(v.as_bytes());
        meta_bytes.push(b'\n');
    }
    let mut buf =
        Vec::with_capacity(4 + 2 + 4 + meta_bytes.len() + 8 + 4 * params.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(meta_bytes.len() as u32).to_le_bytes());
    buf.extend_from_slice(&meta_bytes);
    buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for x in params {
        buf.extend_from_slice(&x.to_le_bytes());
    }

    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Read back metadata and parameters, validating the header and that the
/// declared parameter count matches the payload exactly.
pub fn load_checkpoint(path: &Path) -> Result<(Vec<(String, String)>, Vec<f32>), CheckpointError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let take = |bytes: &[u8], at: &mut usize, n: usize| -> Result<Vec<u8>, CheckpointError> {
        if *at + n > bytes.len() {
            return Err(CheckpointError::Malformed("file truncated".into()));
        }
        let out = bytes[*at..*at + n].to_vec();
        *at += n;
        Ok(out)
    };

    let mut at = 0;
    if take(&bytes, &mut at, 4)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u16::from_le_bytes(take(&bytes, &mut at, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let meta_len = u32::from_le_bytes(take(&bytes, &mut at, 4)?.try_into().unwrap()) as usize;
    let meta_bytes = take(&bytes, &mut at, meta_len)?;
    let meta_text = String::from_utf8(meta_bytes)
        .map_err(|_| CheckpointError::Malformed("metadata is not UTF-8".into()))?;
    let mut meta = Vec::new();
    for line in meta_text.lines() {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CheckpointError::Malformed(format!("metadata line `{line}`")))?;
        meta.push((k.to_string(), v.to_string()));
    }
    let count = u64::from_le_bytes(take(&bytes, &mut at, 8)?.try_into().unwrap()) as usize;
    if bytes.len() - at != 4 * count {
        return Err(CheckpointError::Malformed(format!(
            "declared {count} parameters but payload holds {} bytes",
            bytes.len() - at
        )));
    }
    let mut params = Vec::with_capacity(count);
    for chunk in bytes[at..].chunks_exact(4) {
        params.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok((meta, params))
}
