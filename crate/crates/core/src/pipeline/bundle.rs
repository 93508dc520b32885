//! Single-file model bundle: magic, format version, length-prefixed
//! little-endian payload, and a CRC32 trailer.
//!
//! Layout:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SAEF"
//! 4       2     format version (u16 LE)
//! 6       8     payload length (u64 LE)
//! 14      n     payload (bincode, little-endian fixed-width ints)
//! 14+n    4     CRC32 of the payload (u32 LE)
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::PipelineModel;

const MAGIC: [u8; 4] = *b"SAEF";

/// Version written by this build; loading any other version fails.
pub const FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 8;

/// Serialize a model to the bundle byte format.
pub fn model_to_bytes(model: &PipelineModel) -> Result<Vec<u8>> {
    let payload = bincode::serialize(model).map_err(|e| Error::Bundle {
        detail: format!("serialize failed: {e}"),
    })?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    Ok(out)
}

/// Parse a bundle, verifying magic, version, length, and checksum before
/// decoding. A truncated or corrupt file never yields a partial model.
pub fn model_from_bytes(bytes: &[u8]) -> Result<PipelineModel> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(Error::Bundle {
            detail: format!("file too short ({} bytes)", bytes.len()),
        });
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Bundle {
            detail: "bad magic bytes".into(),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let payload_len = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes")) as usize;
    let expected_total = HEADER_LEN + payload_len + 4;
    if bytes.len() != expected_total {
        return Err(Error::Bundle {
            detail: format!("expected {expected_total} bytes, found {}", bytes.len()),
        });
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + payload_len];
    let stored_crc = u32::from_le_bytes(
        bytes[HEADER_LEN + payload_len..]
            .try_into()
            .expect("4 bytes"),
    );
    let actual_crc = crc32fast::hash(payload);
    if stored_crc != actual_crc {
        return Err(Error::Bundle {
            detail: format!("checksum mismatch: stored {stored_crc:08x}, computed {actual_crc:08x}"),
        });
    }
    bincode::deserialize(payload).map_err(|e| Error::Bundle {
        detail: format!("payload decode failed: {e}"),
    })
}

/// Write a model bundle to disk.
pub fn save_model(model: &PipelineModel, path: &Path) -> Result<()> {
    let bytes = model_to_bytes(model)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a model bundle from disk.
pub fn load_model(path: &Path) -> Result<PipelineModel> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_bytes(&bytes)
}
