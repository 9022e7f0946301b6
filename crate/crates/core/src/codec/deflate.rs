//! Raw RFC 1951 streams, no zlib or gzip framing.

use miniz_oxide::inflate::stream::{inflate, InflateState};
use miniz_oxide::{DataFormat, MZError, MZFlush, MZStatus};

use super::CodecError;

/// Highest miniz compression level.
const LEVEL: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlob {
    pub data: Vec<u8>,
    pub original_size: usize,
}

pub fn compress(data: &[u8]) -> CompressedBlob {
    CompressedBlob {
        data: miniz_oxide::deflate::compress_to_vec(data, LEVEL),
        original_size: data.len(),
    }
}

/// Inflates a raw deflate stream. The stream must end exactly at the end of
/// the input.
pub fn inflate_raw(data: &[u8]) -> Result<Vec<u8>, CodecError> {
    let mut state = InflateState::new_boxed(DataFormat::Raw);
    let mut out = Vec::new();
    let mut chunk = vec![0u8; 32 * 1024];
    let mut consumed = 0usize;
    loop {
        let res = inflate(&mut state, &data[consumed..], &mut chunk, MZFlush::None);
        consumed += res.bytes_consumed;
        out.extend_from_slice(&chunk[..res.bytes_written]);
        match res.status {
            Ok(MZStatus::StreamEnd) => break,
            Ok(_) if res.bytes_consumed > 0 || res.bytes_written > 0 => {}
            Ok(_) | Err(MZError::Buf) => {
                return Err(CodecError::InflateError {
                    offset: consumed,
                    reason: "stream truncated".into(),
                })
            }
            Err(e) => {
                return Err(CodecError::InflateError {
                    offset: consumed,
                    reason: format!("{e:?}"),
                })
            }
        }
    }
    if consumed != data.len() {
        return Err(CodecError::InflateError {
            offset: consumed,
            reason: "trailing bytes after final block".into(),
        });
    }
    Ok(out)
}

pub fn decompress(blob: &CompressedBlob) -> Result<Vec<u8>, CodecError> {
    let out = inflate_raw(&blob.data)?;
    if out.len() != blob.original_size {
        return Err(CodecError::InflateError {
            offset: blob.data.len(),
            reason: format!(
                "inflated to {} bytes, expected {}",
                out.len(),
                blob.original_size
            ),
        });
    }
    Ok(out)
}
