//! QR Code symbols in byte mode: capacity and version selection, encoding
//! with Reed-Solomon error correction and mask selection, structural
//! decoding, and rendering to SVG or PGM.

mod decode;
mod encode;
mod matrix;
mod render;
pub mod rs;
mod tables;

pub use decode::{decode_symbol, decode_symbol_detailed, DecodedSymbol};
pub use encode::{
    encode_codewords, encode_symbol, encode_symbol_auto, encode_symbol_with_mask, penalty_score,
};
pub use matrix::{format_word, version_word, QrMatrix};
pub use render::{parse_pgm, render, sample_pgm, GreyImage, RenderFormat};
pub use tables::{
    byte_capacity, data_codewords, ecc_blocks, ecc_codewords_per_block, symbol_size,
    total_codewords, MAX_VERSION, MIN_VERSION,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EccLevel {
    L,
    M,
    Q,
    H,
}

impl EccLevel {
    pub const ALL: [EccLevel; 4] = [EccLevel::L, EccLevel::M, EccLevel::Q, EccLevel::H];

    fn table_row(self) -> usize {
        self as usize
    }

    /// Approximate share of codewords that can be restored.
    pub fn recovery_percent(self) -> u8 {
        match self {
            EccLevel::L => 7,
            EccLevel::M => 15,
            EccLevel::Q => 25,
            EccLevel::H => 30,
        }
    }
}

impl fmt::Display for EccLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EccLevel::L => "L",
            EccLevel::M => "M",
            EccLevel::Q => "Q",
            EccLevel::H => "H",
        };
        f.write_str(s)
    }
}

impl FromStr for EccLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "L" | "l" => Ok(EccLevel::L),
            "M" | "m" => Ok(EccLevel::M),
            "Q" | "q" => Ok(EccLevel::Q),
            "H" | "h" => Ok(EccLevel::H),
            _ => Err(format!("unknown error-correction level `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QrSymbolSpec {
    pub version: u8,
    pub ecc: EccLevel,
    pub module_px: usize,
    pub quiet_zone: usize,
}

pub const DEFAULT_MODULE_PX: usize = 4;
pub const DEFAULT_QUIET_ZONE: usize = 4;

impl QrSymbolSpec {
    pub fn new(version: u8, ecc: EccLevel) -> Self {
        QrSymbolSpec {
            version,
            ecc,
            module_px: DEFAULT_MODULE_PX,
            quiet_zone: DEFAULT_QUIET_ZONE,
        }
    }

    /// Quiet zones narrower than four modules are outside the standard.
    pub fn is_conformant(&self) -> bool {
        self.quiet_zone >= 4
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QrError {
    #[error("{len} bytes exceed capacity {capacity} of version {version}-{ecc}")]
    CapacityExceeded {
        len: usize,
        version: u8,
        ecc: EccLevel,
        capacity: usize,
    },
    #[error("version {0} outside 1..=40")]
    InvalidVersion(u8),
    #[error("not a QR symbol: {0}")]
    NotAQrSymbol(String),
    #[error("error correction failed in block {block}")]
    CorruptSymbol { block: usize },
    #[error("unsupported segment mode {0:#06b}")]
    UnsupportedMode(u8),
    #[error("malformed segment: {0}")]
    MalformedSegment(String),
    #[error("malformed image: {0}")]
    BadImage(String),
}

/// Smallest version whose byte capacity at `ecc` holds `payload_bytes`.
pub fn select_version(payload_bytes: usize, ecc: EccLevel) -> Result<u8, QrError> {
    (MIN_VERSION..=MAX_VERSION)
        .find(|&v| byte_capacity(v, ecc) >= payload_bytes)
        .ok_or(QrError::CapacityExceeded {
            len: payload_bytes,
            version: MAX_VERSION,
            ecc,
            capacity: byte_capacity(MAX_VERSION, ecc),
        })
}

/// Byte capacity for every (version, level) pair, versions ascending.
pub fn capacity_table() -> Vec<(u8, EccLevel, usize)> {
    (MIN_VERSION..=MAX_VERSION)
        .flat_map(|v| EccLevel::ALL.map(|e| (v, e, byte_capacity(v, e))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_selection_edges() {
        assert_eq!(select_version(0, EccLevel::L), Ok(1));
        assert_eq!(select_version(17, EccLevel::L), Ok(1));
        assert_eq!(select_version(18, EccLevel::L), Ok(2));
        assert_eq!(select_version(2953, EccLevel::L), Ok(40));
        assert!(matches!(
            select_version(2954, EccLevel::L),
            Err(QrError::CapacityExceeded { capacity: 2953, .. })
        ));
    }

    #[test]
    fn ecc_parse() {
        for e in EccLevel::ALL {
            assert_eq!(e.to_string().parse::<EccLevel>().unwrap(), e);
        }
        assert!("X".parse::<EccLevel>().is_err());
    }

    #[test]
    fn spec_defaults() {
        let s = QrSymbolSpec::new(25, EccLevel::L);
        assert_eq!((s.module_px, s.quiet_zone), (4, 4));
        assert!(s.is_conformant());
    }
}
