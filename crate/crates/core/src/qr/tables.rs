//! Symbol geometry and error-correction block plans for versions 1–40.

use super::EccLevel;

pub const MIN_VERSION: u8 = 1;
pub const MAX_VERSION: u8 = 40;

// Indexed by version; entry 0 unused.
#[rustfmt::skip]
const ECC_CODEWORDS_PER_BLOCK: [[u8; 41]; 4] = [
    // L
    [0, 7, 10, 15, 20, 26, 18, 20, 24, 30, 18, 20, 24, 26, 30, 22, 24, 28, 30, 28, 28, 28, 28, 30, 30, 26, 28, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
    // M
    [0, 10, 16, 26, 18, 24, 16, 18, 22, 22, 26, 30, 22, 22, 24, 24, 28, 28, 26, 26, 26, 26, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28, 28],
    // Q
    [0, 13, 22, 18, 26, 18, 24, 18, 22, 20, 24, 28, 26, 24, 20, 30, 24, 28, 28, 26, 30, 28, 30, 30, 30, 30, 28, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
    // H
    [0, 17, 28, 22, 16, 22, 28, 26, 26, 24, 28, 24, 28, 22, 24, 24, 30, 28, 28, 26, 28, 30, 24, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30, 30],
];

#[rustfmt::skip]
const ECC_BLOCKS: [[u8; 41]; 4] = [
    // L
    [0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 4, 4, 4, 4, 4, 6, 6, 6, 6, 7, 8, 8, 9, 9, 10, 12, 12, 12, 13, 14, 15, 16, 17, 18, 19, 19, 20, 21, 22, 24, 25],
    // M
    [0, 1, 1, 1, 2, 2, 4, 4, 4, 5, 5, 5, 8, 9, 9, 10, 10, 11, 13, 14, 16, 17, 17, 18, 20, 21, 23, 25, 26, 28, 29, 31, 33, 35, 37, 38, 40, 43, 45, 47, 49],
    // Q
    [0, 1, 1, 2, 2, 4, 4, 6, 6, 8, 8, 8, 10, 12, 16, 12, 17, 16, 18, 21, 20, 23, 23, 25, 27, 29, 34, 34, 35, 38, 40, 43, 45, 48, 51, 53, 56, 59, 62, 65, 68],
    // H
    [0, 1, 1, 2, 4, 4, 4, 5, 6, 8, 8, 11, 11, 16, 16, 18, 16, 19, 21, 25, 25, 25, 34, 30, 32, 35, 37, 40, 42, 45, 48, 51, 54, 57, 60, 63, 66, 70, 74, 77, 81],
];

pub fn symbol_size(version: u8) -> usize {
    17 + 4 * usize::from(version)
}

/// Modules left for codewords after all function patterns, including the
/// remainder bits.
pub fn raw_data_modules(version: u8) -> usize {
    let v = usize::from(version);
    let mut modules = (16 * v + 128) * v + 64;
    if v >= 2 {
        let align = v / 7 + 2;
        modules -= (25 * align - 10) * align - 55;
        if v >= 7 {
            modules -= 36;
        }
    }
    modules
}

pub fn total_codewords(version: u8) -> usize {
    raw_data_modules(version) / 8
}

pub fn ecc_codewords_per_block(version: u8, ecc: EccLevel) -> usize {
    usize::from(ECC_CODEWORDS_PER_BLOCK[ecc.table_row()][usize::from(version)])
}

pub fn ecc_blocks(version: u8, ecc: EccLevel) -> usize {
    usize::from(ECC_BLOCKS[ecc.table_row()][usize::from(version)])
}

pub fn data_codewords(version: u8, ecc: EccLevel) -> usize {
    total_codewords(version) - ecc_codewords_per_block(version, ecc) * ecc_blocks(version, ecc)
}

/// Width of the byte-mode character count field.
pub fn count_bits(version: u8) -> usize {
    if version <= 9 {
        8
    } else {
        16
    }
}

/// Largest byte-mode payload for a single segment.
pub fn byte_capacity(version: u8, ecc: EccLevel) -> usize {
    let bits = data_codewords(version, ecc) * 8 - 4 - count_bits(version);
    (bits / 8).min((1 << count_bits(version)) - 1)
}

/// Centre coordinates of alignment patterns along one axis.
pub fn alignment_positions(version: u8) -> Vec<usize> {
    if version == 1 {
        return Vec::new();
    }
    let v = usize::from(version);
    let count = v / 7 + 2;
    let step = if v == 32 {
        26
    } else {
        (v * 4 + count * 2 + 1) / (count * 2 - 2) * 2
    };
    let size = symbol_size(version);
    let mut positions: Vec<usize> = (0..count - 1).map(|i| size - 7 - i * step).collect();
    positions.push(6);
    positions.reverse();
    positions
}

/// Codewords held back from correction to guard against misdecodes in the
/// smallest symbols.
pub fn misdecode_protection(version: u8, ecc: EccLevel) -> usize {
    match (version, ecc) {
        (1, EccLevel::L) => 3,
        (1, EccLevel::M) | (2, EccLevel::L) => 2,
        (1, _) | (3, EccLevel::L) => 1,
        _ => 0,
    }
}
