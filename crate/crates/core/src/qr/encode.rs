use super::matrix::{mask_applies, write_format, FunctionLayout, QrMatrix};
use super::rs;
use super::tables::{
    byte_capacity, count_bits, data_codewords, ecc_blocks, ecc_codewords_per_block,
    MAX_VERSION, MIN_VERSION,
};
use super::{select_version, EccLevel, QrError, QrSymbolSpec};

const BYTE_MODE: u32 = 0b0100;
const PAD: [u8; 2] = [0xec, 0x11];

struct BitBuffer {
    bytes: Vec<u8>,
    len: usize,
}

impl BitBuffer {
    fn with_capacity(bytes: usize) -> Self {
        BitBuffer {
            bytes: Vec::with_capacity(bytes),
            len: 0,
        }
    }

    fn push(&mut self, value: u32, width: usize) {
        for i in (0..width).rev() {
            if self.len % 8 == 0 {
                self.bytes.push(0);
            }
            if (value >> i) & 1 != 0 {
                *self.bytes.last_mut().expect("pushed above") |= 0x80 >> (self.len % 8);
            }
            self.len += 1;
        }
    }
}

fn check_version(version: u8) -> Result<(), QrError> {
    if (MIN_VERSION..=MAX_VERSION).contains(&version) {
        Ok(())
    } else {
        Err(QrError::InvalidVersion(version))
    }
}

/// Data codewords for one byte-mode segment: header, payload, terminator,
/// bit padding, then alternating pad bytes.
fn data_stream(payload: &[u8], version: u8, ecc: EccLevel) -> Result<Vec<u8>, QrError> {
    let capacity = byte_capacity(version, ecc);
    if payload.len() > capacity {
        return Err(QrError::CapacityExceeded {
            len: payload.len(),
            version,
            ecc,
            capacity,
        });
    }
    let n = data_codewords(version, ecc);
    let mut bits = BitBuffer::with_capacity(n);
    bits.push(BYTE_MODE, 4);
    bits.push(payload.len() as u32, count_bits(version));
    for &b in payload {
        bits.push(u32::from(b), 8);
    }
    let terminator = (n * 8 - bits.len).min(4);
    bits.push(0, terminator);
    let mut out = bits.bytes;
    out.extend(PAD.iter().cycle().take(n - out.len()));
    Ok(out)
}

/// Splits data into blocks, appends Reed-Solomon codewords, and interleaves.
pub fn encode_codewords(payload: &[u8], version: u8, ecc: EccLevel) -> Result<Vec<u8>, QrError> {
    check_version(version)?;
    let data = data_stream(payload, version, ecc)?;
    let blocks = ecc_blocks(version, ecc);
    let ecc_len = ecc_codewords_per_block(version, ecc);
    let short_len = data.len() / blocks;
    let short_blocks = blocks - data.len() % blocks;
    let gen = rs::generator(ecc_len);

    let mut data_blocks = Vec::with_capacity(blocks);
    let mut ecc_parts = Vec::with_capacity(blocks);
    let mut offset = 0;
    for i in 0..blocks {
        let len = short_len + usize::from(i >= short_blocks);
        let block = &data[offset..offset + len];
        offset += len;
        ecc_parts.push(rs::ecc_codewords(block, &gen));
        data_blocks.push(block);
    }

    let mut out = Vec::with_capacity(data.len() + blocks * ecc_len);
    for i in 0..=short_len {
        for block in &data_blocks {
            if let Some(&b) = block.get(i) {
                out.push(b);
            }
        }
    }
    for i in 0..ecc_len {
        for part in &ecc_parts {
            out.push(part[i]);
        }
    }
    Ok(out)
}

fn place(layout: &FunctionLayout, codewords: &[u8], mask: u8) -> QrMatrix {
    let mut m = layout.base.clone();
    for (i, (x, y)) in layout.data_positions().into_iter().enumerate() {
        // Remainder bits past the last codeword are light before masking.
        let bit = codewords
            .get(i / 8)
            .is_some_and(|&b| (b >> (7 - i % 8)) & 1 != 0);
        m.set(x, y, bit ^ mask_applies(mask, x, y));
    }
    m
}

/// Sum of the four standard penalties: runs, 2×2 blocks, finder-like
/// patterns, and dark/light imbalance.
pub fn penalty_score(m: &QrMatrix) -> u32 {
    let size = m.size();
    let mut score = 0u32;

    for horizontal in [true, false] {
        for a in 0..size {
            let at = |b: usize| if horizontal { m.get(b, a) } else { m.get(a, b) };
            let mut run = 1;
            for b in 1..size {
                if at(b) == at(b - 1) {
                    run += 1;
                } else {
                    if run >= 5 {
                        score += 3 + (run - 5);
                    }
                    run = 1;
                }
            }
            if run >= 5 {
                score += 3 + (run - 5);
            }

            // dark:light:dark:light:dark in 1:1:3:1:1 with four light
            // modules on at least one side; outside the symbol is light.
            let lit = |b: isize| b < 0 || b >= size as isize || !at(b as usize);
            for start in 0..=(size as isize - 7) {
                let core = [false, true, false, false, false, true, false];
                if core.iter().enumerate().any(|(k, &light)| lit(start + k as isize) != light) {
                    continue;
                }
                let before = (1..=4).all(|k| lit(start - k));
                let after = (7..11).all(|k| lit(start + k));
                if before || after {
                    score += 40;
                }
            }
        }
    }

    for y in 0..size - 1 {
        for x in 0..size - 1 {
            let c = m.get(x, y);
            if m.get(x + 1, y) == c && m.get(x, y + 1) == c && m.get(x + 1, y + 1) == c {
                score += 3;
            }
        }
    }

    let total = size * size;
    let dark = m.dark_count();
    let deviation = (20 * dark).abs_diff(10 * total) / total;
    score + 10 * deviation as u32
}

/// Lowest-penalty mask and its matrix; ties go to the lower index.
pub(crate) fn choose_mask(layout: &FunctionLayout, codewords: &[u8], ecc: EccLevel) -> (u8, QrMatrix) {
    let mut best: Option<(u32, u8, QrMatrix)> = None;
    for mask in 0..8u8 {
        let mut m = place(layout, codewords, mask);
        write_format(&mut m, ecc, mask);
        let p = penalty_score(&m);
        if best.as_ref().is_none_or(|(bp, _, _)| p < *bp) {
            best = Some((p, mask, m));
        }
    }
    let (_, mask, m) = best.expect("eight candidates");
    (mask, m)
}

pub fn encode_symbol(payload: &[u8], spec: &QrSymbolSpec) -> Result<QrMatrix, QrError> {
    encode_symbol_with_mask(payload, spec, None).map(|(m, _)| m)
}

/// Encodes with a forced mask, or the penalty-selected one for `None`.
/// Returns the matrix and the mask used.
pub fn encode_symbol_with_mask(
    payload: &[u8],
    spec: &QrSymbolSpec,
    mask: Option<u8>,
) -> Result<(QrMatrix, u8), QrError> {
    let codewords = encode_codewords(payload, spec.version, spec.ecc)?;
    let layout = FunctionLayout::new(spec.version);
    Ok(match mask {
        Some(mask) => {
            assert!(mask < 8, "mask index {mask} out of range");
            let mut m = place(&layout, &codewords, mask);
            write_format(&mut m, spec.ecc, mask);
            (m, mask)
        }
        None => {
            let (mask, m) = choose_mask(&layout, &codewords, spec.ecc);
            (m, mask)
        }
    })
}

/// Encodes at the smallest version that fits.
pub fn encode_symbol_auto(payload: &[u8], ecc: EccLevel) -> Result<(QrSymbolSpec, QrMatrix), QrError> {
    let spec = QrSymbolSpec::new(select_version(payload.len(), ecc)?, ecc);
    encode_symbol(payload, &spec).map(|m| (spec, m))
}
