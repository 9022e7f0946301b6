use super::matrix::{
    decode_format_fields, format_bit_positions, format_word, mask_applies, version_bit_positions,
    version_word, FunctionLayout, QrMatrix,
};
use super::rs::{self, Correction};
use super::tables::{
    count_bits, data_codewords, ecc_blocks, ecc_codewords_per_block, misdecode_protection,
    total_codewords,
};
use super::{EccLevel, QrError};

/// Mismatched modules tolerated per 7×7 finder before the grid is rejected.
const FINDER_TOLERANCE: usize = 4;
/// Hamming radius for snapping format and version words.
const BCH_RADIUS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSymbol {
    pub version: u8,
    pub ecc: EccLevel,
    pub mask: u8,
    pub payload: Vec<u8>,
    /// Codewords repaired by error correction, summed over blocks.
    pub corrected: usize,
}

pub fn decode_symbol(matrix: &QrMatrix) -> Result<Vec<u8>, QrError> {
    decode_symbol_detailed(matrix).map(|d| d.payload)
}

pub fn decode_symbol_detailed(matrix: &QrMatrix) -> Result<DecodedSymbol, QrError> {
    let version = matrix
        .version()
        .ok_or_else(|| QrError::NotAQrSymbol(format!("size {} is not 17 + 4·v", matrix.size())))?;
    check_finders(matrix)?;
    let (ecc, mask) = read_format(matrix)?;
    if version >= 7 {
        check_version_info(matrix, version)?;
    }

    let layout = FunctionLayout::new(version);
    let total = total_codewords(version);
    let mut codewords = vec![0u8; total];
    for (i, (x, y)) in layout.data_positions().into_iter().take(total * 8).enumerate() {
        if matrix.get(x, y) ^ mask_applies(mask, x, y) {
            codewords[i / 8] |= 0x80 >> (i % 8);
        }
    }

    let (data, corrected) = deinterleave_and_correct(&codewords, version, ecc)?;
    let payload = parse_segments(&data, version)?;
    Ok(DecodedSymbol {
        version,
        ecc,
        mask,
        payload,
        corrected,
    })
}

fn check_finders(matrix: &QrMatrix) -> Result<(), QrError> {
    let size = matrix.size();
    for (corner, (ox, oy)) in [(0, 0), (size - 7, 0), (0, size - 7)].into_iter().enumerate() {
        let mismatches = (0..7)
            .flat_map(|dy| (0..7).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| {
                let dist = (dx as isize - 3).abs().max((dy as isize - 3).abs());
                matrix.get(ox + dx, oy + dy) != (dist != 2)
            })
            .count();
        if mismatches > FINDER_TOLERANCE {
            return Err(QrError::NotAQrSymbol(format!(
                "finder pattern {corner} has {mismatches} wrong modules"
            )));
        }
    }
    Ok(())
}

fn read_word(matrix: &QrMatrix, bits: usize, copy: usize, pos: impl Fn(usize) -> [(usize, usize); 2]) -> u32 {
    (0..bits).fold(0, |acc, i| {
        let (x, y) = pos(i)[copy];
        acc | (u32::from(matrix.get(x, y)) << i)
    })
}

fn read_format(matrix: &QrMatrix) -> Result<(EccLevel, u8), QrError> {
    let size = matrix.size();
    let copies = [0, 1].map(|c| read_word(matrix, 15, c, |i| format_bit_positions(size, i)));
    let mut best: Option<(u32, EccLevel, u8)> = None;
    for ecc in EccLevel::ALL {
        for mask in 0..8 {
            let word = format_word(ecc, mask);
            let d = copies.iter().map(|c| (c ^ word).count_ones()).min().expect("two copies");
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, ecc, mask));
            }
        }
    }
    match best {
        Some((d, ecc, mask)) if d <= BCH_RADIUS => {
            debug_assert_eq!(decode_format_fields(format_word(ecc, mask)), (ecc, mask));
            Ok((ecc, mask))
        }
        _ => Err(QrError::NotAQrSymbol("unreadable format information".into())),
    }
}

fn check_version_info(matrix: &QrMatrix, version: u8) -> Result<(), QrError> {
    let size = matrix.size();
    let copies = [0, 1].map(|c| read_word(matrix, 18, c, |i| version_bit_positions(size, i)));
    let nearest = (7..=40u8)
        .map(|v| {
            let w = version_word(v);
            (copies.iter().map(|c| (c ^ w).count_ones()).min().expect("two copies"), v)
        })
        .min()
        .expect("non-empty range");
    match nearest {
        (d, v) if d <= BCH_RADIUS && v == version => Ok(()),
        (d, v) if d <= BCH_RADIUS => Err(QrError::NotAQrSymbol(format!(
            "version information says {v} but the grid is version {version}"
        ))),
        _ => Err(QrError::NotAQrSymbol("unreadable version information".into())),
    }
}

/// Undoes codeword interleaving, corrects each block, and returns the data
/// codewords in order with the number of repaired codewords.
fn deinterleave_and_correct(
    codewords: &[u8],
    version: u8,
    ecc: EccLevel,
) -> Result<(Vec<u8>, usize), QrError> {
    let blocks = ecc_blocks(version, ecc);
    let ecc_len = ecc_codewords_per_block(version, ecc);
    let data_len = data_codewords(version, ecc);
    let short_len = data_len / blocks;
    let short_blocks = blocks - data_len % blocks;
    let lens: Vec<usize> = (0..blocks)
        .map(|i| short_len + usize::from(i >= short_blocks))
        .collect();

    let mut split: Vec<Vec<u8>> = lens.iter().map(|&l| Vec::with_capacity(l + ecc_len)).collect();
    let mut it = codewords.iter().copied();
    for i in 0..=short_len {
        for (b, &len) in lens.iter().enumerate() {
            if i < len {
                split[b].push(it.next().expect("codeword count matches block plan"));
            }
        }
    }
    for _ in 0..ecc_len {
        for block in &mut split {
            block.push(it.next().expect("codeword count matches block plan"));
        }
    }

    let max_errors = (ecc_len - misdecode_protection(version, ecc)) / 2;
    let mut data = Vec::with_capacity(data_len);
    let mut corrected = 0;
    for (b, (mut block, &len)) in split.into_iter().zip(&lens).enumerate() {
        match rs::correct(&mut block, ecc_len, max_errors) {
            Some(Correction::Clean) => {}
            Some(Correction::Corrected(n)) => corrected += n,
            None => return Err(QrError::CorruptSymbol { block: b }),
        }
        data.extend_from_slice(&block[..len]);
    }
    Ok((data, corrected))
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    fn read(&mut self, width: usize) -> u32 {
        let mut v = 0;
        for _ in 0..width {
            let bit = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | u32::from(bit);
            self.pos += 1;
        }
        v
    }
}

fn parse_segments(data: &[u8], version: u8) -> Result<Vec<u8>, QrError> {
    let mut r = BitReader { bytes: data, pos: 0 };
    let mut out = Vec::new();
    while r.remaining() >= 4 {
        match r.read(4) {
            0 => break,
            0b0100 => {
                let width = count_bits(version);
                if r.remaining() < width {
                    return Err(QrError::MalformedSegment("truncated count field".into()));
                }
                let count = r.read(width) as usize;
                if r.remaining() < count * 8 {
                    return Err(QrError::MalformedSegment(format!(
                        "byte segment of {count} overruns the data"
                    )));
                }
                out.extend((0..count).map(|_| r.read(8) as u8));
            }
            mode => return Err(QrError::UnsupportedMode(mode as u8)),
        }
    }
    Ok(out)
}
