//! 15-bit word packing of instruction statements.
//!
//! Each word is a 5-bit opcode code followed by a 10-bit operand index. The
//! top three codes are reserved so that statement boundaries and labels
//! survive the round trip:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0–28 | opcode; the index is the first operand or [`NO_OPERAND`] |
//! | 29   | opcode not in the code space; index names the mnemonic |
//! | 30   | label of the statement that follows                  |
//! | 31   | further operand of the current statement             |

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::CodecError;
use crate::corpus::AgcStatement;

pub const WORD_BITS: usize = 15;
pub const OPCODE_BITS: usize = 5;
pub const OPERAND_BITS: usize = 10;

/// Operand index of a statement without operands.
pub const NO_OPERAND: u16 = (1 << OPERAND_BITS) - 1;
pub const MAX_OPERANDS: usize = NO_OPERAND as usize;

pub const ESCAPED_OPCODE: u8 = 29;
pub const LABEL_CODE: u8 = 30;
pub const CONTINUATION_CODE: u8 = 31;
/// Opcodes that get a direct code.
pub const DIRECT_OPCODES: usize = ESCAPED_OPCODE as usize;

/// Packed bits, most significant bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    bit_length: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps packed bytes. Fails if `bit_length` exceeds the buffer or any
    /// bit past `bit_length` is set.
    pub fn from_parts(bytes: Vec<u8>, bit_length: usize) -> Result<Self, CodecError> {
        if bit_length > bytes.len() * 8 || bytes.len() > bit_length.div_ceil(8) {
            return Err(CodecError::TruncatedStream { bit_length });
        }
        let pad = bytes.len() * 8 - bit_length;
        if pad > 0 && bytes.last().is_some_and(|b| b & ((1u8 << pad) - 1) != 0) {
            return Err(CodecError::TruncatedStream { bit_length });
        }
        Ok(BitStream { bytes, bit_length })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_length(&self) -> usize {
        self.bit_length
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn push(&mut self, value: u32, width: usize) {
        debug_assert!(width <= 32 && (width == 32 || value >> width == 0));
        for i in (0..width).rev() {
            if self.bit_length % 8 == 0 {
                self.bytes.push(0);
            }
            if (value >> i) & 1 != 0 {
                let last = self.bytes.last_mut().expect("pushed above");
                *last |= 0x80 >> (self.bit_length % 8);
            }
            self.bit_length += 1;
        }
    }

    pub fn read(&self, at: usize, width: usize) -> u32 {
        (at..at + width).fold(0, |acc, i| {
            let bit = (self.bytes[i / 8] >> (7 - i % 8)) & 1;
            (acc << 1) | u32::from(bit)
        })
    }
}

/// Packs a sequence of 15-bit words.
pub fn pack_words(words: &[u16]) -> BitStream {
    let mut bits = BitStream::new();
    for &w in words {
        bits.push(u32::from(w), WORD_BITS);
    }
    bits
}

pub fn unpack_words(bits: &BitStream) -> Result<Vec<u16>, CodecError> {
    if bits.bit_length % WORD_BITS != 0 {
        return Err(CodecError::TruncatedStream {
            bit_length: bits.bit_length,
        });
    }
    Ok((0..bits.bit_length / WORD_BITS)
        .map(|i| bits.read(i * WORD_BITS, WORD_BITS) as u16)
        .collect())
}

fn word(code: u8, index: u16) -> u16 {
    (u16::from(code) << OPERAND_BITS) | index
}

fn split_word(w: u16) -> (u8, u16) {
    ((w >> OPERAND_BITS) as u8, w & NO_OPERAND)
}

/// Opcode codes and the shared operand table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodebookJson", into = "CodebookJson")]
pub struct Codebook {
    opcodes: Vec<String>,
    operands: Vec<String>,
    opcode_index: HashMap<String, u8>,
    operand_index: HashMap<String, u16>,
}

#[derive(Serialize, Deserialize)]
struct CodebookJson {
    opcode_codes: std::collections::BTreeMap<String, u8>,
    operand_table: Vec<String>,
}

impl TryFrom<CodebookJson> for Codebook {
    type Error = CodecError;

    fn try_from(j: CodebookJson) -> Result<Self, CodecError> {
        let mut opcodes = vec![None; j.opcode_codes.len()];
        for (name, code) in j.opcode_codes {
            match opcodes.get_mut(usize::from(code)) {
                Some(slot @ None) => *slot = Some(name),
                _ => return Err(CodecError::InvalidCodebook(format!("code {code} not dense"))),
            }
        }
        let opcodes: Vec<String> = opcodes.into_iter().map(Option::unwrap).collect();
        Codebook::from_tables(opcodes, j.operand_table)
    }
}

impl From<Codebook> for CodebookJson {
    fn from(b: Codebook) -> Self {
        CodebookJson {
            opcode_codes: b.opcode_index.into_iter().collect(),
            operand_table: b.operands,
        }
    }
}

impl Codebook {
    pub fn from_tables(opcodes: Vec<String>, operands: Vec<String>) -> Result<Self, CodecError> {
        if opcodes.len() > DIRECT_OPCODES {
            return Err(CodecError::InvalidCodebook(format!(
                "{} opcodes exceed {DIRECT_OPCODES} direct codes",
                opcodes.len()
            )));
        }
        if operands.len() > MAX_OPERANDS {
            return Err(CodecError::CodebookOverflow {
                distinct: operands.len(),
            });
        }
        let mut opcode_index = HashMap::new();
        for (i, op) in opcodes.iter().enumerate() {
            if opcode_index.insert(op.clone(), i as u8).is_some() {
                return Err(CodecError::InvalidCodebook(format!("duplicate opcode {op}")));
            }
        }
        let mut operand_index = HashMap::new();
        for (i, op) in operands.iter().enumerate() {
            if operand_index.insert(op.clone(), i as u16).is_some() {
                return Err(CodecError::InvalidCodebook(format!("duplicate operand {op}")));
            }
        }
        Ok(Codebook {
            opcodes,
            operands,
            opcode_index,
            operand_index,
        })
    }

    /// Builds a codebook covering every instruction in `statements`.
    ///
    /// The [`DIRECT_OPCODES`] most frequent opcodes (ties by name) get codes;
    /// the rest, with labels and operands, share the operand table in order
    /// of first appearance.
    pub fn build(statements: &[AgcStatement]) -> Result<Self, CodecError> {
        let instructions = statements.iter().filter(|s| s.is_instruction());
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for st in instructions.clone() {
            *counts.entry(st.opcode.as_str()).or_default() += 1;
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let direct: Vec<String> = ranked
            .iter()
            .take(DIRECT_OPCODES)
            .map(|(op, _)| op.to_string())
            .collect();

        let mut operands: Vec<String> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut add = |s: &str| {
            if seen.insert(s.to_string()) {
                operands.push(s.to_string());
            }
        };
        for st in instructions {
            if let Some(label) = &st.label {
                add(label);
            }
            if !direct.contains(&st.opcode) {
                add(&st.opcode);
            }
            for op in &st.operands {
                add(op);
            }
        }
        Codebook::from_tables(direct, operands)
    }

    pub fn opcodes(&self) -> &[String] {
        &self.opcodes
    }

    pub fn operand_table(&self) -> &[String] {
        &self.operands
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("codebook serializes")
    }

    fn operand(&self, symbol: &str) -> Result<u16, CodecError> {
        self.operand_index
            .get(symbol)
            .copied()
            .ok_or_else(|| CodecError::CodebookMiss(symbol.to_string()))
    }

    fn operand_at(&self, index: u16) -> Result<&str, CodecError> {
        self.operands
            .get(usize::from(index))
            .map(String::as_str)
            .ok_or_else(|| CodecError::CodebookMiss(format!("operand #{index}")))
    }
}

/// Encodes every instruction statement as 15-bit words. Comment, blank and
/// opaque statements carry no instruction content and emit nothing.
pub fn encode_binary(
    statements: &[AgcStatement],
    book: &Codebook,
) -> Result<BitStream, CodecError> {
    let mut words = Vec::new();
    for st in statements.iter().filter(|s| s.is_instruction()) {
        if let Some(label) = &st.label {
            words.push(word(LABEL_CODE, book.operand(label)?));
        }
        let mut rest = st.operands.iter();
        match book.opcode_index.get(&st.opcode) {
            Some(&code) => {
                let first = match rest.next() {
                    Some(op) => book.operand(op)?,
                    None => NO_OPERAND,
                };
                words.push(word(code, first));
            }
            None => words.push(word(ESCAPED_OPCODE, book.operand(&st.opcode)?)),
        }
        for op in rest {
            words.push(word(CONTINUATION_CODE, book.operand(op)?));
        }
    }
    Ok(pack_words(&words))
}

/// Inverse of [`encode_binary`]. Statements come back in canonical layout
/// (see [`AgcStatement::instruction`]) numbered from 1.
pub fn decode_binary(bits: &BitStream, book: &Codebook) -> Result<Vec<AgcStatement>, CodecError> {
    let words = unpack_words(bits)?;
    let mut out: Vec<(Option<&str>, &str, Vec<&str>)> = Vec::new();
    let mut pending_label: Option<&str> = None;
    for (i, &w) in words.iter().enumerate() {
        let (code, index) = split_word(w);
        match code {
            LABEL_CODE => {
                if pending_label.is_some() {
                    return Err(CodecError::UnexpectedWord { index: i });
                }
                pending_label = Some(book.operand_at(index)?);
            }
            CONTINUATION_CODE => {
                if pending_label.is_some() {
                    return Err(CodecError::UnexpectedWord { index: i });
                }
                let current = out.last_mut().ok_or(CodecError::UnexpectedWord { index: i })?;
                current.2.push(book.operand_at(index)?);
            }
            ESCAPED_OPCODE => {
                out.push((pending_label.take(), book.operand_at(index)?, Vec::new()));
            }
            code => {
                let opcode = book
                    .opcodes
                    .get(usize::from(code))
                    .ok_or_else(|| CodecError::CodebookMiss(format!("opcode code {code}")))?;
                let operands = if index == NO_OPERAND {
                    Vec::new()
                } else {
                    vec![book.operand_at(index)?]
                };
                out.push((pending_label.take(), opcode, operands));
            }
        }
    }
    if pending_label.is_some() {
        return Err(CodecError::UnexpectedWord {
            index: words.len() - 1,
        });
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(i, (label, op, operands))| AgcStatement::instruction(i + 1, label, op, &operands))
        .collect())
}
