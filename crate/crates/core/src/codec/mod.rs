//! Compression strategies: mnemonic tokenization, 15-bit binary packing and
//! the hybrid of verbatim sections with tokenized connective code, all
//! finished with raw deflate.

mod binary;
mod deflate;
mod strategy;
mod token;

pub use binary::{
    decode_binary, encode_binary, pack_words, unpack_words, BitStream, Codebook,
    CONTINUATION_CODE, DIRECT_OPCODES, ESCAPED_OPCODE, LABEL_CODE, MAX_OPERANDS, NO_OPERAND,
    OPCODE_BITS, OPERAND_BITS, WORD_BITS,
};
pub use deflate::{compress, decompress, inflate_raw, CompressedBlob};
pub use strategy::{
    binary_source_statements, selection_codebook, compare_strategies, compression_ratio, decode_binary_container,
    run_strategy, section_blocks, PublishedRow, Ratio, Strategy, StrategyOutput, StrategyResult,
    PUBLISHED_ROWS,
};
pub use token::{
    detokenize, is_word_separator, token_alphabet, tokenize, TokenDictionary, DEFAULT_ESCAPE,
    DEFAULT_MNEMONICS, CLASSIC_TOKENS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("invalid token dictionary: {0}")]
    InvalidDictionary(String),
    #[error("dangling escape character at byte {offset}")]
    MalformedTokenStream { offset: usize },
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
    #[error("symbol not in codebook: {0}")]
    CodebookMiss(String),
    #[error("{distinct} distinct operands exceed the 10-bit operand table")]
    CodebookOverflow { distinct: usize },
    #[error("bit stream of {bit_length} bits is not a whole number of words")]
    TruncatedStream { bit_length: usize },
    #[error("word {index} is out of place")]
    UnexpectedWord { index: usize },
    #[error("inflate failed at byte {offset}: {reason}")]
    InflateError { offset: usize, reason: String },
    #[error("selection has no sections")]
    EmptySelection,
    #[error("decoded text is not UTF-8")]
    NotUtf8,
}
