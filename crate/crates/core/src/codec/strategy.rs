use std::fmt;
use std::str::FromStr;

use super::{
    compress, decode_binary, encode_binary, inflate_raw, tokenize, BitStream, CodecError,
    Codebook, CompressedBlob, TokenDictionary, WORD_BITS,
};
use crate::corpus::{parse_agc_source, AgcStatement, SectionSpec, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    FullBinary,
    TokenizedText,
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::FullBinary, Strategy::TokenizedText, Strategy::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::FullBinary => "FullBinary",
            Strategy::TokenizedText => "TokenizedText",
            Strategy::Hybrid => "Hybrid",
        }
    }

    /// Short name used on the command line.
    pub fn flag(self) -> &'static str {
        match self {
            Strategy::FullBinary => "binary",
            Strategy::TokenizedText => "token",
            Strategy::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.flag() == s || st.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// An `N:1` ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

/// `source_bytes : compressed_bytes` as `N:1`, with `N` the quotient rounded
/// half to even.
pub fn compression_ratio(source_bytes: u64, compressed_bytes: u64) -> Ratio {
    assert!(compressed_bytes > 0, "compressed size must be positive");
    let q = source_bytes / compressed_bytes;
    let r = source_bytes % compressed_bytes;
    let num = match (2 * r).cmp(&compressed_bytes) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q & 1),
    };
    Ratio { num, den: 1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyResult {
    pub strategy: Strategy,
    /// Bytes of the deflate stream the strategy produced.
    pub compressed_size: usize,
    /// Bytes of source text the strategy represents.
    pub source_bytes: u64,
    /// Bytes of source text that come back byte-for-byte.
    pub verbatim_bytes: u64,
    pub ratio: Ratio,
    /// `verbatim_bytes` over the critical-file byte total.
    pub pct_critical_preserved: f64,
    /// `verbatim_bytes` over the whole codebase.
    pub pct_total: f64,
}

#[derive(Debug, Clone)]
pub struct StrategyOutput {
    pub blob: CompressedBlob,
    /// Sections carried verbatim next to the blob.
    pub expanded: Vec<SectionSpec>,
    pub result: StrategyResult,
}

/// Renders sections as `# --- ID ---` blocks, each followed by a blank line.
pub fn section_blocks<'a>(sections: impl IntoIterator<Item = &'a SectionSpec>) -> String {
    let mut out = String::new();
    for s in sections {
        out.push_str("# --- ");
        out.push_str(&s.id);
        out.push_str(" ---\n");
        out.push_str(&s.text);
        out.push_str("\n\n");
    }
    out
}

/// Statements the binary strategy encodes: every loaded source file, or the
/// section texts when no file was found on disk.
pub fn binary_source_statements(selection: &Selection) -> (Vec<AgcStatement>, u64) {
    if selection.sources.is_empty() {
        let text: String = selection
            .manifest
            .sections
            .iter()
            .map(|s| format!("{}\n", s.text))
            .collect();
        (parse_agc_source(&text), text.len() as u64)
    } else {
        let mut statements = Vec::new();
        let mut bytes = 0;
        for src in &selection.sources {
            statements.extend(parse_agc_source(&src.text));
            bytes += src.text.len() as u64;
        }
        (statements, bytes)
    }
}

/// Codebook fitted to the statements the binary strategy encodes.
pub fn selection_codebook(selection: &Selection) -> Result<Codebook, CodecError> {
    Codebook::build(&binary_source_statements(selection).0)
}

/// Codebook JSON, a newline, then the packed words.
fn binary_container(book: &Codebook, bits: &BitStream) -> Vec<u8> {
    let mut out = book.to_json().into_bytes();
    out.push(b'\n');
    out.extend_from_slice(bits.bytes());
    out
}

/// Inflates and unpacks a binary-strategy blob.
pub fn decode_binary_container(data: &[u8]) -> Result<Vec<AgcStatement>, CodecError> {
    let raw = inflate_raw(data)?;
    let split = raw
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CodecError::InvalidCodebook("missing codebook header".into()))?;
    let book: Codebook = serde_json::from_slice(&raw[..split])
        .map_err(|e| CodecError::InvalidCodebook(e.to_string()))?;
    let packed = raw[split + 1..].to_vec();
    let words = packed.len() * 8 / WORD_BITS;
    let bits = BitStream::from_parts(packed, words * WORD_BITS)?;
    decode_binary(&bits, &book)
}

fn fraction(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        (part as f64 / whole as f64).min(1.0)
    }
}

pub fn run_strategy(
    strategy: Strategy,
    selection: &Selection,
    dict: &TokenDictionary,
    book: &Codebook,
) -> Result<StrategyOutput, CodecError> {
    let manifest = &selection.manifest;
    if manifest.sections.is_empty() {
        return Err(CodecError::EmptySelection);
    }
    let section_bytes: u64 = manifest.sections.iter().map(|s| s.text.len() as u64).sum();

    let (blob, expanded, source_bytes, verbatim_bytes) = match strategy {
        Strategy::FullBinary => {
            let (statements, source_bytes) = binary_source_statements(selection);
            let bits = encode_binary(&statements, book)?;
            let verbatim: u64 = statements
                .iter()
                .filter(|s| s.is_canonical())
                .map(|s| s.to_source().len() as u64)
                .sum();
            let blob = compress(&binary_container(book, &bits));
            (blob, Vec::new(), source_bytes, verbatim.min(source_bytes))
        }
        Strategy::TokenizedText => {
            let doc = tokenize(&section_blocks(&manifest.sections), dict);
            (compress(doc.as_bytes()), Vec::new(), section_bytes, section_bytes)
        }
        Strategy::Hybrid => {
            let (expanded, connective): (Vec<&SectionSpec>, Vec<&SectionSpec>) = manifest
                .sections
                .iter()
                .partition(|s| selection.is_expanded(s));
            let doc = tokenize(&section_blocks(connective), dict);
            let expanded = expanded.into_iter().cloned().collect();
            (compress(doc.as_bytes()), expanded, section_bytes, section_bytes)
        }
    };

    let result = StrategyResult {
        strategy,
        compressed_size: blob.data.len(),
        source_bytes,
        verbatim_bytes,
        ratio: compression_ratio(source_bytes, blob.data.len() as u64),
        pct_critical_preserved: fraction(verbatim_bytes, manifest.critical_bytes()),
        pct_total: fraction(verbatim_bytes, manifest.codebase_bytes),
    };
    Ok(StrategyOutput {
        blob,
        expanded,
        result,
    })
}

/// Runs every strategy, in [`Strategy::ALL`] order.
pub fn compare_strategies(
    selection: &Selection,
    dict: &TokenDictionary,
    book: &Codebook,
) -> Result<Vec<StrategyResult>, CodecError> {
    Strategy::ALL
        .into_iter()
        .map(|s| run_strategy(s, selection, dict, book).map(|o| o.result))
        .collect()
}

/// One row of the published strategy comparison.
#[derive(Debug, Clone, Copy)]
pub struct PublishedRow {
    pub strategy: Strategy,
    pub compressed_size: u64,
    pub ratio: &'static str,
    pub pct_critical: f64,
    pub pct_total: f64,
}

/// Published figures; ratios are stated against the 83 500-byte critical
/// subtotal.
pub const PUBLISHED_ROWS: [PublishedRow; 3] = [
    PublishedRow {
        strategy: Strategy::FullBinary,
        compressed_size: 3072,
        ratio: "27:1",
        pct_critical: 0.30,
        pct_total: 0.0020,
    },
    PublishedRow {
        strategy: Strategy::TokenizedText,
        compressed_size: 2867,
        ratio: "22:1",
        pct_critical: 0.25,
        pct_total: 0.0015,
    },
    PublishedRow {
        strategy: Strategy::Hybrid,
        compressed_size: 1434,
        ratio: "15:1",
        pct_critical: 0.15,
        pct_total: 0.0010,
    },
];

impl PublishedRow {
    /// Ratio recomputed from the critical subtotal and the stated size.
    pub fn derived_ratio(&self, critical_bytes: u64) -> Ratio {
        compression_ratio(critical_bytes, self.compressed_size)
    }

    /// Whether the stated ratio follows from the stated size.
    pub fn is_consistent(&self, critical_bytes: u64) -> bool {
        self.derived_ratio(critical_bytes).to_string() == self.ratio
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SelectionManifest;

    #[test]
    fn ratio_rounding() {
        assert_eq!(compression_ratio(83_500, 3072).to_string(), "27:1");
        assert_eq!(compression_ratio(83_500, 2867).to_string(), "29:1");
        assert_eq!(compression_ratio(83_500, 1434).to_string(), "58:1");
        // exact halves go to even
        assert_eq!(compression_ratio(5, 2).to_string(), "2:1");
        assert_eq!(compression_ratio(7, 2).to_string(), "4:1");
        assert_eq!(compression_ratio(0, 9).to_string(), "0:1");
    }

    #[test]
    fn published_consistency() {
        let flags: Vec<bool> = PUBLISHED_ROWS.iter().map(|r| r.is_consistent(83_500)).collect();
        assert_eq!(flags, [true, false, false]);
    }

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.flag().parse::<Strategy>().unwrap(), s);
        }
        assert!("zip".parse::<Strategy>().is_err());
    }

    fn curated() -> (Selection, TokenDictionary, Codebook) {
        let sel = Selection::curated();
        let book = Codebook::build(&binary_source_statements(&sel).0).unwrap();
        (sel, TokenDictionary::default(), book)
    }

    #[test]
    fn empty_selection() {
        let (_, dict, book) = curated();
        let mut m = SelectionManifest::curated();
        m.sections.clear();
        let sel = Selection::new(m, Vec::new()).unwrap();
        for s in Strategy::ALL {
            assert!(matches!(
                run_strategy(s, &sel, &dict, &book),
                Err(CodecError::EmptySelection)
            ));
        }
    }

    #[test]
    fn binary_container_round_trip() {
        let (sel, dict, book) = curated();
        let out = run_strategy(Strategy::FullBinary, &sel, &dict, &book).unwrap();
        let decoded = decode_binary_container(&out.blob.data).unwrap();
        assert_eq!(decoded, binary_source_statements(&sel).0);
        assert_eq!(out.result.verbatim_bytes, out.result.source_bytes);
    }

    #[test]
    fn hybrid_splits_by_rating() {
        let (sel, dict, book) = curated();
        let out = run_strategy(Strategy::Hybrid, &sel, &dict, &book).unwrap();
        assert_eq!(out.expanded.len(), 4);
        assert_eq!(super::super::decompress(&out.blob).unwrap(), b"");

        let mut m = SelectionManifest::curated();
        for f in &mut m.files[3..] {
            f.technical_rating = 3;
        }
        let sel = Selection::new(m, Vec::new()).unwrap();
        let out = run_strategy(Strategy::Hybrid, &sel, &dict, &book).unwrap();
        let ids: Vec<_> = out.expanded.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["P63", "IGNALG"]);
        let doc = String::from_utf8(super::super::decompress(&out.blob).unwrap()).unwrap();
        let text = super::super::detokenize(&doc, &dict).unwrap();
        assert!(text.starts_with("# --- ALARM ---\nALARM INHINT CA Q\n"));
        assert!(text.contains("# --- P70 ---\n"));
    }

    #[test]
    fn hybrid_is_smallest_and_deterministic() {
        let (sel, dict, book) = curated();
        let a = compare_strategies(&sel, &dict, &book).unwrap();
        let b = compare_strategies(&sel, &dict, &book).unwrap();
        assert_eq!(a, b);
        let order: Vec<_> = a.iter().map(|r| r.strategy).collect();
        assert_eq!(order, Strategy::ALL);
        let hybrid = a[2].compressed_size;
        assert!(a[..2].iter().all(|r| r.compressed_size > hybrid), "{a:?}");
    }

    #[test]
    fn single_file_manifest_still_three_rows() {
        let (_, dict, _) = curated();
        let mut m = SelectionManifest::curated();
        m.files.truncate(1);
        m.sections.truncate(1);
        let sel = Selection::new(m, Vec::new()).unwrap();
        let book = Codebook::build(&binary_source_statements(&sel).0).unwrap();
        let rows = compare_strategies(&sel, &dict, &book).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.compressed_size > 0);
            assert!((0.0..=1.0).contains(&r.pct_critical_preserved));
            assert!((0.0..=1.0).contains(&r.pct_total));
        }
    }
}
