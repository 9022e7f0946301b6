//! Line-oriented parser for AGC assembly transcriptions.
//!
//! Every input line becomes exactly one [`AgcStatement`]. Whitespace runs,
//! comment text and line endings are kept as layout metadata so that
//! [`serialize`] reproduces the input byte-for-byte.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Marker that starts a comment running to end of line.
pub const COMMENT_MARKER: char = '#';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpaqueReason {
    /// A column-1 symbol with nothing after it.
    LabelOnly,
    /// Control characters other than tab inside the code field.
    ControlCharacters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    Instruction,
    Comment,
    Blank,
    /// Kept verbatim; the reason is the diagnostic.
    Opaque(OpaqueReason),
}

/// Whitespace and line-ending metadata needed for exact re-serialization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    /// Whitespace preceding each field: label (if any), opcode, every
    /// operand, and finally the comment marker (if any).
    pub gaps: Vec<String>,
    /// Whitespace after the last field when there is no comment.
    pub trailing: String,
    /// `"\n"`, `"\r\n"` or empty for an unterminated final line.
    pub eol: String,
    /// Original line text for opaque statements.
    pub raw: Option<String>,
}

/// One parsed source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgcStatement {
    pub line_no: usize,
    pub kind: StatementKind,
    pub label: Option<String>,
    pub opcode: String,
    pub operands: Vec<String>,
    /// Text after the comment marker, excluding the marker itself.
    pub comment: Option<String>,
    pub layout: Layout,
}

impl AgcStatement {
    /// An instruction line in canonical form: fields separated by single
    /// spaces, no comment, terminated by `\n`.
    pub fn instruction(
        line_no: usize,
        label: Option<&str>,
        opcode: &str,
        operands: &[&str],
    ) -> Self {
        let field_count = usize::from(label.is_some()) + 1 + operands.len();
        let gaps = (0..field_count)
            .map(|i| if i == 0 { String::new() } else { " ".to_string() })
            .collect();
        AgcStatement {
            line_no,
            kind: StatementKind::Instruction,
            label: label.map(str::to_string),
            opcode: opcode.to_string(),
            operands: operands.iter().map(|s| s.to_string()).collect(),
            comment: None,
            layout: Layout {
                gaps,
                trailing: String::new(),
                eol: "\n".to_string(),
                raw: None,
            },
        }
    }

    pub fn is_instruction(&self) -> bool {
        self.kind == StatementKind::Instruction
    }

    /// True when the statement has the layout [`AgcStatement::instruction`]
    /// would give it, i.e. its fields alone determine its source bytes.
    pub fn is_canonical(&self) -> bool {
        if !self.is_instruction() || self.comment.is_some() {
            return false;
        }
        let canon = AgcStatement::instruction(
            self.line_no,
            self.label.as_deref(),
            &self.opcode,
            &self.operands.iter().map(String::as_str).collect::<Vec<_>>(),
        );
        canon.layout == self.layout
    }

    pub fn write_source(&self, out: &mut String) {
        if let Some(raw) = &self.layout.raw {
            out.push_str(raw);
            out.push_str(&self.layout.eol);
            return;
        }
        let fields = self
            .label
            .iter()
            .chain(std::iter::once(&self.opcode).filter(|op| !op.is_empty()))
            .chain(self.operands.iter());
        let mut gaps = self.layout.gaps.iter();
        for field in fields {
            if let Some(gap) = gaps.next() {
                out.push_str(gap);
            }
            out.push_str(field);
        }
        if let Some(comment) = &self.comment {
            if let Some(gap) = gaps.next() {
                out.push_str(gap);
            }
            out.push(COMMENT_MARKER);
            out.push_str(comment);
        }
        out.push_str(&self.layout.trailing);
        out.push_str(&self.layout.eol);
    }

    pub fn to_source(&self) -> String {
        let mut s = String::new();
        self.write_source(&mut s);
        s
    }
}

/// Parses text into one statement per line.
///
/// Empty input yields a single blank statement with no line ending. A final
/// line without a terminator is kept as-is; a trailing terminator does not
/// create an extra statement.
pub fn parse_agc_source(text: &str) -> Vec<AgcStatement> {
    if text.is_empty() {
        return vec![AgcStatement {
            line_no: 1,
            kind: StatementKind::Blank,
            label: None,
            opcode: String::new(),
            operands: Vec::new(),
            comment: None,
            layout: Layout::default(),
        }];
    }
    text.split_inclusive('\n')
        .enumerate()
        .map(|(i, line)| parse_line(i + 1, line))
        .collect()
}

/// Concatenates the source form of every statement.
pub fn serialize(statements: &[AgcStatement]) -> String {
    let mut out = String::new();
    for st in statements {
        st.write_source(&mut out);
    }
    out
}

/// Number of lines as counted by the parser (`split_inclusive` on `\n`).
pub fn line_count(text: &str) -> usize {
    text.split_inclusive('\n').count()
}

fn split_eol(line: &str) -> (&str, &str) {
    if let Some(body) = line.strip_suffix("\r\n") {
        (body, "\r\n")
    } else if let Some(body) = line.strip_suffix('\n') {
        (body, "\n")
    } else {
        (line, "")
    }
}

fn is_field_space(c: char) -> bool {
    c == ' ' || c == '\t'
}

fn parse_line(line_no: usize, line: &str) -> AgcStatement {
    let (body, eol) = split_eol(line);
    let (code, comment) = match body.find(COMMENT_MARKER) {
        Some(at) => (&body[..at], Some(&body[at + 1..])),
        None => (body, None),
    };

    let opaque = |reason| AgcStatement {
        line_no,
        kind: StatementKind::Opaque(reason),
        label: None,
        opcode: String::new(),
        operands: Vec::new(),
        comment: None,
        layout: Layout {
            gaps: Vec::new(),
            trailing: String::new(),
            eol: eol.to_string(),
            raw: Some(body.to_string()),
        },
    };

    if code.chars().any(|c| c.is_control() && c != '\t') {
        return opaque(OpaqueReason::ControlCharacters);
    }

    let mut gaps = Vec::new();
    let mut words = Vec::new();
    let mut rest = code;
    loop {
        let ws_end = rest.find(|c| !is_field_space(c)).unwrap_or(rest.len());
        let (gap, after) = rest.split_at(ws_end);
        if after.is_empty() {
            rest = gap;
            break;
        }
        let word_end = after.find(is_field_space).unwrap_or(after.len());
        let (word, tail) = after.split_at(word_end);
        gaps.push(gap.to_string());
        words.push(word.to_string());
        rest = tail;
    }
    // `rest` is now the whitespace after the last word.
    let mut trailing = rest.to_string();
    if comment.is_some() {
        gaps.push(std::mem::take(&mut trailing));
    }

    let layout = Layout {
        gaps,
        trailing,
        eol: eol.to_string(),
        raw: None,
    };
    let base = AgcStatement {
        line_no,
        kind: StatementKind::Blank,
        label: None,
        opcode: String::new(),
        operands: Vec::new(),
        comment: comment.map(str::to_string),
        layout,
    };

    if words.is_empty() {
        let kind = if comment.is_some() {
            StatementKind::Comment
        } else {
            StatementKind::Blank
        };
        return AgcStatement { kind, ..base };
    }

    let indented = code.starts_with(is_field_space);
    let mut words = words.into_iter();
    let first = words.next().expect("non-empty");
    let (label, opcode) = if indented || is_mnemonic(&first) {
        (None, first)
    } else {
        match words.next() {
            Some(op) => (Some(first), op),
            None => return opaque(OpaqueReason::LabelOnly),
        }
    };
    AgcStatement {
        kind: StatementKind::Instruction,
        label,
        opcode,
        operands: words.collect(),
        ..base
    }
}

/// Whether `word` is an AGC machine, interpretive or assembler mnemonic.
///
/// Used to tell an unindented opcode from a column-1 label in flattened
/// transcriptions. Index suffixes (`,1`, `,2`) are ignored.
pub fn is_mnemonic(word: &str) -> bool {
    let base = word
        .strip_suffix(",1")
        .or_else(|| word.strip_suffix(",2"))
        .unwrap_or(word);
    mnemonic_set().contains(base)
}

fn mnemonic_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| MNEMONICS.iter().copied().collect())
}

const MNEMONICS: &[&str] = &[
    // basic instructions
    "AD", "ADS", "CA", "CAE", "CAF", "CCS", "COM", "CS", "DAS", "DCA", "DCOM", "DCS", "DDOUBL",
    "DOUBLE", "DTCB", "DTCF", "DXCH", "EXTEND", "INCR", "INDEX", "INHINT", "LXCH", "MASK",
    "MSK", "NDX", "NOOP", "OVSK", "RELINT", "RESUME", "RETURN", "SQUARE", "TC", "TCAA", "TCF",
    "TCR", "TS", "XCH", "XLQ", "XXALQ", "ZL", "ZQ",
    // extracode instructions
    "AUG", "BZF", "BZMF", "DIM", "DV", "EDRUPT", "MP", "MSU", "QXCH", "RAND", "READ", "ROR",
    "RXOR", "SU", "WAND", "WOR", "WRITE",
    // assembler directives and constants
    "1DNADR", "2BCADR", "2CADR", "2DEC", "2DEC*", "2DNADR", "2FCADR", "2OCT", "3DNADR",
    "4DNADR", "5DNADR", "6DNADR", "ADRES", "BANK", "BBCON", "BBCON*", "BLOCK", "BNKSUM", "CADR",
    "CHECK=", "COUNT", "COUNT*", "DEC", "DEC*", "DNCHAN", "DNPTR", "EBANK=", "ECADR", "EQUALS",
    "ERASE", "FCADR", "GENADR", "MEMORY", "MM", "OCT", "OCTAL", "REMADR", "SBANK=", "SETLOC",
    "SUBRO", "VN", "=", "=MINUS",
    // interpretive instructions
    "ABS", "ABVAL", "ACOS", "ARCCOS", "ARCSIN", "ASIN", "AXC", "AXT", "BDDV", "BDSU", "BHIZ",
    "BMN", "BOFCLR", "BOFF", "BOFINV", "BOFSET", "BON", "BONCLR", "BONINV", "BONSET", "BOV",
    "BOVB", "BPL", "BVSU", "BZE", "CALL", "CALRB", "CCALL", "CGOTO", "CLEAR", "CLR", "CLRGO",
    "COS", "COSINE", "DAD", "DCOMP", "DDV", "DLOAD", "DMP", "DMPR", "DOT", "DSQ", "DSU", "EXIT",
    "GOTO", "INCR", "INVERT", "INVGO", "LXA", "LXC", "MXV", "NORM", "PDDL", "PDVL", "PUSH",
    "ROUND", "RTB", "RVQ", "SET", "SETGO", "SETPD", "SIGN", "SIN", "SINE", "SL", "SL1", "SL1R",
    "SL2", "SL2R", "SL3", "SL3R", "SL4", "SL4R", "SLOAD", "SLR", "SQRT", "SR", "SR1", "SR1R",
    "SR2", "SR2R", "SR3", "SR3R", "SR4", "SR4R", "SRR", "SSP", "STADR", "STCALL", "STODL",
    "STORE", "STOVL", "STQ", "SXA", "TAD", "TIX", "TLOAD", "UNIT", "V/SC", "VAD", "VCOMP",
    "VDEF", "VLOAD", "VPROJ", "VSL", "VSL1", "VSL2", "VSL3", "VSL4", "VSL5", "VSL6", "VSL7",
    "VSL8", "VSQ", "VSR", "VSR1", "VSR2", "VSR3", "VSR4", "VSR5", "VSR6", "VSR7", "VSR8", "VSU",
    "VXM", "VXSC", "VXV", "XAD", "XCHX", "XSU",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_opcode_operand() {
        let st = &parse_agc_source("P63LM TC PHASCHNG")[0];
        assert_eq!(st.kind, StatementKind::Instruction);
        assert_eq!(st.label.as_deref(), Some("P63LM"));
        assert_eq!(st.opcode, "TC");
        assert_eq!(st.operands, vec!["PHASCHNG"]);
    }

    #[test]
    fn empty_text_is_one_blank() {
        let sts = parse_agc_source("");
        assert_eq!(sts.len(), 1);
        assert_eq!(sts[0].kind, StatementKind::Blank);
        assert_eq!(serialize(&sts), "");
    }

    #[test]
    fn unindented_mnemonic_is_opcode() {
        let st = &parse_agc_source("TC BANKCALL CADR R02BOTH\n")[0];
        assert_eq!(st.label, None);
        assert_eq!(st.opcode, "TC");
        assert_eq!(st.operands, vec!["BANKCALL", "CADR", "R02BOTH"]);

        let st = &parse_agc_source("+3 TS Q INHINT EXTEND")[0];
        assert_eq!(st.label.as_deref(), Some("+3"));
        assert_eq!(st.opcode, "TS");
    }

    #[test]
    fn indented_line_has_no_label() {
        let line = "\t\tCAF\tZERO\t\t# EXTIRPATE JUNK\n";
        let st = &parse_agc_source(line)[0];
        assert_eq!(st.label, None);
        assert_eq!(st.opcode, "CAF");
        assert_eq!(st.operands, vec!["ZERO"]);
        assert_eq!(st.comment.as_deref(), Some(" EXTIRPATE JUNK"));
        assert_eq!(st.to_source(), line);
    }

    #[test]
    fn comment_and_blank_kinds() {
        let sts = parse_agc_source("## Page 801\n   \n");
        assert_eq!(sts[0].kind, StatementKind::Comment);
        assert_eq!(sts[1].kind, StatementKind::Blank);
        assert_eq!(serialize(&sts), "## Page 801\n   \n");
    }

    #[test]
    fn label_only_is_opaque_not_dropped() {
        let sts = parse_agc_source("FLAGWRD3\nBAD\u{7}CODE TC X\r\n");
        assert_eq!(sts[0].kind, StatementKind::Opaque(OpaqueReason::LabelOnly));
        assert_eq!(
            sts[1].kind,
            StatementKind::Opaque(OpaqueReason::ControlCharacters)
        );
        assert_eq!(serialize(&sts), "FLAGWRD3\nBAD\u{7}CODE TC X\r\n");
    }

    #[test]
    fn indexed_interpretive_mnemonics() {
        assert!(is_mnemonic("AXT,1"));
        assert!(is_mnemonic("VSL4"));
        assert!(!is_mnemonic("P63LM"));
    }

    #[test]
    fn canonical_instruction_round_trips() {
        let st = AgcStatement::instruction(1, Some("ALARM"), "INHINT", &["CA", "Q"]);
        assert_eq!(st.to_source(), "ALARM INHINT CA Q\n");
        assert!(st.is_canonical());
        let parsed = &parse_agc_source("ALARM INHINT CA Q\n")[0];
        assert_eq!(parsed, &st);
        assert!(!parse_agc_source("X  TC Y\n")[0].is_canonical());
    }

    #[test]
    fn line_counts() {
        assert_eq!(line_count(""), 0);
        assert_eq!(line_count("a\nb"), 2);
        assert_eq!(line_count("a\nb\n"), 2);
        assert_eq!(parse_agc_source("a\nb\n").len(), 2);
    }
}
