//! The self-extracting HTML page and its byte accounting.
//!
//! Layout, byte for byte:
//!
//! ```text
//! <!DOCTYPE html><html><body style="font-family:monospace">
//! <pre id="o">Loading...</pre><script>
//! D={"a":"TC",...};E="~";S=[["P63","..."],...];B="<base64>";<viewer>
//! </script></body></html>
//! ```
//!
//! `D` holds only the tokens the blob uses, `S` the sections carried
//! verbatim, and `B` the raw deflate stream in padded standard base64.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use percent_encoding::{percent_decode, utf8_percent_encode, AsciiSet, CONTROLS};
use thiserror::Error;

use crate::codec::{
    decode_binary_container, detokenize, inflate_raw, is_word_separator, CodecError,
    CompressedBlob, Strategy, StrategyOutput, TokenDictionary,
};
use crate::corpus::{serialize, SectionSpec};

pub const SHELL_HEAD: &str =
    "<!DOCTYPE html><html><body style=\"font-family:monospace\">\n<pre id=\"o\">Loading...</pre><script>\n";
pub const SHELL_TAIL: &str = "\n</script></body></html>";

/// Minified viewer: inflates `B` with the browser's `deflate-raw` stream,
/// detokenizes with `D`/`E`, and writes the sections and core into `#o`.
pub const VIEWER_STUB: &str = include_str!("../assets/viewer.min.js");
pub const STUB_BUDGET: usize = 400;

/// Largest byte-mode payload of any QR symbol (version 40-L).
pub const HARD_CAP: usize = 2953;

pub const DATA_URI_PREFIX: &str = "data:text/html,";

pub const TITLE: &str = "# APOLLO 11 LUNAR MODULE CODE\n\n";
pub const CORE_HEADER: &str = "# Decompressed core:\n";

/// Characters outside the RFC 2396 `uric` set, which a data URI must escape.
const URI_ESCAPES: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'"')
    .add(b'#')
    .add(b'%')
    .add(b'<')
    .add(b'>')
    .add(b'[')
    .add(b'\\')
    .add(b']')
    .add(b'^')
    .add(b'`')
    .add(b'{')
    .add(b'|')
    .add(b'}');

/// Section bodies as they appear in the reference decompressed listing.
pub const GOLDEN_SECTIONS: [(&str, &str); 4] = [
    (
        "P63",
        "P63LM TC PHASCHNG OCT 04024\n\
         TC BANKCALL CADR R02BOTH\n\
         CAF P63ADRES TS WHICH\n\
         CAF DPSTHRSH TS DVTHRUSH",
    ),
    (
        "IGNALG",
        "IGNALG SETPD 0 VLOAD RLS\n\
         PDDL PUSH TLAND\n\
         STCALL TPIP RP-TO-R\n\
         VSL4 MXV REFSMMAT\n\
         STCALL LAND GUIDINIT",
    ),
    (
        "ALARM",
        "ALARM INHINT CA Q\n\
         TS ALMCADR INDEX Q\n\
         CA 0 TS L\n\
         CA BBANK EXTEND\n\
         ROR SUPERBINK\n\
         TS ALMCADR+1\n\
         CS DSPTAB+11D MASK OCT40400\n\
         ADS DSPTAB+11D",
    ),
    (
        "P70",
        "P70 TC LEGAL? CS ZERO TCF +3\n\
         P71 TC LEGAL? CAF TWO\n\
         +3 TS Q INHINT EXTEND\n\
         DCA CNTABTAD DTCB",
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PayloadMode {
    #[default]
    RawHtml,
    DataUri,
}

impl PayloadMode {
    pub fn flag(self) -> &'static str {
        match self {
            PayloadMode::RawHtml => "html",
            PayloadMode::DataUri => "uri",
        }
    }
}

impl std::str::FromStr for PayloadMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "html" => Ok(PayloadMode::RawHtml),
            "uri" => Ok(PayloadMode::DataUri),
            _ => Err(format!("unknown payload mode `{s}` (expected html or uri)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayloadArtifact {
    pub html: Vec<u8>,
    pub mode: PayloadMode,
    pub shell_bytes: usize,
    pub dict_bytes: usize,
    pub sections_bytes: usize,
    /// `B="...";` as embedded.
    pub blob_bytes: usize,
    /// Deflate stream before base64.
    pub blob_raw_bytes: usize,
    pub stub_bytes: usize,
    /// Growth from the data URI prefix and percent-escapes; zero for HTML.
    pub uri_overhead_bytes: usize,
    pub total_bytes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub part: &'static str,
    pub bytes: usize,
    pub percent: f64,
}

#[derive(Debug, Error)]
pub enum PayloadError {
    #[error("payload of {total} bytes exceeds the {cap}-byte cap ({})", Breakdown(.parts))]
    BudgetExceeded {
        total: usize,
        cap: usize,
        parts: Vec<(&'static str, usize)>,
    },
    #[error("viewer stub is {0} bytes, over the {STUB_BUDGET}-byte budget")]
    StubTooLarge(usize),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

struct Breakdown<'a>(&'a [(&'static str, usize)]);

impl fmt::Display for Breakdown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (part, bytes)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{part} {bytes}")?;
        }
        Ok(())
    }
}

/// JSON with `</` escaped so the text cannot close the script element.
fn script_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string(v)
        .expect("plain data serializes")
        .replace("</", "<\\/")
}

/// The entries of `dict` whose tokens occur as whole words in `text`.
pub fn used_dictionary(text: &str, dict: &TokenDictionary) -> TokenDictionary {
    let words: HashSet<&str> = text.split(is_word_separator).collect();
    let entries: BTreeMap<char, String> = dict
        .entries()
        .filter(|(c, _)| words.contains(c.encode_utf8(&mut [0; 4]) as &str))
        .map(|(c, m)| (c, m.to_string()))
        .collect();
    TokenDictionary::new(entries, dict.escape()).expect("subset of a valid dictionary")
}

fn dict_part(dict: &TokenDictionary) -> String {
    let map: BTreeMap<String, &str> = dict.entries().map(|(c, m)| (c.to_string(), m)).collect();
    format!(
        "D={};E={};",
        script_json(&map),
        script_json(&dict.escape().to_string())
    )
}

fn sections_part(sections: &[SectionSpec]) -> String {
    let pairs: Vec<[&str; 2]> = sections.iter().map(|s| [s.id.as_str(), s.text.as_str()]).collect();
    format!("S={};", script_json(&pairs))
}

pub fn assemble_payload(
    blob: &CompressedBlob,
    sections: &[SectionSpec],
    dict: &TokenDictionary,
    stub: &str,
    mode: PayloadMode,
) -> Result<PayloadArtifact, PayloadError> {
    if stub.len() > STUB_BUDGET {
        return Err(PayloadError::StubTooLarge(stub.len()));
    }
    let dict_s = dict_part(dict);
    let sections_s = sections_part(sections);
    let blob_s = format!("B=\"{}\";", STANDARD.encode(&blob.data));

    let mut html = String::with_capacity(1024);
    for part in [SHELL_HEAD, &dict_s, &sections_s, &blob_s, stub, SHELL_TAIL] {
        html.push_str(part);
    }
    let raw_len = html.len();
    let html = match mode {
        PayloadMode::RawHtml => html.into_bytes(),
        PayloadMode::DataUri => {
            format!("{DATA_URI_PREFIX}{}", utf8_percent_encode(&html, URI_ESCAPES)).into_bytes()
        }
    };

    let artifact = PayloadArtifact {
        mode,
        shell_bytes: SHELL_HEAD.len() + SHELL_TAIL.len(),
        dict_bytes: dict_s.len(),
        sections_bytes: sections_s.len(),
        blob_bytes: blob_s.len(),
        blob_raw_bytes: blob.data.len(),
        stub_bytes: stub.len(),
        uri_overhead_bytes: html.len() - raw_len,
        total_bytes: html.len(),
        html,
    };
    if artifact.total_bytes > HARD_CAP {
        return Err(PayloadError::BudgetExceeded {
            total: artifact.total_bytes,
            cap: HARD_CAP,
            parts: artifact.parts(),
        });
    }
    Ok(artifact)
}

/// Payload for a strategy's output with the shipped viewer. Text blobs get
/// the subset of `dict` they use; binary blobs get an empty dictionary.
pub fn build_payload(
    output: &StrategyOutput,
    dict: &TokenDictionary,
    mode: PayloadMode,
) -> Result<PayloadArtifact, PayloadError> {
    let used = match output.result.strategy {
        Strategy::FullBinary => TokenDictionary::new(BTreeMap::new(), dict.escape())?,
        Strategy::TokenizedText | Strategy::Hybrid => {
            let text = String::from_utf8(inflate_raw(&output.blob.data)?)
                .map_err(|_| CodecError::NotUtf8)?;
            used_dictionary(&text, dict)
        }
    };
    assemble_payload(&output.blob, &output.expanded, &used, VIEWER_STUB, mode)
}

impl PayloadArtifact {
    /// Parts in document order; they sum to `total_bytes`.
    pub fn parts(&self) -> Vec<(&'static str, usize)> {
        let mut parts = vec![
            ("shell", self.shell_bytes),
            ("dict", self.dict_bytes),
            ("sections", self.sections_bytes),
            ("blob", self.blob_bytes),
            ("stub", self.stub_bytes),
        ];
        if self.mode == PayloadMode::DataUri {
            parts.push(("uri_encoding", self.uri_overhead_bytes));
        }
        parts
    }

    /// The document with any data URI wrapping removed.
    pub fn document(&self) -> Result<Vec<u8>, PayloadError> {
        match self.mode {
            PayloadMode::RawHtml => Ok(self.html.clone()),
            PayloadMode::DataUri => decode_data_uri(&self.html),
        }
    }
}

pub fn budget_report(artifact: &PayloadArtifact) -> Vec<BudgetRow> {
    let total = artifact.total_bytes.max(1) as f64;
    artifact
        .parts()
        .into_iter()
        .map(|(part, bytes)| BudgetRow {
            part,
            bytes,
            percent: 100.0 * bytes as f64 / total,
        })
        .collect()
}

/// Budget rows as TSV with a total line, then the deflate stream size on
/// its own for comparison with compressed-data-only figures.
pub fn budget_tsv(artifact: &PayloadArtifact) -> String {
    let mut out = String::from("part\tbytes\tpercent\n");
    for row in budget_report(artifact) {
        out.push_str(&format!("{}\t{}\t{:.1}\n", row.part, row.bytes, row.percent));
    }
    out.push_str(&format!("total\t{}\t100.0\n", artifact.total_bytes));
    out.push_str(&format!("compressed_data_only\t{}\t\n", artifact.blob_raw_bytes));
    out
}

/// Inverse of the DataUri wrapping.
pub fn decode_data_uri(uri: &[u8]) -> Result<Vec<u8>, PayloadError> {
    let body = uri
        .strip_prefix(DATA_URI_PREFIX.as_bytes())
        .ok_or_else(|| PayloadError::Malformed("missing `data:text/html,` prefix".into()))?;
    Ok(percent_decode(body).collect())
}

/// What the viewer would display, computed on the host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub dictionary: TokenDictionary,
    pub sections: Vec<(String, String)>,
    pub core: String,
    pub rendered: String,
}

/// Reads one JSON value from the front of `s`; returns it and the rest.
fn take_json<'a, T: serde::de::DeserializeOwned>(s: &'a str, what: &str) -> Result<(T, &'a str), PayloadError> {
    let mut stream = serde_json::Deserializer::from_str(s).into_iter::<T>();
    let value = stream
        .next()
        .ok_or_else(|| PayloadError::Malformed(format!("missing {what}")))?
        .map_err(|e| PayloadError::Malformed(format!("{what}: {e}")))?;
    Ok((value, &s[stream.byte_offset()..]))
}

fn expect<'a>(s: &'a str, prefix: &str) -> Result<&'a str, PayloadError> {
    s.strip_prefix(prefix)
        .ok_or_else(|| PayloadError::Malformed(format!("expected `{prefix}`")))
}

/// Host-side run of the viewer: parses the embedded globals, inflates and
/// detokenizes the blob (or unpacks it, for the binary strategy), and
/// renders the same text the page shows.
pub fn extract(document: &[u8], strategy: Strategy) -> Result<Extraction, PayloadError> {
    let doc = std::str::from_utf8(document).map_err(|_| PayloadError::Malformed("not UTF-8".into()))?;
    let rest = expect(doc, SHELL_HEAD)?;
    let rest = expect(rest, "D=")?;
    let (tokens, rest): (BTreeMap<String, String>, _) = take_json(rest, "dictionary")?;
    let rest = expect(rest, ";E=")?;
    let (escape, rest): (String, _) = take_json(rest, "escape")?;
    let rest = expect(rest, ";S=")?;
    let (sections, rest): (Vec<(String, String)>, _) = take_json(rest, "sections")?;
    let rest = expect(rest, ";B=")?;
    let (b64, rest): (String, _) = take_json(rest, "blob")?;
    let rest = expect(rest, ";")?;
    if !rest.ends_with(SHELL_TAIL) {
        return Err(PayloadError::Malformed("document does not end with the shell".into()));
    }

    let single = |s: &str, what: &str| {
        let mut it = s.chars();
        match (it.next(), it.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(PayloadError::Malformed(format!("{what} `{s}` is not one character"))),
        }
    };
    let entries = tokens
        .iter()
        .map(|(k, v)| Ok((single(k, "token")?, v.clone())))
        .collect::<Result<BTreeMap<_, _>, PayloadError>>()?;
    let dictionary = TokenDictionary::new(entries, single(&escape, "escape")?)?;

    let blob = STANDARD
        .decode(b64.as_bytes())
        .map_err(|e| PayloadError::Malformed(format!("base64: {e}")))?;
    let core = if blob.is_empty() {
        String::new()
    } else {
        match strategy {
            Strategy::FullBinary => serialize(&decode_binary_container(&blob)?),
            Strategy::TokenizedText | Strategy::Hybrid => {
                let text = String::from_utf8(inflate_raw(&blob)?).map_err(|_| CodecError::NotUtf8)?;
                detokenize(&text, &dictionary)?
            }
        }
    };

    let mut rendered = String::from(TITLE);
    for (id, text) in &sections {
        rendered.push_str(&format!("# --- {id} ---\n{text}\n\n"));
    }
    rendered.push_str(CORE_HEADER);
    rendered.push_str(&core);
    Ok(Extraction {
        dictionary,
        sections,
        core,
        rendered,
    })
}

/// `# --- ID ---` blocks anywhere in rendered text, in order.
pub fn rendered_blocks(rendered: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut lines = rendered.split('\n').peekable();
    while let Some(line) = lines.next() {
        let Some(id) = line.strip_prefix("# --- ").and_then(|l| l.strip_suffix(" ---")) else {
            continue;
        };
        let mut body = Vec::new();
        while let Some(&next) = lines.peek() {
            if next.is_empty() || next.starts_with("# --- ") || next == CORE_HEADER.trim_end() {
                break;
            }
            body.push(next);
            lines.next();
        }
        out.push((id.to_string(), body.join("\n")));
    }
    out
}
