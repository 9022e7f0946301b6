//! Source ingestion, significance rating and section extraction.

mod manifest;
mod statement;

pub use manifest::{
    LoadedSource, Selection, SelectionManifest, SectionSpec, SourceFileRecord,
    CRITICAL_FILES, LUMINARY_TOTAL_BYTES, LUMINARY_TOTAL_LINES, SELECTION_GUIDELINES,
};
pub use statement::{
    is_mnemonic, line_count, parse_agc_source, serialize, AgcStatement, Layout, OpaqueReason,
    StatementKind, COMMENT_MARKER,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("section `{id}` not found: {detail}")]
    MissingSection { id: String, detail: String },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Line/byte sums over a set of records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub line_count: u64,
    pub byte_size: u64,
}

impl Totals {
    pub fn of<'a>(records: impl IntoIterator<Item = &'a SourceFileRecord>) -> Self {
        records.into_iter().fold(Totals::default(), |acc, r| Totals {
            line_count: acc.line_count + r.line_count,
            byte_size: acc.byte_size + r.byte_size,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanError {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusScan {
    pub records: Vec<SourceFileRecord>,
    /// Sum over records whose name is one of [`CRITICAL_FILES`].
    pub critical: Totals,
    pub total: Totals,
    pub errors: Vec<ScanError>,
}

/// Builds size records for every entry. Entries that are not UTF-8 text are
/// reported in `errors` and skipped.
pub fn scan_corpus<'a>(entries: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> CorpusScan {
    let mut scan = CorpusScan::default();
    for (name, bytes) in entries {
        match std::str::from_utf8(bytes) {
            Ok(text) => scan.records.push(SourceFileRecord::measured(name, text)),
            Err(e) => scan.errors.push(ScanError {
                name: name.to_string(),
                reason: e.to_string(),
            }),
        }
    }
    scan.critical = Totals::of(scan.records.iter().filter(|r| r.is_critical()));
    scan.total = Totals::of(&scan.records);
    scan
}

/// Reads every `.agc` file in `dir` (non-recursive, sorted by name) and scans
/// it. Read failures are collected alongside decode failures.
pub fn scan_dir(dir: &Path) -> Result<CorpusScan, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "agc"))
        .collect();
    paths.sort();

    let mut loaded = Vec::new();
    let mut read_errors = Vec::new();
    for path in paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match std::fs::read(&path) {
            Ok(bytes) => loaded.push((name, bytes)),
            Err(e) => read_errors.push(ScanError {
                name,
                reason: e.to_string(),
            }),
        }
    }
    let mut scan = scan_corpus(loaded.iter().map(|(n, b)| (n.as_str(), b.as_slice())));
    scan.errors.extend(read_errors);
    Ok(scan)
}

/// Splits records into (full preservation, tokenize only). A file is fully
/// preserved when both ratings are at least 4.
pub fn select_files(
    records: &[SourceFileRecord],
) -> (Vec<SourceFileRecord>, Vec<SourceFileRecord>) {
    records.iter().cloned().partition(|r| r.qualifies_for_full_preservation())
}

/// Resolves a section against parsed statements.
///
/// Curated sections are returned unchanged. Otherwise the slice starts at the
/// first statement labelled `start_label` and spans `statement_count`
/// statements.
pub fn extract_section(
    statements: &[AgcStatement],
    spec: &SectionSpec,
) -> Result<SectionSpec, CorpusError> {
    if spec.curated {
        return Ok(spec.clone());
    }
    let missing = |detail: String| CorpusError::MissingSection {
        id: spec.id.clone(),
        detail,
    };
    let label = spec
        .start_label
        .as_deref()
        .ok_or_else(|| missing("no start_label given".into()))?;
    let count = spec.statement_count.unwrap_or(0);
    if count == 0 {
        return Err(missing("statement_count must be positive".into()));
    }
    let start = statements
        .iter()
        .position(|st| st.label.as_deref() == Some(label))
        .ok_or_else(|| missing(format!("label `{label}` not present in {}", spec.source_file)))?;
    let end = start + count;
    if end > statements.len() {
        return Err(missing(format!(
            "{count} statements from `{label}` run past end of {} ({} lines)",
            spec.source_file,
            statements.len()
        )));
    }
    let mut text = serialize(&statements[start..end]);
    // Sections are stored without the final line terminator.
    if text.ends_with('\n') {
        text.pop();
        if text.ends_with('\r') {
            text.pop();
        }
    }
    Ok(SectionSpec {
        text,
        ..spec.clone()
    })
}
