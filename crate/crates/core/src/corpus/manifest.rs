use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{extract_section, line_count, parse_agc_source, CorpusError};

/// A critical Luminary 099 file with its published size and default ratings.
#[derive(Debug, Clone, Copy)]
pub struct CriticalFile {
    pub name: &'static str,
    pub line_count: u64,
    pub byte_size: u64,
    pub historical_rating: u8,
    pub technical_rating: u8,
}

pub const CRITICAL_FILES: [CriticalFile; 5] = [
    CriticalFile {
        name: "THE_LUNAR_LANDING.agc",
        line_count: 387,
        byte_size: 14_500,
        historical_rating: 5,
        technical_rating: 5,
    },
    CriticalFile {
        name: "LUNAR_LANDING_GUIDANCE_EQUATIONS.agc",
        line_count: 824,
        byte_size: 33_000,
        historical_rating: 5,
        technical_rating: 5,
    },
    CriticalFile {
        name: "BURN_BABY_BURN--MASTER_IGNITION_ROUTINE.agc",
        line_count: 573,
        byte_size: 21_000,
        historical_rating: 4,
        technical_rating: 4,
    },
    CriticalFile {
        name: "P70-P71.agc",
        line_count: 225,
        byte_size: 9_000,
        historical_rating: 5,
        technical_rating: 4,
    },
    CriticalFile {
        name: "ALARM_AND_ABORT.agc",
        line_count: 150,
        byte_size: 6_000,
        historical_rating: 5,
        technical_rating: 4,
    },
];

/// Whole Luminary 099 codebase, as published.
pub const LUMINARY_TOTAL_LINES: u64 = 40_202;
pub const LUMINARY_TOTAL_BYTES: u64 = 1_510_000;

/// Target excerpt lengths (lines) per section family.
pub const SELECTION_GUIDELINES: [(&str, RangeInclusive<usize>); 5] = [
    ("P63", 40..=60),
    ("ALARM", 30..=40),
    ("P70", 30..=40),
    ("BURN_BABY_BURN", 20..=30),
    ("GUIDANCE_EQUATIONS", 15..=25),
];

fn critical_file(name: &str) -> Option<&'static CriticalFile> {
    CRITICAL_FILES.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFileRecord {
    pub name: String,
    pub line_count: u64,
    pub byte_size: u64,
    pub historical_rating: u8,
    pub technical_rating: u8,
}

impl SourceFileRecord {
    /// Record for ingested text. Known critical files get their default
    /// ratings; anything else is rated 1/1 until a manifest says otherwise.
    pub fn measured(name: &str, text: &str) -> Self {
        let (h, t) = critical_file(name)
            .map(|c| (c.historical_rating, c.technical_rating))
            .unwrap_or((1, 1));
        SourceFileRecord {
            name: name.to_string(),
            line_count: line_count(text) as u64,
            byte_size: text.len() as u64,
            historical_rating: h,
            technical_rating: t,
        }
    }

    pub fn is_critical(&self) -> bool {
        critical_file(&self.name).is_some()
    }

    pub fn qualifies_for_full_preservation(&self) -> bool {
        self.historical_rating >= 4 && self.technical_rating >= 4
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub id: String,
    pub source_file: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub note: String,
    /// Text is supplied inline rather than sliced out of `source_file`.
    #[serde(default)]
    pub curated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement_count: Option<usize>,
}

impl SectionSpec {
    pub fn line_count(&self) -> usize {
        line_count(&self.text)
    }

    /// The excerpt-length guideline for this section, if one applies.
    pub fn guideline(&self) -> Option<RangeInclusive<usize>> {
        SELECTION_GUIDELINES
            .iter()
            .find(|(id, _)| self.id == *id)
            .map(|(_, r)| r.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionManifest {
    pub files: Vec<SourceFileRecord>,
    pub sections: Vec<SectionSpec>,
    /// Size of the whole codebase the files were drawn from.
    #[serde(default = "default_total_bytes")]
    pub codebase_bytes: u64,
}

fn default_total_bytes() -> u64 {
    LUMINARY_TOTAL_BYTES
}

const CURATED_MANIFEST: &str = include_str!("../../assets/curated_manifest.json");

impl SelectionManifest {
    /// The shipped manifest: the five critical files with their published
    /// sizes and the four excerpts rendered by the reference viewer.
    pub fn curated() -> Self {
        serde_json::from_str(CURATED_MANIFEST).expect("shipped manifest parses")
    }

    pub fn curated_json() -> &'static str {
        CURATED_MANIFEST
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |msg: String| Err(CorpusError::InvalidManifest(msg));
        let mut names = HashSet::new();
        for f in &self.files {
            if !names.insert(f.name.as_str()) {
                return bad(format!("duplicate file `{}`", f.name));
            }
            for r in [f.historical_rating, f.technical_rating] {
                if !(1..=5).contains(&r) {
                    return bad(format!("rating {r} of `{}` outside 1..=5", f.name));
                }
            }
        }
        let mut ids = HashSet::new();
        for s in &self.sections {
            if s.id.is_empty() {
                return bad("section with empty id".into());
            }
            if !ids.insert(s.id.as_str()) {
                return bad(format!("duplicate section id `{}`", s.id));
            }
            if s.curated {
                if s.text.is_empty() {
                    return bad(format!("curated section `{}` has no text", s.id));
                }
            } else {
                if !names.contains(s.source_file.as_str()) {
                    return bad(format!(
                        "section `{}` names unknown file `{}`",
                        s.id, s.source_file
                    ));
                }
                if s.start_label.is_none() || s.statement_count.is_none() {
                    return bad(format!(
                        "section `{}` needs start_label and statement_count",
                        s.id
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&SourceFileRecord> {
        self.files.iter().find(|f| f.name == name)
    }

    /// Byte total of the critical files listed in the manifest.
    pub fn critical_bytes(&self) -> u64 {
        self.files.iter().map(|f| f.byte_size).sum()
    }
}

/// Text of a source file that was found on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSource {
    pub name: String,
    pub text: String,
}

/// A validated manifest whose sections all carry their text.
#[derive(Debug, Clone)]
pub struct Selection {
    pub manifest: SelectionManifest,
    pub sources: Vec<LoadedSource>,
}

impl Selection {
    pub fn curated() -> Self {
        Selection::new(SelectionManifest::curated(), Vec::new()).expect("shipped manifest valid")
    }

    /// Validates the manifest and slices every non-curated section out of
    /// its loaded source.
    pub fn new(
        mut manifest: SelectionManifest,
        sources: Vec<LoadedSource>,
    ) -> Result<Self, CorpusError> {
        manifest.validate()?;
        for src in &sources {
            if let Some(f) = manifest.files.iter_mut().find(|f| f.name == src.name) {
                f.line_count = line_count(&src.text) as u64;
                f.byte_size = src.text.len() as u64;
            }
        }
        for section in &mut manifest.sections {
            if section.curated {
                continue;
            }
            let src = sources
                .iter()
                .find(|s| s.name == section.source_file)
                .ok_or_else(|| CorpusError::MissingSection {
                    id: section.id.clone(),
                    detail: format!("source file `{}` not loaded", section.source_file),
                })?;
            *section = extract_section(&parse_agc_source(&src.text), section)?;
        }
        Ok(Selection { manifest, sources })
    }

    /// Reads a manifest and any listed file present next to it.
    pub fn load(manifest_path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(manifest_path).map_err(|source| CorpusError::Io {
            path: manifest_path.to_path_buf(),
            source,
        })?;
        let manifest =
            SelectionManifest::from_json(&text).map_err(|source| CorpusError::Json {
                path: manifest_path.to_path_buf(),
                source,
            })?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut sources = Vec::new();
        for f in &manifest.files {
            let path = base.join(&f.name);
            if path.is_file() {
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| CorpusError::Io { path, source })?;
                sources.push(LoadedSource {
                    name: f.name.clone(),
                    text,
                });
            }
        }
        Selection::new(manifest, sources)
    }

    /// Names of files rated for full preservation.
    pub fn full_preserve_files(&self) -> HashSet<&str> {
        self.manifest
            .files
            .iter()
            .filter(|f| f.qualifies_for_full_preservation())
            .map(|f| f.name.as_str())
            .collect()
    }

    /// Whether a section is kept verbatim by the hybrid strategy. Sections
    /// of files without a record count as expanded.
    pub fn is_expanded(&self, section: &SectionSpec) -> bool {
        match self.manifest.file(&section.source_file) {
            Some(f) => f.qualifies_for_full_preservation(),
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_size_arithmetic() {
        let lines: u64 = CRITICAL_FILES.iter().map(|c| c.line_count).sum();
        let bytes: u64 = CRITICAL_FILES.iter().map(|c| c.byte_size).sum();
        assert_eq!((lines, bytes), (2159, 83_500));
        assert_eq!(bytes + 1_426_500, LUMINARY_TOTAL_BYTES);
        assert_eq!(lines + 38_043, LUMINARY_TOTAL_LINES);
    }

    #[test]
    fn curated_manifest_is_valid() {
        let m = SelectionManifest::curated();
        m.validate().unwrap();
        assert_eq!(m.critical_bytes(), 83_500);
        let ids: Vec<_> = m.sections.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["P63", "IGNALG", "ALARM", "P70"]);
        let round = SelectionManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(round, m);
    }

    #[test]
    fn curated_ratings_follow_defaults() {
        let m = SelectionManifest::curated();
        for c in &CRITICAL_FILES {
            let f = m.file(c.name).unwrap();
            assert_eq!(
                (f.historical_rating, f.technical_rating),
                (c.historical_rating, c.technical_rating)
            );
        }
        let sel = Selection::curated();
        let expanded: Vec<_> = m
            .sections
            .iter()
            .filter(|s| sel.is_expanded(s))
            .map(|s| s.id.as_str())
            .collect();
        assert_eq!(expanded, ["P63", "IGNALG", "ALARM", "P70"]);

        let mut m = SelectionManifest::curated();
        m.files[4].technical_rating = 3;
        let sel = Selection::new(m, Vec::new()).unwrap();
        let alarm = &sel.manifest.sections[2];
        assert_eq!(alarm.source_file, "ALARM_AND_ABORT.agc");
        assert!(!sel.is_expanded(alarm));
    }

    #[test]
    fn validation_rejects_bad_manifests() {
        let mut m = SelectionManifest::curated();
        m.sections.push(m.sections[0].clone());
        assert!(m.validate().is_err());

        let mut m = SelectionManifest::curated();
        m.files[0].historical_rating = 6;
        assert!(m.validate().is_err());

        let mut m = SelectionManifest::curated();
        m.sections[0].curated = false;
        m.sections[0].source_file = "NOPE.agc".into();
        assert!(m.validate().is_err());
    }

    #[test]
    fn section_must_be_loadable() {
        let mut m = SelectionManifest::curated();
        m.sections[0].curated = false;
        m.sections[0].start_label = Some("P63LM".into());
        m.sections[0].statement_count = Some(2);
        assert!(matches!(
            Selection::new(m.clone(), Vec::new()),
            Err(CorpusError::MissingSection { .. })
        ));
        let src = LoadedSource {
            name: m.sections[0].source_file.clone(),
            text: "# x\nP63LM TC PHASCHNG\nTC BANKCALL\nTC Y\n".into(),
        };
        let sel = Selection::new(m, vec![src]).unwrap();
        assert_eq!(sel.manifest.sections[0].text, "P63LM TC PHASCHNG\nTC BANKCALL");
        // on-disk sizes replace the published ones
        assert_eq!(sel.manifest.files[0].byte_size, 39);
        assert_eq!(sel.manifest.files[0].line_count, 4);
    }

    #[test]
    fn guidelines() {
        let m = SelectionManifest::curated();
        assert_eq!(m.sections[0].guideline(), Some(40..=60));
        assert_eq!(m.sections[1].guideline(), None);
    }
}
