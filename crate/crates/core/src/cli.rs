//! `relicpress` subcommands. Every table goes out as TSV.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 payload over budget or QR capacity.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::codec::{
    compare_strategies, compression_ratio, run_strategy, selection_codebook, Strategy,
    StrategyResult, TokenDictionary, PUBLISHED_ROWS,
};
use crate::corpus::{scan_dir, Selection, CRITICAL_FILES};
use crate::payload::{
    budget_tsv, build_payload, decode_data_uri, extract, rendered_blocks, PayloadError,
    PayloadMode, GOLDEN_SECTIONS,
};
use crate::qr::{
    byte_capacity, decode_symbol, encode_symbol, render, sample_pgm, select_version, EccLevel,
    QrMatrix, QrSymbolSpec, RenderFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub const PAYLOAD_HTML: &str = "payload.html";
pub const PAYLOAD_URI: &str = "payload.uri";
pub const QR_SVG: &str = "qr.svg";
pub const QR_PGM: &str = "qr.pgm";
pub const REPORT_TSV: &str = "report.tsv";

/// Value of the `manifest` report column for the built-in selection.
const CURATED: &str = "curated";

#[derive(Debug, Parser)]
#[command(name = "relicpress", version, about = "Pack AGC source excerpts into a single QR symbol")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Line and byte counts for every .agc file in a directory.
    Analyze { dir: PathBuf },
    /// Build payload.html, qr.svg, qr.pgm and report.tsv.
    Build(RunConfig),
    /// Re-decode a build directory and check every artifact.
    Verify { dir: PathBuf },
    /// Compare the three strategies against the published figures.
    Report {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    /// Selection manifest; the built-in curated selection when omitted.
    #[arg(long = "manifest")]
    pub manifest_path: Option<PathBuf>,
    #[arg(long, default_value = "hybrid", value_parser = parse_strategy)]
    pub strategy: Strategy,
    #[arg(long, default_value = "L")]
    pub ecc: EccLevel,
    #[arg(long, default_value = "html")]
    pub mode: PayloadMode,
    #[arg(long = "out")]
    pub out_dir: PathBuf,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s {
        "binary" => Ok(Strategy::FullBinary),
        "token" => Ok(Strategy::TokenizedText),
        "hybrid" => Ok(Strategy::Hybrid),
        _ => Err(format!("unknown strategy `{s}` (expected binary, token or hybrid)")),
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BUDGET,
            message: message.into(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version also arrive here, on stdout.
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Analyze { dir } => cmd_analyze(&dir, out, err),
        Command::Build(config) => cmd_build(&config, out),
        Command::Verify { dir } => cmd_verify(&dir, out),
        Command::Report { manifest } => cmd_report(manifest.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::usage(format!("{}: {e}", path.display()))
}

fn load_selection(manifest: Option<&Path>) -> Result<Selection, Failure> {
    match manifest {
        None => Ok(Selection::curated()),
        Some(path) => Selection::load(path).map_err(|e| Failure::usage(e.to_string())),
    }
}

fn cmd_analyze(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if !dir.is_dir() {
        return Err(Failure::usage(format!("{} is not a directory", dir.display())));
    }
    let scan = scan_dir(dir).map_err(|e| Failure::usage(e.to_string()))?;
    let mut tsv = String::from("name\tlines\tbytes\n");
    for r in &scan.records {
        writeln!(tsv, "{}\t{}\t{}", r.name, r.line_count, r.byte_size).expect("string write");
    }
    writeln!(tsv, "critical_subtotal\t{}\t{}", scan.critical.line_count, scan.critical.byte_size)
        .expect("string write");
    writeln!(tsv, "total\t{}\t{}", scan.total.line_count, scan.total.byte_size)
        .expect("string write");
    out.write_all(tsv.as_bytes()).map_err(|e| io_failure(dir, e))?;
    for e in &scan.errors {
        let _ = writeln!(err, "skipped {}: {}", e.name, e.reason);
    }
    Ok(EXIT_OK)
}

const REPORT_HEADER: &str = "strategy\tmode\tecc\tqr_version\tqr_size\tpayload_bytes\tcompressed_size\tsource_bytes\tverbatim_bytes\tratio\tpct_critical\tpct_total\tmanifest";

fn pct(f: f64) -> String {
    format!("{:.2}", 100.0 * f)
}

fn cmd_build(config: &RunConfig, out: &mut dyn Write) -> Outcome {
    let selection = load_selection(config.manifest_path.as_deref())?;
    let dict = TokenDictionary::default();
    let book = selection_codebook(&selection).map_err(|e| Failure::usage(e.to_string()))?;
    let output = run_strategy(config.strategy, &selection, &dict, &book)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let artifact = build_payload(&output, &dict, config.mode).map_err(|e| match e {
        PayloadError::BudgetExceeded { .. } => Failure::budget(e.to_string()),
        other => Failure::usage(other.to_string()),
    })?;
    let version =
        select_version(artifact.total_bytes, config.ecc).map_err(|e| Failure::budget(e.to_string()))?;
    let spec = QrSymbolSpec::new(version, config.ecc);
    let matrix = encode_symbol(&artifact.html, &spec).map_err(|e| Failure::budget(e.to_string()))?;

    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| io_failure(&path, e))
    };
    let document = artifact.document().map_err(|e| Failure::usage(e.to_string()))?;
    write(PAYLOAD_HTML, &document)?;
    if config.mode == PayloadMode::DataUri {
        write(PAYLOAD_URI, &artifact.html)?;
    }
    write(QR_SVG, &render(&matrix, &spec, RenderFormat::Svg))?;
    write(QR_PGM, &render(&matrix, &spec, RenderFormat::Pgm))?;

    let r = &output.result;
    let manifest = config
        .manifest_path
        .as_ref()
        .map_or_else(|| CURATED.to_string(), |p| p.display().to_string());
    let report = format!(
        "{REPORT_HEADER}\n{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        config.strategy.flag(),
        config.mode.flag(),
        config.ecc,
        version,
        matrix.size(),
        artifact.total_bytes,
        r.compressed_size,
        r.source_bytes,
        r.verbatim_bytes,
        r.ratio,
        pct(r.pct_critical_preserved),
        pct(r.pct_total),
        manifest,
    );
    write(REPORT_TSV, report.as_bytes())?;

    let mut summary = report;
    summary.push('\n');
    summary.push_str(&budget_tsv(&artifact));
    out.write_all(summary.as_bytes()).map_err(|e| io_failure(dir, e))?;
    Ok(EXIT_OK)
}

/// Fields of a build report that verification relies on.
#[derive(Debug)]
struct BuildReport {
    strategy: Strategy,
    mode: PayloadMode,
    ecc: EccLevel,
    version: u8,
    manifest: String,
}

fn parse_report(text: &str) -> Result<BuildReport, String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty report")?.split('\t').collect();
    let row: Vec<&str> = lines.next().ok_or("report has no data row")?.split('\t').collect();
    let field = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .and_then(|i| row.get(i).copied())
            .ok_or_else(|| format!("report lacks `{name}`"))
    };
    Ok(BuildReport {
        strategy: parse_strategy(field("strategy")?)?,
        mode: field("mode")?.parse()?,
        ecc: field("ecc")?.parse()?,
        version: field("qr_version")?
            .parse()
            .map_err(|_| "bad qr_version".to_string())?,
        manifest: field("manifest")?.to_string(),
    })
}

/// Offset of the first differing byte, or the shorter length.
fn first_difference(a: &[u8], b: &[u8]) -> usize {
    a.iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .unwrap_or(a.len().min(b.len()))
}

struct Checks<'a> {
    out: &'a mut dyn Write,
    failed: usize,
}

impl Checks<'_> {
    fn record(&mut self, name: &str, result: Result<String, String>) {
        let line = match result {
            Ok(detail) => format!("PASS\t{name}\t{detail}"),
            Err(detail) => {
                self.failed += 1;
                format!("FAIL\t{name}\t{detail}")
            }
        };
        let _ = writeln!(self.out, "{line}");
    }
}

fn read_artifact(dir: &Path, name: &str) -> Result<Vec<u8>, String> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(format!("MissingArtifact: {}", path.display()));
    }
    std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))
}

fn check_golden(rendered: &str, core: &str, strategy: Strategy) -> Result<String, String> {
    match strategy {
        Strategy::FullBinary => {
            for (id, text) in GOLDEN_SECTIONS {
                if !core.contains(text) {
                    return Err(format!("{id} lines missing from the decoded core"));
                }
            }
        }
        Strategy::TokenizedText | Strategy::Hybrid => {
            let blocks = rendered_blocks(rendered);
            for (id, text) in GOLDEN_SECTIONS {
                match blocks.iter().find(|(b, _)| b == id) {
                    None => return Err(format!("block {id} missing")),
                    Some((_, body)) if body != text => {
                        let at = first_difference(body.as_bytes(), text.as_bytes());
                        return Err(format!("block {id} differs at byte {at}"));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(format!("{} sections match", GOLDEN_SECTIONS.len()))
}

fn cmd_verify(dir: &Path, out: &mut dyn Write) -> Outcome {
    let mut checks = Checks { out, failed: 0 };

    let report = read_artifact(dir, REPORT_TSV).and_then(|b| {
        parse_report(&String::from_utf8_lossy(&b)).map_err(|e| format!("{REPORT_TSV}: {e}"))
    });
    let html = read_artifact(dir, PAYLOAD_HTML);
    let pgm = read_artifact(dir, QR_PGM);
    let svg = read_artifact(dir, QR_SVG);
    checks.record("report", report.as_ref().map(|r| format!("strategy {}", r.strategy.flag())).map_err(Clone::clone));
    checks.record("payload.html", html.as_ref().map(|h| format!("{} bytes", h.len())).map_err(Clone::clone));
    checks.record("qr.svg", svg.as_ref().map(|s| format!("{} bytes", s.len())).map_err(Clone::clone));

    let matrix: Result<QrMatrix, String> = pgm.and_then(|p| sample_pgm(&p).map_err(|e| e.to_string()));
    let (Ok(report), Ok(html)) = (report, html) else {
        checks.record("qr.pgm", matrix.map(|m| format!("{}×{} modules", m.size(), m.size())));
        return Ok(EXIT_VERIFY);
    };

    // What the symbol should carry.
    let carried = match report.mode {
        PayloadMode::RawHtml => Ok(html.clone()),
        PayloadMode::DataUri => read_artifact(dir, PAYLOAD_URI),
    };
    if report.mode == PayloadMode::DataUri {
        checks.record(
            "data-uri",
            carried.clone().and_then(|uri| match decode_data_uri(&uri) {
                Ok(doc) if doc == html => Ok("decodes to payload.html".into()),
                Ok(doc) => Err(format!("differs from payload.html at byte {}", first_difference(&doc, &html))),
                Err(e) => Err(e.to_string()),
            }),
        );
    }

    checks.record(
        "qr-decode",
        matrix.and_then(|m| {
            let expected = carried?;
            if m.version() != Some(report.version) {
                return Err(format!(
                    "symbol is version {:?}, report says {}",
                    m.version(),
                    report.version
                ));
            }
            let decoded = decode_symbol(&m).map_err(|e| e.to_string())?;
            if decoded != expected {
                return Err(format!(
                    "payload differs at byte {} ({} decoded, {} on disk)",
                    first_difference(&decoded, &expected),
                    decoded.len(),
                    expected.len()
                ));
            }
            let cap = byte_capacity(report.version, report.ecc);
            if decoded.len() > cap {
                return Err(format!("{} bytes over capacity {cap}", decoded.len()));
            }
            Ok(format!("{} bytes, version {}-{}", decoded.len(), report.version, report.ecc))
        }),
    );

    match extract(&html, report.strategy) {
        Err(e) => checks.record("extract", Err(e.to_string())),
        Ok(ex) => {
            checks.record("extract", Ok(format!("{} rendered bytes", ex.rendered.len())));
            if report.manifest == CURATED {
                checks.record("golden", check_golden(&ex.rendered, &ex.core, report.strategy));
            } else {
                checks.record("golden", Ok("skipped: custom manifest".into()));
            }
        }
    }

    Ok(if checks.failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}

const COMPARISON_HEADER: &str = "strategy\tcompressed_size\tpayload_bytes\tsource_bytes\tratio\tcritical_ratio\tpct_critical\tpct_total\tpublished_size\tpublished_ratio\tpublished_derived\tconsistent?";

fn published_subtotal() -> u64 {
    CRITICAL_FILES.iter().map(|c| c.byte_size).sum()
}

/// Strategy comparison rows with payload sizes and the published figures
/// alongside.
pub fn comparison_tsv(selection: &Selection) -> Result<String, String> {
    let dict = TokenDictionary::default();
    let book = selection_codebook(selection).map_err(|e| e.to_string())?;
    let results: Vec<StrategyResult> =
        compare_strategies(selection, &dict, &book).map_err(|e| e.to_string())?;
    let critical = selection.manifest.critical_bytes();
    let published = published_subtotal();

    let mut tsv = format!("{COMPARISON_HEADER}\n");
    for r in &results {
        let output = run_strategy(r.strategy, selection, &dict, &book).map_err(|e| e.to_string())?;
        let payload = build_payload(&output, &dict, PayloadMode::RawHtml)
            .map(|a| a.total_bytes.to_string())
            .unwrap_or_else(|e| format!("over budget: {e}"));
        let row = PUBLISHED_ROWS
            .iter()
            .find(|p| p.strategy == r.strategy)
            .expect("one published row per strategy");
        writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.strategy.name(),
            r.compressed_size,
            payload,
            r.source_bytes,
            r.ratio,
            compression_ratio(critical, r.compressed_size as u64),
            pct(r.pct_critical_preserved),
            pct(r.pct_total),
            row.compressed_size,
            row.ratio,
            row.derived_ratio(published),
            if row.is_consistent(published) { "yes" } else { "no" },
        )
        .expect("string write");
    }
    Ok(tsv)
}

fn cmd_report(manifest: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let selection = load_selection(manifest)?;
    let tsv = comparison_tsv(&selection).map_err(Failure::usage)?;
    out.write_all(tsv.as_bytes())
        .map_err(|e| Failure::usage(e.to_string()))?;
    Ok(EXIT_OK)
}

/// Entry point for the binary.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
