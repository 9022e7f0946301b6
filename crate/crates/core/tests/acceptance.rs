//! Acceptance gate: one PASS/FAIL line per primary criterion, non-zero exit
//! if any fails. Runs without the test harness so the lines always print.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};
use relicpress::cli;
use relicpress::codec::{
    compress, compression_ratio, decode_binary, detokenize, encode_binary, run_strategy,
    selection_codebook, tokenize, Codebook, Strategy, TokenDictionary, DEFAULT_MNEMONICS,
    WORD_BITS,
};
use relicpress::corpus::{AgcStatement, Selection};
use relicpress::payload::{
    build_payload, extract, rendered_blocks, PayloadMode, GOLDEN_SECTIONS,
};
use relicpress::qr::{
    byte_capacity, capacity_table, decode_symbol, encode_symbol, select_version, EccLevel,
    QrSymbolSpec,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

fn hybrid_size() -> Outcome {
    let start = Instant::now();
    let sel = Selection::curated();
    let dict = TokenDictionary::default();
    let book = selection_codebook(&sel).map_err(|e| e.to_string())?;
    let out = run_strategy(Strategy::Hybrid, &sel, &dict, &book).map_err(|e| e.to_string())?;
    let a = build_payload(&out, &dict, PayloadMode::RawHtml).map_err(|e| e.to_string())?;
    let t = within(start, Duration::from_secs(1))?;
    ensure(a.total_bytes <= 1600, || format!("{} bytes", a.total_bytes))?;
    Ok(format!("{} bytes in {t:.1?}", a.total_bytes))
}

fn three_kb_gate() -> Outcome {
    let sel = Selection::curated();
    let dict = TokenDictionary::default();
    let book = selection_codebook(&sel).map_err(|e| e.to_string())?;
    let cap = byte_capacity(40, EccLevel::L);
    let mut sizes = Vec::new();
    for s in Strategy::ALL {
        let out = run_strategy(s, &sel, &dict, &book).map_err(|e| e.to_string())?;
        for mode in [PayloadMode::RawHtml, PayloadMode::DataUri] {
            let a = build_payload(&out, &dict, mode).map_err(|e| format!("{}: {e}", s.name()))?;
            ensure(a.total_bytes <= cap, || format!("{} {mode:?}: {}", s.name(), a.total_bytes))?;
            sizes.push(format!("{}/{}={}", s.flag(), mode.flag(), a.total_bytes));
        }
    }
    Ok(format!("cap {cap}: {}", sizes.join(" ")))
}

fn ratio_arithmetic() -> Outcome {
    let r = compression_ratio(83_500, 3072).to_string();
    ensure(r == "27:1", || format!("got {r}"))?;
    let mut out = Vec::new();
    let code = cli::run(["relicpress", "report"], &mut out, &mut std::io::sink());
    ensure(code == 0, || format!("report exited {code}"))?;
    let text = String::from_utf8_lossy(&out);
    let header: Vec<&str> = text.lines().next().unwrap_or_default().split('\t').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (d, c) = (col("published_derived").ok_or("no derived column")?, col("consistent?").ok_or("no consistent? column")?);
    let rows: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[d].to_string(), f[c].to_string())
        })
        .collect();
    let flags: Vec<&str> = rows.iter().map(|r| r.1.as_str()).collect();
    ensure(rows.first().map(|r| r.0.as_str()) == Some("27:1"), || format!("{rows:?}"))?;
    ensure(flags == ["yes", "no", "no"], || format!("flags {flags:?}"))?;
    Ok("83500/3072 → 27:1; 22:1 and 15:1 flagged non-derivable".into())
}

fn random_text(rng: &mut StdRng) -> String {
    const OTHER: [&str; 10] = ["~", "~~", "~a", "a", "N", "Z", "04024", "LEGAL?", "ünï", "\u{1F680}"];
    const SEPS: [&str; 7] = [" ", "\t", "\n", "\r\n", "\x0c", "\x0b", "   "];
    let mut s = String::new();
    for _ in 0..rng.gen_range(0..30) {
        match rng.gen_range(0..3) {
            0 => s.push_str(DEFAULT_MNEMONICS[rng.gen_range(0..DEFAULT_MNEMONICS.len())]),
            1 => s.push_str(OTHER[rng.gen_range(0..OTHER.len())]),
            _ => s.extend((0..rng.gen_range(1..6)).map(|_| char::from(rng.gen_range(0x21u8..0x7f)))),
        }
        s.push_str(SEPS[rng.gen_range(0..SEPS.len())]);
    }
    s
}

fn tokenization_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let dict = TokenDictionary::default();
    for i in 0..10_000 {
        let s = random_text(&mut rng);
        let back = detokenize(&tokenize(&s, &dict), &dict).map_err(|e| format!("case {i}: {e}"))?;
        ensure(back == s, || format!("case {i}: {s:?}"))?;
    }
    for s in &Selection::curated().manifest.sections {
        let back = detokenize(&tokenize(&s.text, &dict), &dict).map_err(|e| e.to_string())?;
        ensure(back == s.text, || format!("section {}", s.id))?;
    }
    let t = within(start, Duration::from_secs(5))?;
    Ok(format!("10000 random + 4 curated in {t:.1?}"))
}

fn binary_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let field = |rng: &mut StdRng| -> String {
        (0..rng.gen_range(1..7))
            .map(|_| char::from(b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789+-?"[rng.gen_range(0..39)]))
            .collect()
    };
    let mut total_words = 0;
    for case in 0..1000 {
        let statements: Vec<AgcStatement> = (0..rng.gen_range(0..40))
            .map(|i| {
                let label = rng.gen_bool(0.3).then(|| field(&mut rng));
                let op = if rng.gen_bool(0.8) {
                    DEFAULT_MNEMONICS[rng.gen_range(0..DEFAULT_MNEMONICS.len())].to_string()
                } else {
                    field(&mut rng)
                };
                let ops: Vec<String> = (0..rng.gen_range(0..4)).map(|_| field(&mut rng)).collect();
                let refs: Vec<&str> = ops.iter().map(String::as_str).collect();
                AgcStatement::instruction(i + 1, label.as_deref(), &op, &refs)
            })
            .collect();
        let book = Codebook::build(&statements).map_err(|e| format!("case {case}: {e}"))?;
        let bits = encode_binary(&statements, &book).map_err(|e| format!("case {case}: {e}"))?;
        let words: usize = statements
            .iter()
            .map(|s| {
                let inline = book.opcodes().contains(&s.opcode) && !s.operands.is_empty();
                usize::from(s.label.is_some()) + 1 + s.operands.len() - usize::from(inline)
            })
            .sum();
        ensure(bits.bit_length() == WORD_BITS * words, || {
            format!("case {case}: {} bits for {words} words", bits.bit_length())
        })?;
        let back = decode_binary(&bits, &book).map_err(|e| format!("case {case}: {e}"))?;
        ensure(back == statements, || format!("case {case} differs"))?;
        total_words += words;
    }
    Ok(format!("1000 lists, {total_words} words"))
}

fn deflate_interop() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    for case in 0..100 {
        let len = rng.gen_range(0..8192);
        let data: Vec<u8> = if case % 2 == 0 {
            (0..len).map(|_| rng.gen()).collect()
        } else {
            random_text(&mut rng).into_bytes()
        };
        let blob = compress(&data);
        let mut back = Vec::new();
        libflate::deflate::Decoder::new(&blob.data[..])
            .read_to_end(&mut back)
            .map_err(|e| format!("case {case}: {e}"))?;
        ensure(back == data, || format!("case {case} differs"))?;
    }
    Ok("100 blobs inflate identically under libflate".into())
}

fn qr_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let versions = [1u8, 7, 10, 25, 40];
    let mut n = 0;
    let mut cross_checked = 0;
    while n < 1000 {
        let version = versions[n % versions.len()];
        let ecc = EccLevel::ALL[(n / versions.len()) % 4];
        let cap = byte_capacity(version, ecc);
        let len = if n % 50 < 2 { [0, cap][n % 2] } else { rng.gen_range(0..=cap) };
        let payload: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let m = encode_symbol(&payload, &QrSymbolSpec::new(version, ecc)).map_err(|e| e.to_string())?;
        ensure(m.size() == 17 + 4 * usize::from(version), || format!("size {}", m.size()))?;
        let back = decode_symbol(&m).map_err(|e| format!("{version}-{ecc}: {e}"))?;
        ensure(back == payload, || format!("{version}-{ecc} len {len} differs"))?;
        if n % 100 == 0 && version <= 10 {
            let grid = rqrr::SimpleGrid::from_func(m.size(), |x, y| m.get(x, y));
            let mut other = Vec::new();
            rqrr::Grid::new(grid)
                .decode_to(&mut other)
                .map_err(|e| format!("independent decoder, {version}-{ecc}: {e}"))?;
            ensure(other == payload, || format!("independent decoder disagrees at {version}-{ecc}"))?;
            cross_checked += 1;
        }
        n += 1;
    }
    let v25 = encode_symbol(b"x", &QrSymbolSpec::new(25, EccLevel::L)).map_err(|e| e.to_string())?;
    ensure(v25.size() == 117, || format!("v25 is {}", v25.size()))?;
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("1000 payloads over 20 cells in {t:.1?}; {cross_checked} cross-checked; v25 117×117"))
}

fn capacity_table_check() -> Outcome {
    let table = capacity_table();
    ensure(table.len() == 160, || format!("{} cells", table.len()))?;
    for e in EccLevel::ALL {
        let caps: Vec<usize> = table.iter().filter(|c| c.1 == e).map(|c| c.2).collect();
        ensure(caps.windows(2).all(|w| w[0] < w[1]), || format!("{e} not increasing"))?;
    }
    for v in 1..=40 {
        let caps: Vec<usize> = EccLevel::ALL.iter().map(|&e| byte_capacity(v, e)).collect();
        ensure(caps.windows(2).all(|w| w[0] >= w[1]), || format!("v{v} not ordered by level"))?;
    }
    ensure(select_version(2953, EccLevel::L) == Ok(40), || "2953 not version 40".into())?;
    ensure(select_version(2954, EccLevel::L).is_err(), || "2954 accepted".into())?;
    Ok("160 cells monotone; 2953 → v40, 2954 rejected".into())
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path().to_str().ok_or("temp path not UTF-8")?.to_string();
    let run = |args: &[&str]| {
        let mut argv = vec!["relicpress"];
        argv.extend_from_slice(args);
        cli::run(argv, &mut std::io::sink(), &mut std::io::sink())
    };
    ensure(run(&["build", "--out", &dir]) == 0, || "build failed".into())?;
    ensure(run(&["verify", &dir]) == 0, || "verify of a fresh build failed".into())?;
    let path = tmp.path().join("payload.html");
    let original = std::fs::read(&path).map_err(|e| e.to_string())?;
    for i in 0..original.len() {
        let mut tampered = original.clone();
        tampered[i] ^= 0x01;
        std::fs::write(&path, &tampered).map_err(|e| e.to_string())?;
        let code = run(&["verify", &dir]);
        ensure(code == 1, || format!("flip at byte {i} gave exit {code}"))?;
    }
    std::fs::write(&path, &original).map_err(|e| e.to_string())?;
    ensure(run(&["verify", &dir]) == 0, || "restored payload fails".into())?;
    Ok(format!("build+verify exit 0; all {} single-byte flips exit 1", original.len()))
}

fn golden_output() -> Outcome {
    let sel = Selection::curated();
    let dict = TokenDictionary::default();
    let book = selection_codebook(&sel).map_err(|e| e.to_string())?;
    let out = run_strategy(Strategy::Hybrid, &sel, &dict, &book).map_err(|e| e.to_string())?;
    let a = build_payload(&out, &dict, PayloadMode::RawHtml).map_err(|e| e.to_string())?;
    let ex = extract(&a.html, Strategy::Hybrid).map_err(|e| e.to_string())?;
    let blocks = rendered_blocks(&ex.rendered);
    for (id, text) in GOLDEN_SECTIONS {
        let body = blocks.iter().find(|b| b.0 == id).ok_or(format!("{id} missing"))?;
        ensure(body.1 == text, || format!("{id} differs"))?;
    }
    Ok("P63, IGNALG, ALARM, P70 byte-for-byte".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hybrid payload <= 1600 bytes", hybrid_size),
        ("every strategy fits 40-L", three_kb_gate),
        ("ratio arithmetic and consistency flags", ratio_arithmetic),
        ("tokenization round trip", tokenization_round_trip),
        ("binary codec round trip", binary_round_trip),
        ("deflate interop", deflate_interop),
        ("qr round trip", qr_round_trip),
        ("capacity table", capacity_table_check),
        ("build/verify end to end", end_to_end),
        ("golden section output", golden_output),
    ];
    let mut failed = 0;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (name, check) in criteria {
        let line = match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => format!("PASS  {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                format!("FAIL  {name}: {detail}")
            }
            Err(_) => {
                failed += 1;
                format!("FAIL  {name}: panicked")
            }
        };
        writeln!(out, "{line}").ok();
    }
    writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed).ok();
    if failed > 0 {
        std::process::exit(1);
    }
}
