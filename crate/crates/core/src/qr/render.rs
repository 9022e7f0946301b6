//! Image output. The canonical PGM is binary P5: header
//! `P5\n<w> <h>\n255\n`, then one byte per pixel row-major, 0 for dark and
//! 255 for light. The reader also accepts plain P2 and header comments.

use std::fmt::Write as _;

use super::{QrError, QrMatrix, QrSymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Svg,
    Pgm,
}

pub fn render(matrix: &QrMatrix, spec: &QrSymbolSpec, format: RenderFormat) -> Vec<u8> {
    match format {
        RenderFormat::Svg => render_svg(matrix, spec).into_bytes(),
        RenderFormat::Pgm => render_pgm(matrix, spec),
    }
}

fn render_svg(m: &QrMatrix, spec: &QrSymbolSpec) -> String {
    let q = spec.quiet_zone;
    let modules = m.size() + 2 * q;
    let px = modules * spec.module_px;
    let mut path = String::new();
    for y in 0..m.size() {
        let mut x = 0;
        while x < m.size() {
            if !m.get(x, y) {
                x += 1;
                continue;
            }
            let start = x;
            while x < m.size() && m.get(x, y) {
                x += 1;
            }
            let run = x - start;
            write!(path, "M{},{}h{run}v1h-{run}z", start + q, y + q).expect("string write");
        }
    }
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{px}\" height=\"{px}\" \
         viewBox=\"0 0 {modules} {modules}\" shape-rendering=\"crispEdges\">\n\
         <rect width=\"{modules}\" height=\"{modules}\" fill=\"#fff\"/>\n\
         <path fill=\"#000\" d=\"{path}\"/>\n\
         </svg>\n"
    )
}

fn render_pgm(m: &QrMatrix, spec: &QrSymbolSpec) -> Vec<u8> {
    let q = spec.quiet_zone;
    let px = spec.module_px;
    let side = (m.size() + 2 * q) * px;
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.reserve(side * side);
    for py in 0..side {
        let my = (py / px).checked_sub(q).filter(|&y| y < m.size());
        for pxl in 0..side {
            let mx = (pxl / px).checked_sub(q).filter(|&x| x < m.size());
            let dark = matches!((mx, my), (Some(x), Some(y)) if m.get(x, y));
            out.push(if dark { 0 } else { 255 });
        }
    }
    out
}

/// Grey image: width, height, and one sample per pixel scaled to 0..=255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreyImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GreyImage {
    fn dark(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x] < 128
    }
}

fn bad(msg: impl Into<String>) -> QrError {
    QrError::BadImage(msg.into())
}

/// Splits header tokens off a PGM, skipping `#` comments; returns the
/// tokens and the offset just past the single whitespace after the last.
fn header_tokens(bytes: &[u8], wanted: usize) -> Result<(Vec<String>, usize), QrError> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < wanted {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(bad("truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GreyImage, QrError> {
    let (tokens, body) = header_tokens(bytes, 4)?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad header field `{s}`")));
    let (width, height, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
    if !(1..=255).contains(&maxval) {
        return Err(bad(format!("unsupported maxval {maxval}")));
    }
    let n = width * height;
    let raw: Vec<usize> = match tokens[0].as_str() {
        "P5" => {
            let data = bytes.get(body..body + n).ok_or_else(|| bad("truncated raster"))?;
            data.iter().map(|&b| usize::from(b)).collect()
        }
        "P2" => {
            let text = std::str::from_utf8(bytes.get(body.min(bytes.len())..).unwrap_or_default())
                .map_err(|_| bad("non-ASCII raster"))?;
            let vals = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or_default())
                .flat_map(str::split_ascii_whitespace)
                .take(n)
                .map(num)
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() < n {
                return Err(bad("truncated raster"));
            }
            vals
        }
        magic => return Err(bad(format!("unsupported magic `{magic}`"))),
    };
    if raw.iter().any(|&v| v > maxval) {
        return Err(bad("sample above maxval"));
    }
    let pixels = raw.into_iter().map(|v| (v * 255 / maxval) as u8).collect();
    Ok(GreyImage {
        width,
        height,
        pixels,
    })
}

/// Recovers the module grid from a rendered PGM. Module size and quiet zone
/// are inferred from the top edge of the top-left finder, which is seven
/// modules wide.
pub fn sample_pgm(bytes: &[u8]) -> Result<QrMatrix, QrError> {
    let img = parse_pgm(bytes)?;
    if img.width != img.height {
        return Err(bad(format!("{}×{} image is not square", img.width, img.height)));
    }
    let (x0, y0) = (0..img.height)
        .flat_map(|y| (0..img.width).map(move |x| (x, y)))
        .find(|&(x, y)| img.dark(x, y))
        .ok_or_else(|| bad("no dark pixels"))?;
    if x0 != y0 {
        return Err(bad("finder corner is off the diagonal"));
    }
    let run = (x0..img.width).take_while(|&x| img.dark(x, y0)).count();
    if run % 7 != 0 {
        return Err(bad(format!("finder edge of {run} px is not seven modules")));
    }
    let px = run / 7;
    let inner = img.width - 2 * x0;
    if inner % px != 0 {
        return Err(bad("symbol width is not a whole number of modules"));
    }
    let size = inner / px;
    let modules = (0..size)
        .flat_map(|my| (0..size).map(move |mx| (mx, my)))
        .map(|(mx, my)| img.dark(x0 + mx * px + px / 2, y0 + my * px + px / 2))
        .collect();
    QrMatrix::from_modules(size, modules).ok_or_else(|| bad("grid size mismatch"))
}
