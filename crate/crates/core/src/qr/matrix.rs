use super::tables::{alignment_positions, symbol_size, MAX_VERSION, MIN_VERSION};
use super::EccLevel;

/// Square grid of modules; `true` is dark.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QrMatrix {
    size: usize,
    modules: Vec<bool>,
}

impl QrMatrix {
    pub fn new_light(size: usize) -> Self {
        QrMatrix {
            size,
            modules: vec![false; size * size],
        }
    }

    pub fn from_modules(size: usize, modules: Vec<bool>) -> Option<Self> {
        (modules.len() == size * size).then_some(QrMatrix { size, modules })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Version implied by the size, if it is a valid symbol size.
    pub fn version(&self) -> Option<u8> {
        if self.size < 21 || (self.size - 17) % 4 != 0 {
            return None;
        }
        let v = (self.size - 17) / 4;
        u8::try_from(v)
            .ok()
            .filter(|v| (MIN_VERSION..=MAX_VERSION).contains(v))
    }

    /// Module at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.modules[y * self.size + x]
    }

    pub fn set(&mut self, x: usize, y: usize, dark: bool) {
        self.modules[y * self.size + x] = dark;
    }

    pub fn flip(&mut self, x: usize, y: usize) {
        let m = &mut self.modules[y * self.size + x];
        *m = !*m;
    }

    pub fn modules(&self) -> &[bool] {
        &self.modules
    }

    pub fn dark_count(&self) -> usize {
        self.modules.iter().filter(|&&m| m).count()
    }

    /// Text rendering, `#` for dark and `.` for light, one row per line.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity(self.size * (self.size + 1));
        for y in 0..self.size {
            for x in 0..self.size {
                s.push(if self.get(x, y) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

/// Function patterns of a version drawn onto a light grid, plus the map of
/// which modules they occupy.
pub(crate) struct FunctionLayout {
    pub version: u8,
    pub base: QrMatrix,
    pub reserved: Vec<bool>,
}

impl FunctionLayout {
    pub fn new(version: u8) -> Self {
        let size = symbol_size(version);
        let mut layout = FunctionLayout {
            version,
            base: QrMatrix::new_light(size),
            reserved: vec![false; size * size],
        };
        layout.draw();
        layout
    }

    pub fn size(&self) -> usize {
        self.base.size
    }

    pub fn is_function(&self, x: usize, y: usize) -> bool {
        self.reserved[y * self.base.size + x]
    }

    fn put(&mut self, x: usize, y: usize, dark: bool) {
        self.base.set(x, y, dark);
        self.reserved[y * self.base.size + x] = true;
    }

    fn draw(&mut self) {
        let size = self.size();
        for i in 0..size {
            self.put(6, i, i % 2 == 0);
            self.put(i, 6, i % 2 == 0);
        }
        self.finder(3, 3);
        self.finder(size - 4, 3);
        self.finder(3, size - 4);

        let align = alignment_positions(self.version);
        let last = align.len().saturating_sub(1);
        for (i, &cx) in align.iter().enumerate() {
            for (j, &cy) in align.iter().enumerate() {
                let overlaps_finder =
                    (i == 0 && j == 0) || (i == 0 && j == last) || (i == last && j == 0);
                if !overlaps_finder {
                    self.alignment(cx, cy);
                }
            }
        }

        // Format areas are reserved with placeholder bits; the dark module
        // is fixed.
        draw_format_bits(self, 0);
        if self.version >= 7 {
            draw_version_bits(self);
        }
    }

    fn finder(&mut self, cx: usize, cy: usize) {
        let size = self.size() as isize;
        for dy in -4isize..=4 {
            for dx in -4isize..=4 {
                let (x, y) = (cx as isize + dx, cy as isize + dy);
                if (0..size).contains(&x) && (0..size).contains(&y) {
                    let dist = dx.abs().max(dy.abs());
                    self.put(x as usize, y as usize, dist != 2 && dist != 4);
                }
            }
        }
    }

    fn alignment(&mut self, cx: usize, cy: usize) {
        for dy in -2isize..=2 {
            for dx in -2isize..=2 {
                let dist = dx.abs().max(dy.abs());
                self.put(
                    (cx as isize + dx) as usize,
                    (cy as isize + dy) as usize,
                    dist != 1,
                );
            }
        }
    }

    /// Data module coordinates in placement order: two-column strips from
    /// the right edge, alternating upward and downward, skipping the
    /// vertical timing column.
    pub fn data_positions(&self) -> Vec<(usize, usize)> {
        let size = self.size();
        let mut out = Vec::new();
        let mut right = size as isize - 1;
        while right >= 1 {
            if right == 6 {
                right = 5;
            }
            let upward = ((right + 1) & 2) == 0;
            for vert in 0..size {
                let y = if upward { size - 1 - vert } else { vert };
                for j in 0..2 {
                    let x = (right - j) as usize;
                    if !self.is_function(x, y) {
                        out.push((x, y));
                    }
                }
            }
            right -= 2;
        }
        out
    }
}

trait ModuleSink {
    fn size(&self) -> usize;
    fn put_bit(&mut self, x: usize, y: usize, dark: bool);
}

impl ModuleSink for FunctionLayout {
    fn size(&self) -> usize {
        self.base.size
    }
    fn put_bit(&mut self, x: usize, y: usize, dark: bool) {
        self.put(x, y, dark);
    }
}

impl ModuleSink for QrMatrix {
    fn size(&self) -> usize {
        self.size
    }
    fn put_bit(&mut self, x: usize, y: usize, dark: bool) {
        self.set(x, y, dark);
    }
}

fn ecc_format_bits(ecc: EccLevel) -> u32 {
    match ecc {
        EccLevel::L => 1,
        EccLevel::M => 0,
        EccLevel::Q => 3,
        EccLevel::H => 2,
    }
}

/// 15-bit format word (BCH(15,5), masked) for an ECC level and mask.
pub fn format_word(ecc: EccLevel, mask: u8) -> u32 {
    let data = (ecc_format_bits(ecc) << 3) | u32::from(mask);
    let mut rem = data;
    for _ in 0..10 {
        rem = (rem << 1) ^ ((rem >> 9) * 0x537);
    }
    ((data << 10) | rem) ^ 0x5412
}

pub fn decode_format_fields(word: u32) -> (EccLevel, u8) {
    let data = (word ^ 0x5412) >> 10;
    let ecc = match data >> 3 {
        1 => EccLevel::L,
        0 => EccLevel::M,
        3 => EccLevel::Q,
        _ => EccLevel::H,
    };
    (ecc, (data & 7) as u8)
}

/// 18-bit version word (BCH(18,6)).
pub fn version_word(version: u8) -> u32 {
    let data = u32::from(version);
    let mut rem = data;
    for _ in 0..12 {
        rem = (rem << 1) ^ ((rem >> 11) * 0x1f25);
    }
    (data << 12) | rem
}

/// Coordinates of format bit `i` in the first and second copies.
pub fn format_bit_positions(size: usize, i: usize) -> [(usize, usize); 2] {
    let first = match i {
        0..=5 => (8, i),
        6 => (8, 7),
        7 => (8, 8),
        8 => (7, 8),
        _ => (14 - i, 8),
    };
    let second = if i < 8 {
        (size - 1 - i, 8)
    } else {
        (8, size - 15 + i)
    };
    [first, second]
}

/// Coordinates of version bit `i` in the two copies (top-right, bottom-left).
pub fn version_bit_positions(size: usize, i: usize) -> [(usize, usize); 2] {
    let a = size - 11 + i % 3;
    let b = i / 3;
    [(a, b), (b, a)]
}

fn draw_format_bits_on<S: ModuleSink>(sink: &mut S, word: u32) {
    let size = sink.size();
    for i in 0..15 {
        let bit = (word >> i) & 1 != 0;
        for (x, y) in format_bit_positions(size, i) {
            sink.put_bit(x, y, bit);
        }
    }
    sink.put_bit(8, size - 8, true);
}

fn draw_format_bits(layout: &mut FunctionLayout, word: u32) {
    draw_format_bits_on(layout, word);
}

pub(crate) fn write_format(matrix: &mut QrMatrix, ecc: EccLevel, mask: u8) {
    draw_format_bits_on(matrix, format_word(ecc, mask));
}

fn draw_version_bits(layout: &mut FunctionLayout) {
    let size = layout.size();
    let word = version_word(layout.version);
    for i in 0..18 {
        let bit = (word >> i) & 1 != 0;
        for (x, y) in version_bit_positions(size, i) {
            layout.put(x, y, bit);
        }
    }
}

pub fn mask_applies(mask: u8, x: usize, y: usize) -> bool {
    match mask {
        0 => (x + y) % 2 == 0,
        1 => y % 2 == 0,
        2 => x % 3 == 0,
        3 => (x + y) % 3 == 0,
        4 => (x / 3 + y / 2) % 2 == 0,
        5 => x * y % 2 + x * y % 3 == 0,
        6 => (x * y % 2 + x * y % 3) % 2 == 0,
        7 => ((x + y) % 2 + x * y % 3) % 2 == 0,
        _ => unreachable!("mask index {mask} out of range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr::tables::raw_data_modules;

    #[test]
    fn format_words_match_published_values() {
        // L with masks 0..7 as listed in the standard's format table.
        let l: Vec<u32> = (0..8).map(|m| format_word(EccLevel::L, m)).collect();
        assert_eq!(l, [0x77c4, 0x72f3, 0x7daa, 0x789d, 0x662f, 0x6318, 0x6c41, 0x6976]);
        assert_eq!(format_word(EccLevel::M, 0), 0x5412);
        for ecc in EccLevel::ALL {
            for m in 0..8 {
                assert_eq!(decode_format_fields(format_word(ecc, m)), (ecc, m));
            }
        }
    }

    #[test]
    fn version_words_match_published_values() {
        assert_eq!(version_word(7), 0x07c94);
        assert_eq!(version_word(25), 0x191e1);
        assert_eq!(version_word(40), 0x28c69);
    }

    #[test]
    fn data_positions_cover_raw_modules() {
        for v in MIN_VERSION..=MAX_VERSION {
            let layout = FunctionLayout::new(v);
            let positions = layout.data_positions();
            assert_eq!(positions.len(), raw_data_modules(v), "version {v}");
            let mut seen = std::collections::HashSet::new();
            assert!(positions.iter().all(|p| seen.insert(*p)));
        }
    }

    #[test]
    fn version_from_size() {
        assert_eq!(QrMatrix::new_light(21).version(), Some(1));
        assert_eq!(QrMatrix::new_light(117).version(), Some(25));
        assert_eq!(QrMatrix::new_light(177).version(), Some(40));
        assert_eq!(QrMatrix::new_light(22).version(), None);
        assert_eq!(QrMatrix::new_light(181).version(), None);
    }
}
