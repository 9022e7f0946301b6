//! Reed-Solomon over GF(256) with the QR field polynomial
//! x^8 + x^4 + x^3 + x^2 + 1 and generator roots α^0 … α^(n-1).

use std::sync::OnceLock;

const FIELD_POLY: u16 = 0x11d;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= FIELD_POLY;
            }
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Tables { exp, log }
    })
}

pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[usize::from(t.log[usize::from(a)]) + usize::from(t.log[usize::from(b)])]
}

pub fn div(a: u8, b: u8) -> u8 {
    assert!(b != 0, "division by zero in GF(256)");
    if a == 0 {
        return 0;
    }
    let t = tables();
    t.exp[usize::from(t.log[usize::from(a)]) + 255 - usize::from(t.log[usize::from(b)])]
}

/// α^e for any non-negative exponent.
pub fn alpha_pow(e: usize) -> u8 {
    tables().exp[e % 255]
}

pub fn inverse(a: u8) -> u8 {
    div(1, a)
}

/// Generator polynomial of the given degree, highest-degree coefficient
/// first with the leading 1 omitted.
pub fn generator(degree: usize) -> Vec<u8> {
    let mut g = vec![0u8; degree];
    g[degree - 1] = 1;
    let mut root = 1u8;
    for _ in 0..degree {
        for j in 0..degree {
            g[j] = mul(g[j], root);
            if j + 1 < degree {
                g[j] ^= g[j + 1];
            }
        }
        root = mul(root, 2);
    }
    g
}

/// Remainder of `data · x^degree` divided by the generator.
pub fn ecc_codewords(data: &[u8], generator: &[u8]) -> Vec<u8> {
    let mut rem = vec![0u8; generator.len()];
    for &b in data {
        let factor = b ^ rem[0];
        rem.rotate_left(1);
        *rem.last_mut().expect("degree > 0") = 0;
        for (r, &g) in rem.iter_mut().zip(generator) {
            *r ^= mul(g, factor);
        }
    }
    rem
}

/// Evaluates a polynomial given highest-degree coefficient first.
fn eval_msb_first(poly: &[u8], x: u8) -> u8 {
    poly.iter().fold(0, |acc, &c| mul(acc, x) ^ c)
}

/// Evaluates a polynomial given lowest-degree coefficient first.
fn eval_lsb_first(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0, |acc, &c| mul(acc, x) ^ c)
}

pub fn syndromes(block: &[u8], ecc_len: usize) -> Vec<u8> {
    (0..ecc_len).map(|i| eval_msb_first(block, alpha_pow(i))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Clean,
    Corrected(usize),
}

/// Corrects up to `max_errors` byte errors in place. Returns `None` when the
/// block cannot be corrected within that bound.
pub fn correct(block: &mut [u8], ecc_len: usize, max_errors: usize) -> Option<Correction> {
    let synd = syndromes(block, ecc_len);
    if synd.iter().all(|&s| s == 0) {
        return Some(Correction::Clean);
    }
    if max_errors == 0 {
        return None;
    }

    // Berlekamp-Massey; polynomials lowest degree first.
    let mut locator = vec![1u8];
    let mut prev = vec![1u8];
    let mut errors = 0usize;
    let mut shift = 1usize;
    let mut prev_discrepancy = 1u8;
    for n in 0..ecc_len {
        let d = (0..=errors.min(locator.len() - 1))
            .fold(synd[n], |acc, i| if i == 0 { acc } else { acc ^ mul(locator[i], synd[n - i]) });
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = div(d, prev_discrepancy);
        let mut next = locator.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i + shift] ^= mul(coef, p);
        }
        if 2 * errors <= n {
            prev = locator;
            errors = n + 1 - errors;
            prev_discrepancy = d;
            shift = 1;
        } else {
            shift += 1;
        }
        locator = next;
    }
    while locator.len() > 1 && *locator.last().expect("non-empty") == 0 {
        locator.pop();
    }
    let degree = locator.len() - 1;
    if degree != errors || errors > max_errors {
        return None;
    }

    // Chien search: byte k sits at power n-1-k.
    let n = block.len();
    let mut positions = Vec::new();
    for k in 0..n {
        let power = n - 1 - k;
        let x_inv = alpha_pow(255 - power % 255);
        if eval_lsb_first(&locator, x_inv) == 0 {
            positions.push(k);
        }
    }
    if positions.len() != errors {
        return None;
    }

    // Forney with first consecutive root α^0: e = X · Ω(X⁻¹) / Λ'(X⁻¹).
    let mut omega = vec![0u8; ecc_len];
    for (i, &s) in synd.iter().enumerate() {
        for (j, &l) in locator.iter().enumerate() {
            if i + j < ecc_len {
                omega[i + j] ^= mul(s, l);
            }
        }
    }
    let derivative: Vec<u8> = locator
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
        .collect();
    for &k in &positions {
        let power = n - 1 - k;
        let x = alpha_pow(power);
        let x_inv = inverse(x);
        let denom = eval_lsb_first(&derivative, x_inv);
        if denom == 0 {
            return None;
        }
        block[k] ^= mul(x, div(eval_lsb_first(&omega, x_inv), denom));
    }
    if syndromes(block, ecc_len).iter().any(|&s| s != 0) {
        return None;
    }
    Some(Correction::Corrected(errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_basics() {
        assert_eq!(alpha_pow(8), 0x1d);
        for a in 1..=255u8 {
            assert_eq!(mul(a, inverse(a)), 1);
        }
    }

    #[test]
    fn generator_degree_7() {
        // Published generator for 7 ECC codewords (exponent form 0, 87, 229,
        // 146, 149, 238, 102, 21).
        let expected: Vec<u8> = [87usize, 229, 146, 149, 238, 102, 21]
            .iter()
            .map(|&e| alpha_pow(e))
            .collect();
        assert_eq!(generator(7), expected);
    }

    #[test]
    fn known_codeword_block() {
        // "01234567" numeric, version 1-M, from the standard's worked example.
        let data = [
            0x10, 0x20, 0x0c, 0x56, 0x61, 0x80, 0xec, 0x11, 0xec, 0x11, 0xec, 0x11, 0xec, 0x11,
            0xec, 0x11,
        ];
        let ecc = ecc_codewords(&data, &generator(10));
        assert_eq!(ecc, [0xa5, 0x24, 0xd4, 0xc1, 0xed, 0x36, 0xc7, 0x87, 0x2c, 0x55]);
    }

    #[test]
    fn corrects_within_bound() {
        let data: Vec<u8> = (0..40u8).map(|i| i.wrapping_mul(37)).collect();
        let ecc_len = 16;
        let mut block = data.clone();
        block.extend(ecc_codewords(&data, &generator(ecc_len)));
        assert!(syndromes(&block, ecc_len).iter().all(|&s| s == 0));

        let clean = block.clone();
        let mut damaged = block.clone();
        for (i, pos) in [0usize, 7, 19, 30, 44, 55].iter().enumerate() {
            damaged[*pos] ^= 0x5a ^ i as u8;
        }
        assert_eq!(correct(&mut damaged, ecc_len, 8), Some(Correction::Corrected(6)));
        assert_eq!(damaged, clean);

        let mut too_many = clean.clone();
        for pos in 0..9 {
            too_many[pos * 6] ^= 0xff;
        }
        let before = too_many.clone();
        if correct(&mut too_many, ecc_len, 8).is_none() {
            assert_eq!(too_many.len(), before.len());
        } else {
            // a miscorrection must at least yield a valid codeword
            assert!(syndromes(&too_many, ecc_len).iter().all(|&s| s == 0));
        }
    }
}
