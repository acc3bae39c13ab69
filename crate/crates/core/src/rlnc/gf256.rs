//! GF(2^8) with the AES reduction polynomial x^8 + x^4 + x^3 + x + 1.
//!
//! Multiplication goes through log/antilog tables generated from the
//! primitive element 0x03 at compile time.

const POLY: u16 = 0x11b;

const fn build_tables() -> ([u8; 512], [u8; 256]) {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        // x *= 0x03
        let mut doubled = x << 1;
        if doubled & 0x100 != 0 {
            doubled ^= POLY;
        }
        x = doubled ^ x;
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    (exp, log)
}

const TABLES: ([u8; 512], [u8; 256]) = build_tables();
static EXP: [u8; 512] = TABLES.0;
static LOG: [u8; 256] = TABLES.1;

#[inline]
pub fn add(a: u8, b: u8) -> u8 {
    a ^ b
}

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        EXP[LOG[a as usize] as usize + LOG[b as usize] as usize]
    }
}

/// Multiplicative inverse; panics on zero.
#[inline]
pub fn inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no inverse in GF(256)");
    EXP[255 - LOG[a as usize] as usize]
}

#[inline]
pub fn div(a: u8, b: u8) -> u8 {
    mul(a, inv(b))
}

/// `dst += scalar * src`, elementwise.
pub fn mul_add_assign(dst: &mut [u8], src: &[u8], scalar: u8) {
    if scalar == 0 {
        return;
    }
    let log_s = LOG[scalar as usize] as usize;
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d ^= EXP[log_s + LOG[s as usize] as usize];
        }
    }
}

/// `row *= scalar`, elementwise.
pub fn scale_assign(row: &mut [u8], scalar: u8) {
    for v in row.iter_mut() {
        *v = mul(*v, scalar);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Shift-and-add multiplication with explicit reduction.
    fn slow_mul(mut a: u8, mut b: u8) -> u8 {
        let mut p = 0u8;
        while b != 0 {
            if b & 1 != 0 {
                p ^= a;
            }
            let carry = a & 0x80 != 0;
            a <<= 1;
            if carry {
                a ^= (POLY & 0xff) as u8;
            }
            b >>= 1;
        }
        p
    }

    #[test]
    fn table_multiplication_matches_reference() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(mul(a, b), slow_mul(a, b), "{a} * {b}");
            }
        }
    }

    #[test]
    fn inverses() {
        for a in 1..=255u8 {
            assert_eq!(mul(a, inv(a)), 1);
            assert_eq!(div(a, a), 1);
        }
        // AES S-box derivation example
        assert_eq!(mul(0x57, 0x83), 0xc1);
    }

    #[test]
    fn mul_add_matches_scalar_ops() {
        let src = [0u8, 1, 2, 0x53, 0xca, 0xff];
        let mut dst = [9u8, 8, 7, 6, 5, 4];
        let expected: Vec<u8> = dst.iter().zip(&src).map(|(&d, &s)| add(d, mul(0x1d, s))).collect();
        mul_add_assign(&mut dst, &src, 0x1d);
        assert_eq!(dst.to_vec(), expected);
    }
}
