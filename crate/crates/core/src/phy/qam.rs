//! Gray-mapped 16-QAM with unit average power.
//!
//! Four bits `b0 b1 b2 b3` map to `(I + jQ)/√10`; `b0 b1` select the in-phase
//! level and `b2 b3` the quadrature level with the Gray table
//!
//! | bits | level |
//! |------|-------|
//! | 00   | −3    |
//! | 01   | −1    |
//! | 11   | +1    |
//! | 10   | +3    |

use crate::error::{Error, Result};
use crate::tensor::Complex64;

pub const BITS_PER_SYMBOL: usize = 4;

const SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10

fn level(b0: u8, b1: u8) -> f64 {
    match (b0 & 1, b1 & 1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

fn slice(x: f64) -> (u8, u8) {
    let x = x / SCALE;
    if x < -2.0 {
        (0, 0)
    } else if x < 0.0 {
        (0, 1)
    } else if x < 2.0 {
        (1, 1)
    } else {
        (1, 0)
    }
}

pub fn qam16_symbol(bits: &[u8]) -> Complex64 {
    Complex64::new(level(bits[0], bits[1]) * SCALE, level(bits[2], bits[3]) * SCALE)
}

pub fn qam16_mod(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(BITS_PER_SYMBOL) {
        return Err(Error::invalid(format!(
            "16-QAM needs a multiple of 4 bits, got {}",
            bits.len()
        )));
    }
    Ok(bits.chunks_exact(BITS_PER_SYMBOL).map(qam16_symbol).collect())
}

/// Minimum-distance hard decision, appending four bits per symbol to `out`.
pub fn qam16_demod_into(symbol: Complex64, out: &mut Vec<u8>) {
    let (b0, b1) = slice(symbol.re);
    let (b2, b3) = slice(symbol.im);
    out.extend_from_slice(&[b0, b1, b2, b3]);
}

pub fn qam16_demod(symbols: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * BITS_PER_SYMBOL);
    for &s in symbols {
        qam16_demod_into(s, &mut out);
    }
    out
}
