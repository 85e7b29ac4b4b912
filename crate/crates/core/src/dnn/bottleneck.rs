//! Affine min/max quantizer for the bottleneck vector sent over the air.
//!
//! The range endpoints travel as two f32 values (rounded outward so every
//! element stays inside), followed by one `bits`-wide code per element, so a
//! report costs `64 + N·bits` bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits spent on the two f32 range parameters.
pub const HEADER_BITS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckCodes {
    pub bits: u8,
    pub lo: f32,
    pub hi: f32,
    pub codes: Vec<u32>,
}

impl BottleneckCodes {
    pub fn airtime_bits(&self) -> u64 {
        airtime_bits(self.codes.len(), self.bits)
    }
}

pub fn airtime_bits(n_elements: usize, bits: u8) -> u64 {
    HEADER_BITS + n_elements as u64 * bits as u64
}

pub fn check_bits(bits: u8) -> Result<()> {
    if matches!(bits, 8 | 16 | 32) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "bottleneck bits must be 8, 16 or 32, got {bits}"
        )))
    }
}

fn f32_down(x: f64) -> f32 {
    let f = x as f32;
    if f as f64 > x {
        f.next_down()
    } else {
        f
    }
}

fn f32_up(x: f64) -> f32 {
    let f = x as f32;
    if (f as f64) < x {
        f.next_up()
    } else {
        f
    }
}

fn max_code(bits: u8) -> f64 {
    ((1u64 << bits) - 1) as f64
}

pub fn quantize_bottleneck(z: &[f64], bits: u8) -> Result<BottleneckCodes> {
    check_bits(bits)?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("bottleneck vector has non-finite values"));
    }
    let (min, max) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if z.is_empty() {
        return Ok(BottleneckCodes {
            bits,
            lo: 0.0,
            hi: 0.0,
            codes: Vec::new(),
        });
    }
    let (lo, hi) = (f32_down(min), f32_up(max));
    let span = hi as f64 - lo as f64;
    let top = max_code(bits);
    let codes = z
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo as f64) / span * top).round().clamp(0.0, top) as u32
            } else {
                0
            }
        })
        .collect();
    Ok(BottleneckCodes { bits, lo, hi, codes })
}

pub fn dequantize_bottleneck(q: &BottleneckCodes) -> Vec<f64> {
    let lo = q.lo as f64;
    let span = q.hi as f64 - lo;
    let top = max_code(q.bits);
    q.codes.iter().map(|&c| lo + c as f64 / top * span).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;

    #[test]
    fn constant_vector_exact() {
        for bits in [8, 16, 32] {
            let z = vec![0.375; 10];
            assert_eq!(dequantize_bottleneck(&quantize_bottleneck(&z, bits).unwrap()), z);
        }
    }

    #[test]
    fn sixteen_bit_error_bound() {
        let mut rng = Rng::new(3, 0);
        for _ in 0..100 {
            let z: Vec<f64> = (0..64).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let back = dequantize_bottleneck(&quantize_bottleneck(&z, 16).unwrap());
            let err = z.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 2.0 / 65536.0, "{err}");
        }
    }

    #[test]
    fn range_bound_holds_per_vector() {
        let mut rng = Rng::new(5, 0);
        for bits in [8u8, 16, 32] {
            let z: Vec<f64> = (0..50).map(|_| 3.0 * rng.uniform() + 0.1).collect();
            let (min, max) = z.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            let back = dequantize_bottleneck(&quantize_bottleneck(&z, bits).unwrap());
            let err = z.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= (max - min) / 2f64.powi(bits as i32) * (1.0 + 1e-6));
        }
    }

    #[test]
    fn airtime() {
        let q = quantize_bottleneck(&[0.0; 28], 16).unwrap();
        assert_eq!(q.airtime_bits(), 64 + 28 * 16);
    }

    #[test]
    fn unsupported_width() {
        assert!(quantize_bottleneck(&[1.0], 12).is_err());
    }
}
