//! Uniform midpoint quantization of Givens angles.
//!
//! φ ∈ [0, 2π) maps to `q = floor(φ 2^{b_φ} / 2π)` and back to
//! `2π (q + ½) / 2^{b_φ}`; ψ ∈ [0, π/2] likewise over its quarter turn with
//! `b_ψ = b_φ − 2` bits. Codes are clamped to the top level, so ψ = π/2
//! lands in the last bin.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::givens::{angle_layout, check_ranges, AngleKind, GivensAngles, GivensFeedback};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantConfig {
    b_phi: u8,
}

impl QuantConfig {
    /// The two codebook resolutions used by 802.11 MU feedback.
    pub const MU_LOW: QuantConfig = QuantConfig { b_phi: 7 };
    pub const MU_HIGH: QuantConfig = QuantConfig { b_phi: 9 };

    pub fn new(b_phi: u8) -> Result<Self> {
        if !(3..=16).contains(&b_phi) {
            return Err(Error::invalid(format!("b_phi must be in 3..=16, got {b_phi}")));
        }
        Ok(QuantConfig { b_phi })
    }

    pub fn b_phi(self) -> u8 {
        self.b_phi
    }

    pub fn b_psi(self) -> u8 {
        self.b_phi - 2
    }
}

fn encode(x: f64, range: f64, bits: u8) -> u32 {
    let levels = 1u64 << bits;
    ((x * levels as f64 / range).floor() as i64).clamp(0, levels as i64 - 1) as u32
}

fn decode(q: u32, range: f64, bits: u8) -> f64 {
    range * (q as f64 + 0.5) / (1u64 << bits) as f64
}

pub fn quantize_phi(phi: f64, bits: u8) -> u32 {
    encode(phi, TAU, bits)
}

pub fn dequantize_phi(q: u32, bits: u8) -> f64 {
    decode(q, TAU, bits)
}

pub fn quantize_psi(psi: f64, bits: u8) -> u32 {
    encode(psi, FRAC_PI_2, bits)
}

pub fn dequantize_psi(q: u32, bits: u8) -> f64 {
    decode(q, FRAC_PI_2, bits)
}

/// Integer codes for one subcarrier, in the same order as [`GivensAngles`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleCodes {
    pub phi: Vec<u32>,
    pub psi: Vec<u32>,
}

pub fn quantize(angles: &GivensAngles, q: QuantConfig) -> Result<AngleCodes> {
    check_ranges(angles)?;
    Ok(AngleCodes {
        phi: angles.phi.iter().map(|&a| quantize_phi(a, q.b_phi())).collect(),
        psi: angles.psi.iter().map(|&a| quantize_psi(a, q.b_psi())).collect(),
    })
}

pub fn dequantize(codes: &AngleCodes, n_tx: usize, n_ss: usize, q: QuantConfig) -> GivensAngles {
    GivensAngles {
        n_tx,
        n_ss,
        phi: codes.phi.iter().map(|&c| dequantize_phi(c, q.b_phi())).collect(),
        psi: codes.psi.iter().map(|&c| dequantize_psi(c, q.b_psi())).collect(),
    }
}

/// Quantize then dequantize every subcarrier.
pub fn quantize_feedback(fb: &GivensFeedback, q: QuantConfig) -> Result<GivensFeedback> {
    let subcarriers = fb
        .subcarriers
        .iter()
        .map(|a| quantize(a, q).map(|c| dequantize(&c, fb.n_tx, fb.n_ss, q)))
        .collect::<Result<_>>()?;
    Ok(GivensFeedback {
        subcarriers,
        ..fb.clone()
    })
}

/// Writes angle codes as CSV with columns `s,t,l,kind,q`, in payload order.
pub fn write_codes_csv<W: Write>(fb: &GivensFeedback, q: QuantConfig, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "t", "l", "kind", "q"])
        .map_err(|e| Error::invalid(e.to_string()))?;
    let layout = angle_layout(fb.n_tx, fb.n_ss);
    for (s, angles) in fb.subcarriers.iter().enumerate() {
        let codes = quantize(angles, q)?;
        let (mut phi, mut psi) = (codes.phi.iter(), codes.psi.iter());
        for idx in &layout {
            let code = match idx.kind {
                AngleKind::Phi => phi.next(),
                AngleKind::Psi => psi.next(),
            }
            .expect("layout matches codes");
            w.write_record([
                s.to_string(),
                idx.t.to_string(),
                idx.l.to_string(),
                idx.kind.name().to_string(),
                code.to_string(),
            ])
            .map_err(|e| Error::invalid(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}
