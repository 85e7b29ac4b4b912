//! The 802.11 compressed beamforming baseline: SVD beamforming matrix,
//! Givens angle codec, angle quantization and report-size accounting.

mod accounting;
pub mod givens;
pub mod quant;

pub use accounting::{accounting, FeedbackAccounting, RAW_CSI_BITS};
pub use givens::{
    angle_count, angle_layout, decompose_beam, givens_decompose, givens_reconstruct, AngleIndex, AngleKind,
    GivensAngles, GivensFeedback,
};
pub use quant::{dequantize, quantize, quantize_feedback, AngleCodes, QuantConfig};

use crate::error::{Error, Result};
use crate::tensor::{svd, CMatrix};

/// Per-subcarrier beamforming matrices of one STA, each `N_t × N_ss`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamMatrix {
    pub v: Vec<CMatrix>,
}

impl BeamMatrix {
    pub fn n_subcarriers(&self) -> usize {
        self.v.len()
    }
}

/// First `n_ss` right singular vectors of `h` (N_r × N_t), in the SVD's
/// canonical phase.
pub fn compute_bm(h: &CMatrix, n_ss: usize) -> Result<CMatrix> {
    let (nr, nt) = h.shape();
    if n_ss == 0 || n_ss > nr.min(nt) {
        return Err(Error::invalid(format!(
            "n_ss = {n_ss} out of range for a {nr}x{nt} channel"
        )));
    }
    Ok(svd(h)?.v().leading_columns(n_ss))
}

/// Beamforming matrix for every subcarrier of one STA's CSI.
pub fn beam_matrix(h: &[CMatrix], n_ss: usize) -> Result<BeamMatrix> {
    Ok(BeamMatrix {
        v: h.iter().map(|m| compute_bm(m, n_ss)).collect::<Result<_>>()?,
    })
}
