//! Conversion between complex CSI / beamforming tensors and the real vectors
//! the network consumes.
//!
//! A list of `S` matrices of shape `R × C` flattens to `2·R·C·S` values: all
//! real parts, then all imaginary parts, each half indexed `(r·C + c)·S + s`.

use super::loss::Example;
use crate::channel::CsiDataset;
use crate::error::{Error, Result};
use crate::tensor::{canonical_pivot, svd, CMatrix, Complex64};

pub fn flatten(mats: &[CMatrix]) -> Vec<f64> {
    let s_count = mats.len();
    if s_count == 0 {
        return Vec::new();
    }
    let (rows, cols) = mats[0].shape();
    let half = rows * cols * s_count;
    let mut out = vec![0.0; 2 * half];
    for (s, m) in mats.iter().enumerate() {
        for r in 0..rows {
            for c in 0..cols {
                let idx = (r * cols + c) * s_count + s;
                out[idx] = m[(r, c)].re;
                out[half + idx] = m[(r, c)].im;
            }
        }
    }
    out
}

pub fn unflatten(values: &[f64], rows: usize, cols: usize, n_subcarriers: usize) -> Result<Vec<CMatrix>> {
    let half = rows * cols * n_subcarriers;
    if values.len() != 2 * half {
        return Err(Error::invalid(format!(
            "expected {} values for {n_subcarriers} matrices of {rows}x{cols}, got {}",
            2 * half,
            values.len()
        )));
    }
    Ok((0..n_subcarriers)
        .map(|s| {
            CMatrix::from_fn(rows, cols, |r, c| {
                let idx = (r * cols + c) * n_subcarriers + s;
                Complex64::new(values[idx], values[half + idx])
            })
        })
        .collect())
}

/// Beamforming matrix of `h` with each singular pair `(u_k, v_k)` rotated so
/// the pivot entry of `u_k` (largest magnitude, lowest index on ties) is real
/// and non-negative. With one receive antenna this makes `v = h† / ‖h‖`, a
/// conjugation and a scaling of the input, which is far easier to regress
/// than a convention anchored on `v` itself. Zero-forcing is unaffected by
/// the per-column phase.
pub fn left_referenced_bm(h: &CMatrix, n_ss: usize) -> Result<CMatrix> {
    let (nr, nt) = h.shape();
    if n_ss == 0 || n_ss > nr.min(nt) {
        return Err(Error::invalid(format!(
            "n_ss = {n_ss} out of range for a {nr}x{nt} channel"
        )));
    }
    let d = svd(h)?;
    let v = d.v();
    Ok(CMatrix::from_fn(nt, n_ss, |r, k| {
        let u = d.u.column(k);
        let p = u[canonical_pivot(&u)];
        let rot = if p.norm() > 0.0 {
            p.conj() / p.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        v[(r, k)] * rot
    }))
}

/// Training target for one STA: the flattened beamforming matrices.
pub fn target_for(h: &[CMatrix], n_ss: usize) -> Result<Vec<f64>> {
    let v = h
        .iter()
        .map(|m| left_referenced_bm(m, n_ss))
        .collect::<Result<Vec<_>>>()?;
    Ok(flatten(&v))
}

/// Network examples for every sample of `ds`: one per (sample, STA), or one
/// per sample with all STAs when `multi_sta` is set.
pub fn examples(ds: &CsiDataset, multi_sta: bool) -> Result<Vec<Example>> {
    let n_ss = ds.config.n_ss_per_sta;
    let mut out = Vec::new();
    for sample in &ds.samples {
        let mut group = Example {
            inputs: Vec::new(),
            targets: Vec::new(),
        };
        for h in &sample.h {
            let x = flatten(h);
            let t = target_for(h, n_ss)?;
            if multi_sta {
                group.inputs.push(x);
                group.targets.push(t);
            } else {
                out.push(Example::single(x, t));
            }
        }
        if multi_sta {
            out.push(group);
        }
    }
    Ok(out)
}
