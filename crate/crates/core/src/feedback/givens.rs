//! Givens-rotation compression of a beamforming matrix.
//!
//! `V` (N_t × N_ss, orthonormal columns) is written as `Ṽ · D̃` where `D̃` is
//! a diagonal of unit-modulus phases taken from the last row of `V` and
//!
//! ```text
//! Ṽ = Π_{t=1}^{min(N_ss, N_t−1)} ( D_t · Π_{ℓ=t+1}^{N_t} G_{ℓ,t}ᵀ ) · I_{N_t×N_ss}
//! ```
//!
//! `D_t` carries the phases φ_{ℓ,t} (ℓ = t..N_t−1) on its diagonal and
//! `G_{ℓ,t}` is a real plane rotation by ψ_{ℓ,t} in the (t, ℓ) plane. Only
//! the φ and ψ angles are fed back; `D̃` is dropped because it does not
//! change the beamforming direction of any column.
//!
//! Indices `t` and `ℓ` are 1-based throughout this module's public layout.

use std::f64::consts::{FRAC_PI_2, TAU};

use super::BeamMatrix;
use crate::error::{Error, Result};
use crate::tensor::{CMatrix, Complex64};

/// Tolerance on `V†V − I` accepted by the decomposition.
pub const UNITARY_TOL: f64 = 1e-6;
/// Largest imaginary residue tolerated where the algorithm expects a real entry.
pub const REAL_RESIDUE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleKind {
    Phi,
    Psi,
}

impl AngleKind {
    pub fn name(self) -> &'static str {
        match self {
            AngleKind::Phi => "phi",
            AngleKind::Psi => "psi",
        }
    }
}

/// Position of one angle in the feedback payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleIndex {
    pub t: usize,
    pub l: usize,
    pub kind: AngleKind,
}

/// Number of rotation stages, `min(N_ss, N_t − 1)`.
pub fn stages(n_tx: usize, n_ss: usize) -> usize {
    n_ss.min(n_tx.saturating_sub(1))
}

/// Total angle count N_a (φ and ψ together): `2 Σ_{t=1}^{min(N_ss, N_t−1)} (N_t − t)`.
pub fn angle_count(n_tx: usize, n_ss: usize) -> usize {
    2 * (1..=stages(n_tx, n_ss)).map(|t| n_tx - t).sum::<usize>()
}

/// Serialization order within one subcarrier: t ascending; for each t the
/// φ block (ℓ = t..N_t−1) precedes the ψ block (ℓ = t+1..N_t).
pub fn angle_layout(n_tx: usize, n_ss: usize) -> Vec<AngleIndex> {
    let mut out = Vec::with_capacity(angle_count(n_tx, n_ss));
    for t in 1..=stages(n_tx, n_ss) {
        out.extend((t..n_tx).map(|l| AngleIndex {
            t,
            l,
            kind: AngleKind::Phi,
        }));
        out.extend((t + 1..=n_tx).map(|l| AngleIndex {
            t,
            l,
            kind: AngleKind::Psi,
        }));
    }
    out
}

/// Angles of one subcarrier, each list in (t, ℓ) order.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensAngles {
    pub n_tx: usize,
    pub n_ss: usize,
    /// φ ∈ [0, 2π)
    pub phi: Vec<f64>,
    /// ψ ∈ [0, π/2]
    pub psi: Vec<f64>,
}

impl GivensAngles {
    /// All-zero angles, which reconstruct to `I_{N_t×N_ss}`.
    pub fn zeros(n_tx: usize, n_ss: usize) -> Self {
        let half = angle_count(n_tx, n_ss) / 2;
        GivensAngles {
            n_tx,
            n_ss,
            phi: vec![0.0; half],
            psi: vec![0.0; half],
        }
    }

    /// Angles in the order of [`angle_layout`].
    pub fn serialized(&self) -> Vec<(AngleIndex, f64)> {
        let mut phi = self.phi.iter();
        let mut psi = self.psi.iter();
        angle_layout(self.n_tx, self.n_ss)
            .into_iter()
            .map(|idx| {
                let v = match idx.kind {
                    AngleKind::Phi => phi.next(),
                    AngleKind::Psi => psi.next(),
                };
                (idx, *v.expect("layout matches angle counts"))
            })
            .collect()
    }
}

/// Angles for every subcarrier of one STA.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensFeedback {
    pub n_tx: usize,
    pub n_ss: usize,
    pub subcarriers: Vec<GivensAngles>,
}

impl GivensFeedback {
    pub fn n_subcarriers(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn layout(&self) -> Vec<AngleIndex> {
        angle_layout(self.n_tx, self.n_ss)
    }

    pub fn reconstruct(&self) -> Result<BeamMatrix> {
        Ok(BeamMatrix {
            v: self.subcarriers.iter().map(givens_reconstruct).collect::<Result<_>>()?,
        })
    }
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn unit_phase(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / z.norm()
    }
}

/// Decomposes one subcarrier's `V` into Givens angles and the dropped
/// diagonal `D̃` (returned as its diagonal entries).
pub fn givens_decompose(v: &CMatrix) -> Result<(GivensAngles, Vec<Complex64>)> {
    let (nt, nss) = v.shape();
    if nss == 0 || nss > nt {
        return Err(Error::invalid(format!(
            "beamforming matrix shape {nt}x{nss} is invalid"
        )));
    }
    let residual = v.orthonormality_residual();
    if !(residual <= UNITARY_TOL) {
        return Err(Error::NotUnitary { residual });
    }

    let d_tilde: Vec<Complex64> = (0..nss).map(|k| unit_phase(v[(nt - 1, k)])).collect();
    let mut omega = v.clone();
    for (k, d) in d_tilde.iter().enumerate() {
        for r in 0..nt {
            omega[(r, k)] *= d.conj();
        }
    }

    let half = angle_count(nt, nss) / 2;
    let mut phi = Vec::with_capacity(half);
    let mut psi = Vec::with_capacity(half);
    for t in 1..=stages(nt, nss) {
        let col = t - 1;
        for l in t..nt {
            let angle = wrap_phase(omega[(l - 1, col)].arg());
            phi.push(angle);
            let rot = Complex64::from_polar(1.0, -angle);
            for c in 0..nss {
                omega[(l - 1, c)] *= rot;
            }
        }
        for l in t + 1..=nt {
            let a = omega[(t - 1, col)];
            let b = omega[(l - 1, col)];
            let residue = a.im.abs().max(b.im.abs());
            if residue > REAL_RESIDUE_TOL {
                return Err(Error::NotUnitary { residual: residue });
            }
            let r = a.re.hypot(b.re);
            let angle = if r == 0.0 {
                0.0
            } else {
                (a.re / r).clamp(0.0, 1.0).acos()
            };
            psi.push(angle);
            let (s, c) = angle.sin_cos();
            for k in 0..nss {
                let rt = omega[(t - 1, k)];
                let rl = omega[(l - 1, k)];
                omega[(t - 1, k)] = rt * c + rl * s;
                omega[(l - 1, k)] = rl * c - rt * s;
            }
        }
    }

    Ok((
        GivensAngles {
            n_tx: nt,
            n_ss: nss,
            phi,
            psi,
        },
        d_tilde,
    ))
}

/// Rebuilds `Ṽ` from the angles of one subcarrier.
pub fn givens_reconstruct(angles: &GivensAngles) -> Result<CMatrix> {
    let (nt, nss) = (angles.n_tx, angles.n_ss);
    if nss == 0 || nss > nt {
        return Err(Error::invalid(format!("angle dims {nt}x{nss} are invalid")));
    }
    let half = angle_count(nt, nss) / 2;
    if angles.phi.len() != half || angles.psi.len() != half {
        return Err(Error::invalid(format!(
            "expected {half} phi and psi angles for {nt}x{nss}, got {} and {}",
            angles.phi.len(),
            angles.psi.len()
        )));
    }

    let mut m = CMatrix::identity(nt);
    let mut phi = angles.phi.iter();
    let mut psi = angles.psi.iter();
    for t in 1..=stages(nt, nss) {
        // · D_t
        for l in t..nt {
            let d = Complex64::from_polar(1.0, *phi.next().unwrap());
            for r in 0..nt {
                m[(r, l - 1)] *= d;
            }
        }
        // · G_{ℓ,t}ᵀ
        for l in t + 1..=nt {
            let (s, c) = psi.next().unwrap().sin_cos();
            for r in 0..nt {
                let ct = m[(r, t - 1)];
                let cl = m[(r, l - 1)];
                m[(r, t - 1)] = ct * c + cl * s;
                m[(r, l - 1)] = cl * c - ct * s;
            }
        }
    }
    Ok(m.leading_columns(nss))
}

/// Decomposes every subcarrier of a beamforming matrix.
pub fn decompose_beam(bm: &BeamMatrix) -> Result<(GivensFeedback, Vec<Vec<Complex64>>)> {
    let first =
        bm.v.first()
            .ok_or_else(|| Error::invalid("beamforming matrix has no subcarriers"))?;
    let (n_tx, n_ss) = first.shape();
    let mut subcarriers = Vec::with_capacity(bm.v.len());
    let mut d = Vec::with_capacity(bm.v.len());
    for v in &bm.v {
        let (a, dt) = givens_decompose(v)?;
        subcarriers.push(a);
        d.push(dt);
    }
    Ok((
        GivensFeedback {
            n_tx,
            n_ss,
            subcarriers,
        },
        d,
    ))
}

/// Range check used by the quantizer.
pub(crate) fn check_ranges(angles: &GivensAngles) -> Result<()> {
    if let Some(p) = angles.phi.iter().find(|p| !(0.0..TAU).contains(*p)) {
        return Err(Error::invalid(format!("phi {p} outside [0, 2π)")));
    }
    if let Some(p) = angles.psi.iter().find(|p| !(0.0..=FRAC_PI_2).contains(*p)) {
        return Err(Error::invalid(format!("psi {p} outside [0, π/2]")));
    }
    Ok(())
}
