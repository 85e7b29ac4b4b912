//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy of `A` are orthogonalized pairwise by complex
//! plane rotations that are accumulated into `V`. At convergence
//! `A·V = [σ₁u₁ … σₙuₙ]`, so the column norms are the singular values and
//! the normalized columns are the left singular vectors. The matrices here
//! are at most 16×16, where this is both simple and accurate.
//!
//! Output is canonicalized: each right singular vector is rotated so its
//! largest-magnitude entry (lowest index on ties) is real and non-negative,
//! with the matching left vector rotated by the same phase.

use num_complex::Complex64;

use super::matrix::{CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;
/// Singular values below this fraction of the largest get a completed left vector.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Svd {
    /// m×m unitary.
    pub u: CMatrix,
    /// min(m, n) values, non-increasing.
    pub sigma: Vec<f64>,
    /// n×n unitary, the adjoint of the right singular vectors.
    pub vdag: CMatrix,
}

impl Svd {
    /// Right singular vectors as columns (n×n).
    pub fn v(&self) -> CMatrix {
        self.vdag.adjoint()
    }

    /// `u · diag(sigma) · vdag`.
    pub fn reconstruct(&self) -> CMatrix {
        let (m, n) = (self.u.rows(), self.vdag.rows());
        let mut us = CMatrix::zeros(m, n);
        for (k, &s) in self.sigma.iter().enumerate() {
            for r in 0..m {
                us[(r, k)] = self.u[(r, k)] * s;
            }
        }
        us.matmul(&self.vdag)
    }
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("svd input contains non-finite entries"));
    }
    if a.max_abs() == 0.0 {
        return Ok(Svd {
            u: CMatrix::identity(m),
            sigma: vec![0.0; m.min(n)],
            vdag: CMatrix::identity(n),
        });
    }

    let mut work = a.clone();
    let mut v = CMatrix::identity(n);
    // Inner products below this are rounding noise between numerically null
    // columns; rotating them only degrades V.
    let floor = (f64::EPSILON * a.frobenius_norm()).powi(2);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for r in 0..m {
                    let ap = work[(r, p)];
                    let aq = work[(r, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g <= floor || g <= OFF_DIAGONAL_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut work, p, q, c, s, phase_conj);
                rotate_columns(&mut v, p, q, c, s, phase_conj);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|k| (0..m).map(|r| work[(r, k)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let rank_cut = norms[order[0]] * RANK_TOL;
    let k_min = m.min(n);
    let mut v_sorted = CMatrix::zeros(n, n);
    let mut u = CMatrix::zeros(m, m);
    let mut sigma = Vec::with_capacity(k_min);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            v_sorted[(r, dst)] = v[(r, src)];
        }
        if dst < k_min {
            sigma.push(norms[src]);
            if norms[src] > rank_cut {
                for r in 0..m {
                    u[(r, dst)] = work[(r, src)] / norms[src];
                }
            }
        }
    }
    complete_orthonormal_basis(&mut u);

    // Canonical phase.
    for k in 0..n {
        let col = v_sorted.column(k);
        let pivot = canonical_pivot(&col);
        let z = col[pivot];
        if z.norm() == 0.0 {
            continue;
        }
        let rot = (z / z.norm()).conj();
        for r in 0..n {
            v_sorted[(r, k)] *= rot;
        }
        if k < m {
            for r in 0..m {
                u[(r, k)] *= rot;
            }
        }
    }

    Ok(Svd {
        u,
        sigma,
        vdag: v_sorted.adjoint(),
    })
}

/// Index of the largest-magnitude entry, preferring the lowest index among
/// entries equal to the maximum up to rounding.
pub fn canonical_pivot(col: &[Complex64]) -> usize {
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    col.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0)
}

/// Rotate each column so its largest-magnitude entry is real non-negative.
pub fn canonicalize_columns(m: &mut CMatrix) {
    for k in 0..m.cols() {
        let col = m.column(k);
        let z = col[canonical_pivot(&col)];
        if z.norm() == 0.0 {
            continue;
        }
        let rot = (z / z.norm()).conj();
        for r in 0..m.rows() {
            m[(r, k)] *= rot;
        }
    }
}

fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase_conj: Complex64) {
    for r in 0..m.rows() {
        let ap = m[(r, p)];
        let aq = m[(r, q)] * phase_conj;
        m[(r, p)] = ap * c - aq * s;
        m[(r, q)] = ap * s + aq * c;
    }
}

/// Replace the all-zero columns of `u` with unit vectors orthogonal to every
/// other column, drawn from the standard basis by Gram–Schmidt (applied twice).
fn complete_orthonormal_basis(u: &mut CMatrix) {
    let m = u.rows();
    let empty: Vec<usize> = (0..m).filter(|&k| (0..m).all(|r| u[(r, k)] == ZERO)).collect();
    let mut basis = 0..m;
    for slot in empty {
        for e in basis.by_ref() {
            let mut cand: Vec<Complex64> = (0..m).map(|r| if r == e { ONE } else { ZERO }).collect();
            for _ in 0..2 {
                for k in 0..m {
                    let col = u.column(k);
                    let proj: Complex64 = col.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
                    for (c, a) in cand.iter_mut().zip(&col) {
                        *c -= proj * a;
                    }
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for (r, z) in cand.iter().enumerate() {
                    u[(r, slot)] = z / norm;
                }
                break;
            }
        }
    }
}
