//! Zero-forcing precoder `W = H_EQ (H_EQ† H_EQ)⁻¹`.
//!
//! Computed through the SVD `H_EQ = U Σ V†` as `W = U Σ⁻¹ V†`, which avoids
//! forming the Gram matrix. The condition number of `H_EQ† H_EQ` is
//! `(σ_max / σ_min)²`.

use crate::error::{Error, Result};
use crate::tensor::{svd, CMatrix, Complex64};

/// Largest accepted condition number of `H_EQ† H_EQ`.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct ZfPrecoder {
    /// N_t × K precoder.
    pub w: CMatrix,
    /// Squared norm of each column of `w`.
    pub column_power: Vec<f64>,
    pub condition: f64,
}

impl ZfPrecoder {
    pub fn total_power(&self) -> f64 {
        self.column_power.iter().sum()
    }
}

pub fn zf_precoder(h_eq: &CMatrix) -> Result<ZfPrecoder> {
    let (nt, k) = h_eq.shape();
    if k == 0 || k > nt {
        return Err(Error::invalid(format!(
            "effective channel must be N_t x K with 1 <= K <= N_t, got {nt}x{k}"
        )));
    }
    let d = svd(h_eq)?;
    let s_max = d.sigma[0];
    let s_min = d.sigma[k - 1];
    let condition = if s_min > 0.0 {
        (s_max / s_min).powi(2)
    } else {
        f64::INFINITY
    };
    if !(condition < MAX_CONDITION) {
        return Err(Error::SingularEffectiveChannel { condition });
    }
    // W = U_K Σ⁻¹ V†
    let v = d.v();
    let mut w = CMatrix::zeros(nt, k);
    for j in 0..k {
        let inv = 1.0 / d.sigma[j];
        for r in 0..nt {
            let u = d.u[(r, j)] * inv;
            for c in 0..k {
                w[(r, c)] += u * v[(c, j)].conj();
            }
        }
    }
    let column_power = (0..k).map(|c| (0..nt).map(|r| w[(r, c)].norm_sqr()).sum()).collect();
    Ok(ZfPrecoder {
        w,
        column_power,
        condition,
    })
}

/// Precoder scaled to unit total power.
pub fn normalize_total_power(p: &ZfPrecoder) -> CMatrix {
    let scale = 1.0 / p.total_power().sqrt();
    p.w.scale(Complex64::new(scale, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;

    #[test]
    fn orthonormal_columns_are_their_own_precoder() {
        let h = CMatrix::eye(3, 2);
        let p = zf_precoder(&h).unwrap();
        assert!(p.w.sub(&h).max_abs() < 1e-14);
    }

    #[test]
    fn random_residual() {
        let mut rng = Rng::new(21, 0);
        for _ in 0..100 {
            let h = CMatrix::from_fn(4, 2, |_, _| rng.complex_normal());
            let p = zf_precoder(&h).unwrap();
            let resid = h.adjoint_mul(&p.w).sub(&CMatrix::identity(2)).max_abs();
            assert!(resid <= 1e-10, "{resid}");
        }
    }

    #[test]
    fn duplicated_columns_are_singular() {
        let mut rng = Rng::new(2, 2);
        let col: Vec<Complex64> = (0..3).map(|_| rng.complex_normal()).collect();
        let h = CMatrix::from_fn(3, 2, |r, _| col[r]);
        assert!(matches!(zf_precoder(&h), Err(Error::SingularEffectiveChannel { .. })));
    }
}
