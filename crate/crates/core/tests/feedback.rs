use proptest::prelude::*;
use splitbeam::feedback::{
    accounting, compute_bm, dequantize, givens_decompose, givens_reconstruct, quantize, GivensAngles,
};
use splitbeam::tensor::{svd, Complex64};
use splitbeam::{CMatrix, NetworkConfig, QuantConfig, Rng};

fn beam(nt: usize, nss: usize, seed: u64) -> CMatrix {
    let mut rng = Rng::new(seed, 0);
    let h = CMatrix::from_fn(nt, nt, |_, _| rng.complex_normal());
    svd(&h).unwrap().v().leading_columns(nss)
}

/// `|ṽ_k† v_k|` for every column.
fn column_alignment(a: &CMatrix, b: &CMatrix) -> Vec<f64> {
    (0..a.cols())
        .map(|k| {
            let dot: Complex64 = a.column(k).iter().zip(b.column(k)).map(|(x, y)| x.conj() * y).sum();
            dot.norm()
        })
        .collect()
}

proptest! {
    #[test]
    fn angles_stay_in_range(nt in 2usize..=4, nss in 1usize..=2, seed in any::<u64>()) {
        let (a, _) = givens_decompose(&beam(nt, nss, seed)).unwrap();
        prop_assert!(a.phi.iter().all(|&p| (0.0..std::f64::consts::TAU).contains(&p)));
        prop_assert!(a.psi.iter().all(|&p| (0.0..=std::f64::consts::FRAC_PI_2).contains(&p)));
    }

    #[test]
    fn reconstruction_spans_the_same_beams(nt in 2usize..=4, nss in 1usize..=2, seed in any::<u64>()) {
        let v = beam(nt, nss, seed);
        let (a, _) = givens_decompose(&v).unwrap();
        let rebuilt = givens_reconstruct(&a).unwrap();
        prop_assert!(rebuilt.orthonormality_residual() < 1e-12);
        for g in column_alignment(&rebuilt, &v) {
            prop_assert!((g - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn real_two_antenna_example() {
    let alpha: f64 = 0.4;
    let v = CMatrix::from_real_rows(&[&[alpha.cos()], &[alpha.sin()]]);
    let (a, _) = givens_decompose(&v).unwrap();
    assert!(a.phi[0].abs() < 1e-15);
    assert!((a.psi[0] - alpha).abs() < 1e-15);
    let back = givens_reconstruct(&GivensAngles {
        phi: vec![0.0],
        psi: vec![alpha],
        ..a
    })
    .unwrap();
    assert!(back.sub(&v).max_abs() < 1e-15);
}

#[test]
fn finer_codebook_reconstructs_better() {
    let mut worst = [0.0f64; 2];
    for seed in 0..200 {
        let v = beam(4, 2, seed);
        let (a, _) = givens_decompose(&v).unwrap();
        for (slot, q) in [QuantConfig::MU_LOW, QuantConfig::MU_HIGH].into_iter().enumerate() {
            let rebuilt = givens_reconstruct(&dequantize(&quantize(&a, q).unwrap(), 4, 2, q)).unwrap();
            let loss = column_alignment(&rebuilt, &v)
                .iter()
                .map(|g| 1.0 - g)
                .fold(0.0, f64::max);
            worst[slot] = worst[slot].max(loss);
        }
    }
    assert!(worst[1] < worst[0], "{worst:?}");
    assert!(worst[1] < 1e-3);
}

#[test]
fn bm_of_rank_one_channel() {
    let h = CMatrix::from_real_rows(&[&[0.0, 2.0]]);
    let v = compute_bm(&h, 1).unwrap();
    assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-15);
}

#[test]
fn report_size_grows_with_codebook() {
    let c = NetworkConfig::symmetric(4, splitbeam::channel::Bandwidth::Mhz80).unwrap();
    let lo = accounting(&c, QuantConfig::MU_LOW, None);
    let hi = accounting(&c, QuantConfig::MU_HIGH, None);
    assert_eq!(lo.n_angles, 6);
    assert_eq!(hi.bmr_bits - lo.bmr_bits, lo.n_angles * c.n_subcarriers as u64 * 2);
    assert!(hi.cr > lo.cr);
}
