//! Size of the compressed beamforming report.
//!
//! BMR = 8·N_t + N_a·S·(b_φ + b_ψ)/2 bits, and the compression ratio relative
//! to raw CSI at 16 bits per entry is CR = BMR / (S·N_t·N_r·16).

use serde::Serialize;

use super::givens::angle_count;
use super::QuantConfig;
use crate::channel::NetworkConfig;

/// Bits per raw CSI entry in the compression-ratio denominator.
pub const RAW_CSI_BITS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeedbackAccounting {
    /// N_a, φ and ψ angles together, per subcarrier.
    pub n_angles: u64,
    /// Angle bits over all subcarriers.
    pub angle_payload_bits: u64,
    /// The 8·N_t header term.
    pub header_bits: u64,
    pub bmr_bits: u64,
    pub cr: f64,
}

/// Per-STA report size. With `bits_per_angle_override`, every angle costs that
/// many bits instead of the (b_φ + b_ψ)/2 average.
pub fn accounting(config: &NetworkConfig, q: QuantConfig, bits_per_angle_override: Option<u32>) -> FeedbackAccounting {
    let nt = config.n_tx as u64;
    let s = config.n_subcarriers as u64;
    let n_angles = angle_count(config.n_tx, config.n_ss_per_sta) as u64;
    let angle_payload_bits = match bits_per_angle_override {
        Some(b) => n_angles * s * b as u64,
        // (b_φ + b_ψ) is even because b_ψ = b_φ − 2.
        None => n_angles * s * (q.b_phi() as u64 + q.b_psi() as u64) / 2,
    };
    let header_bits = 8 * nt;
    let bmr_bits = header_bits + angle_payload_bits;
    let raw = s * nt * config.n_rx_per_sta as u64 * RAW_CSI_BITS;
    FeedbackAccounting {
        n_angles,
        angle_payload_bits,
        header_bits,
        bmr_bits,
        cr: bmr_bits as f64 / raw as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Bandwidth;

    #[test]
    fn two_by_two_ratio() {
        let c = NetworkConfig::symmetric(2, Bandwidth::Mhz20).unwrap();
        let a = accounting(&c, QuantConfig::MU_HIGH, None);
        assert_eq!(a.n_angles, 2);
        assert_eq!(a.bmr_bits, 16 + 16 * 56);
        assert_eq!(a.cr, 912.0 / 1792.0);
    }

    #[test]
    fn three_by_three_ratio() {
        let c = NetworkConfig::symmetric(3, Bandwidth::Mhz20).unwrap();
        let a = accounting(&c, QuantConfig::MU_HIGH, None);
        assert_eq!(a.bmr_bits, 24 + 32 * 56);
        assert!((a.cr - 0.676).abs() < 5e-4);
    }

    #[test]
    fn eight_streams_sixteen_bit_angles() {
        let c = NetworkConfig::new(1, 8, 8, 8, 486, Bandwidth::Mhz160).unwrap();
        let a = accounting(&c, QuantConfig::MU_HIGH, Some(16));
        assert_eq!(a.n_angles, 56);
        assert_eq!(a.angle_payload_bits, 435_456);
        assert_eq!(a.bmr_bits, 435_456 + 64);
    }
}
