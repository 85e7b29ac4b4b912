//! Computation, feedback-size and latency accounting.
//!
//! FLOP counts use 1 MAC = 2 FLOPs for the dense layers, and the 802.11
//! complexity expressions evaluated with unit constants:
//! SVD `(4 N_t N_r² + 22 N_t³) S`, Givens rotation `N_t³ N_r³ S`.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkConfig;
use crate::dnn::{bottleneck_airtime_bits, ArchSpec};
use crate::error::{Error, Result};
use crate::feedback::{accounting, QuantConfig};

/// `(svd, givens)` operation counts of the 802.11 feedback computation at one STA.
pub fn flops_80211(config: &NetworkConfig) -> (u64, u64) {
    let nt = config.n_tx as u64;
    let nr = config.n_rx_per_sta as u64;
    let s = config.n_subcarriers as u64;
    ((4 * nt * nr * nr + 22 * nt * nt * nt) * s, nt.pow(3) * nr.pow(3) * s)
}

pub fn flops_head(arch: &ArchSpec) -> Result<u64> {
    arch.validate()?;
    Ok(2 * arch.head_macs())
}

pub fn flops_tail(arch: &ArchSpec) -> Result<u64> {
    arch.validate()?;
    Ok(2 * arch.tail_macs())
}

/// Per-STA feedback bits `(split, 802.11)`: the quantized bottleneck with its
/// range header against the compressed beamforming report.
pub fn airtime_bits(config: &NetworkConfig, arch: &ArchSpec, bottleneck_bits: u8, q: QuantConfig) -> (u64, u64) {
    (
        bottleneck_airtime_bits(arch.bottleneck_width(), bottleneck_bits),
        accounting(config, q, None).bmr_bits,
    )
}

/// Throughputs that turn operation and bit counts into time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DevicePlatform {
    pub sta_flops_per_s: f64,
    pub ap_flops_per_s: f64,
    pub link_rate_bps: f64,
}

impl DevicePlatform {
    /// Calibrated so the 224-28-28-224 model on two STAs totals about 0.0202 ms.
    pub const REFERENCE: DevicePlatform = DevicePlatform {
        sta_flops_per_s: 2.5e9,
        ap_flops_per_s: 4.95e9,
        link_rate_bps: 54e6,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = [self.sta_flops_per_s, self.ap_flops_per_s, self.link_rate_bps]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("platform throughputs must be positive"))
        }
    }
}

impl Default for DevicePlatform {
    fn default() -> Self {
        Self::REFERENCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Latency {
    /// Head time of the slowest STA.
    pub t_head_ms: f64,
    /// Airtime of the slowest STA.
    pub t_air_ms: f64,
    pub t_tail_ms: f64,
    /// `max_i(t_head_i + t_air_i) + t_tail`.
    pub total_ms: f64,
}

/// End-to-end delay for STAs with the given head FLOPs and feedback bits;
/// the AP runs `tail_flops` in total.
pub fn latency(
    head_flops: &[u64],
    feedback_bits: &[u64],
    tail_flops: u64,
    platform: &DevicePlatform,
) -> Result<Latency> {
    platform.validate()?;
    if head_flops.len() != feedback_bits.len() || head_flops.is_empty() {
        return Err(Error::invalid("need one head FLOP count and one bit count per STA"));
    }
    let mut crit = (0.0, 0.0);
    for (&f, &b) in head_flops.iter().zip(feedback_bits) {
        let h = 1e3 * f as f64 / platform.sta_flops_per_s;
        let a = 1e3 * b as f64 / platform.link_rate_bps;
        if h + a > crit.0 + crit.1 {
            crit = (h, a);
        }
    }
    let t_tail_ms = 1e3 * tail_flops as f64 / platform.ap_flops_per_s;
    Ok(Latency {
        t_head_ms: crit.0,
        t_air_ms: crit.1,
        t_tail_ms,
        total_ms: crit.0 + crit.1 + t_tail_ms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    pub head_flops: u64,
    pub tail_flops: u64,
    pub svd_flops: u64,
    pub gr_flops: u64,
    pub feedback_bits_splitbeam: u64,
    pub feedback_bits_80211: u64,
    pub t_head_ms: f64,
    pub t_air_ms: f64,
    pub t_tail_ms: f64,
    pub t_total_ms: f64,
    pub objective: f64,
}

/// Costs of running `arch` for every STA of `config`; `objective` is left at
/// zero until candidates are ranked against each other.
pub fn cost_report(
    config: &NetworkConfig,
    arch: &ArchSpec,
    bottleneck_bits: u8,
    q: QuantConfig,
    platform: &DevicePlatform,
) -> Result<CostReport> {
    let head = flops_head(arch)?;
    let tail = flops_tail(arch)?;
    let (svd_flops, gr_flops) = flops_80211(config);
    let (split_bits, bmr) = airtime_bits(config, arch, bottleneck_bits, q);
    let n = config.n_sta;
    let lat = latency(&vec![head; n], &vec![split_bits; n], tail * n as u64, platform)?;
    Ok(CostReport {
        head_flops: head,
        tail_flops: tail,
        svd_flops,
        gr_flops,
        feedback_bits_splitbeam: split_bits,
        feedback_bits_80211: bmr,
        t_head_ms: lat.t_head_ms,
        t_air_ms: lat.t_air_ms,
        t_tail_ms: lat.t_tail_ms,
        t_total_ms: lat.total_ms,
        objective: 0.0,
    })
}

/// Per-STA weighted cost `Σ_i μ·L̂_i + (1−μ)·T̂_i` of every candidate, where
/// FLOPs and airtime are min-max normalized over the candidate set.
pub fn objective(flops: &[f64], airtime: &[f64], mu: f64, n_sta: usize) -> Result<Vec<f64>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::invalid(format!("mu must lie in (0, 1), got {mu}")));
    }
    if flops.len() != airtime.len() {
        return Err(Error::invalid("flops and airtime lists differ in length"));
    }
    let norm = |v: &[f64]| -> Vec<f64> {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        v.iter()
            .map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
            .collect()
    };
    let (f, a) = (norm(flops), norm(airtime));
    Ok(f.iter()
        .zip(&a)
        .map(|(f, a)| n_sta as f64 * (mu * f + (1.0 - mu) * a))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Bandwidth;

    #[test]
    fn flops_80211_examples() {
        let c = NetworkConfig::symmetric(2, Bandwidth::Mhz20).unwrap();
        assert_eq!(flops_80211(&c), (10_304, 448));
        let big = NetworkConfig::new(1, 8, 8, 8, 486, Bandwidth::Mhz160).unwrap();
        assert_eq!(flops_80211(&big).0, 6_469_632);
    }

    #[test]
    fn reference_latency() {
        let c = NetworkConfig::symmetric(2, Bandwidth::Mhz20).unwrap();
        let arch = ArchSpec::ladder(224, 224, 0.125, 3).unwrap();
        let r = cost_report(&c, &arch, 16, QuantConfig::MU_HIGH, &DevicePlatform::REFERENCE).unwrap();
        assert_eq!(r.feedback_bits_splitbeam, 512);
        assert_eq!(r.feedback_bits_80211, 912);
        assert!((r.t_total_ms - 0.0202).abs() < 5e-5, "{}", r.t_total_ms);
    }

    #[test]
    fn latency_linearity_and_zero_bits() {
        let p = DevicePlatform::REFERENCE;
        let a = latency(&[1000], &[0], 0, &p).unwrap();
        let b = latency(&[2000], &[0], 0, &p).unwrap();
        assert_eq!(a.t_air_ms, 0.0);
        assert!((b.t_head_ms - 2.0 * a.t_head_ms).abs() < 1e-18);
    }

    #[test]
    fn objective_crossover() {
        // (flops, airtime) = (1, 0) and (0, 1): indifferent at mu = 0.5.
        let f = [10.0, 20.0];
        let a = [200.0, 100.0];
        let lo = objective(&f, &a, 0.3, 1).unwrap();
        let hi = objective(&f, &a, 0.7, 1).unwrap();
        assert!(lo[1] < lo[0]);
        assert!(hi[0] < hi[1]);
        assert!(objective(&f, &a, 1.0, 1).is_err());
    }
}
