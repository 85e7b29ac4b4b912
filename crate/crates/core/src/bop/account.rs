//! Feedback cost tables across network sizes and compression levels.

use serde::Serialize;

use super::cost::{flops_80211, flops_head, flops_tail};
use crate::channel::NetworkConfig;
use crate::dnn::{bottleneck_airtime_bits, ArchSpec};
use crate::error::Result;
use crate::feedback::{accounting, QuantConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccountRow {
    pub config: String,
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_subcarriers: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub arch: String,
    pub svd_flops: u64,
    pub gr_flops: u64,
    pub head_flops: u64,
    pub tail_flops: u64,
    /// Head FLOPs over SVD plus Givens FLOPs.
    pub flops_ratio: f64,
    pub bmr_bits: u64,
    pub cr: f64,
    pub splitbeam_bits: u64,
    /// Split feedback bits over the 802.11 report.
    pub airtime_ratio: f64,
}

/// One row per (config, K) with the depth-3 architecture for that level.
pub fn account_table(
    configs: &[NetworkConfig],
    ladder: &[f64],
    bottleneck_bits: u8,
    q: QuantConfig,
) -> Result<Vec<AccountRow>> {
    let mut rows = Vec::new();
    for c in configs {
        let (svd, gr) = flops_80211(c);
        let acc = accounting(c, q, None);
        for &k in ladder {
            let arch = ArchSpec::ladder(c.flat_input_len(), c.flat_output_len(), k, 3)?;
            let head = flops_head(&arch)?;
            let bits = bottleneck_airtime_bits(arch.bottleneck_width(), bottleneck_bits);
            rows.push(AccountRow {
                config: c.label(),
                n_tx: c.n_tx,
                n_rx: c.n_rx_per_sta,
                n_subcarriers: c.n_subcarriers,
                k,
                arch: arch.label(),
                svd_flops: svd,
                gr_flops: gr,
                head_flops: head,
                tail_flops: flops_tail(&arch)?,
                flops_ratio: head as f64 / (svd + gr) as f64,
                bmr_bits: acc.bmr_bits,
                cr: acc.cr,
                splitbeam_bits: bits,
                airtime_ratio: bits as f64 / acc.bmr_bits as f64,
            });
        }
    }
    Ok(rows)
}
