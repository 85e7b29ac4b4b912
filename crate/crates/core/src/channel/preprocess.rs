//! CSI cleanup: amplitude normalization, moving-median smoothing and
//! multi-STA alignment by sequence number.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::config::NetworkConfig;
use super::dataset::{CsiDataset, CsiTensor};
use crate::error::{Error, Result};

/// Divides every entry of each (sample, STA) block by that block's mean
/// amplitude over all subcarriers and antenna pairs.
pub fn normalize(ds: &CsiDataset) -> Result<CsiDataset> {
    let samples = ds
        .samples
        .par_iter()
        .map(|s| {
            let mut out = s.clone();
            for sta in 0..s.h.len() {
                let mean = s.mean_amplitude(sta);
                if !(mean > 0.0) {
                    return Err(Error::ZeroSample { seq: s.sequence_number });
                }
                let inv = 1.0 / mean;
                for m in out.h[sta].iter_mut() {
                    for z in m.as_mut_slice() {
                        *z *= inv;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CsiDataset { samples, ..ds.clone() })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Trailing moving median over time, applied separately to the real and
/// imaginary part of every (STA, rx, tx, subcarrier) series. The first
/// `window - 1` samples use the shorter history available.
pub fn median_smooth(ds: &CsiDataset, window: usize) -> CsiDataset {
    let mut out = ds.clone();
    if window <= 1 || ds.samples.len() < 2 {
        return out;
    }
    let cfg = &ds.config;
    let mut re = Vec::with_capacity(window);
    let mut im = Vec::with_capacity(window);
    for sta in 0..cfg.n_sta {
        for sc in 0..cfg.n_subcarriers {
            for rx in 0..cfg.n_rx_per_sta {
                for tx in 0..cfg.n_tx {
                    for t in 0..ds.samples.len() {
                        let start = (t + 1).saturating_sub(window);
                        re.clear();
                        im.clear();
                        for s in &ds.samples[start..=t] {
                            let z = s.h[sta][sc][(rx, tx)];
                            re.push(z.re);
                            im.push(z.im);
                        }
                        let z = &mut out.samples[t].h[sta][sc][(rx, tx)];
                        z.re = median(&mut re);
                        z.im = median(&mut im);
                    }
                }
            }
        }
    }
    out
}

/// Merges single-STA capture streams, keeping only sequence numbers present
/// in every stream. Timestamps come from the first stream.
pub fn align_by_sequence(streams: &[CsiDataset]) -> Result<CsiDataset> {
    let first = streams
        .first()
        .ok_or_else(|| Error::invalid("align_by_sequence needs at least one stream"))?;
    let base = first.config;
    for s in streams {
        let c = &s.config;
        if c.n_tx != base.n_tx
            || c.n_rx_per_sta != base.n_rx_per_sta
            || c.n_ss_per_sta != base.n_ss_per_sta
            || c.n_subcarriers != base.n_subcarriers
        {
            return Err(Error::invalid("streams have different dimensions"));
        }
    }

    let mut common: BTreeSet<u64> = first.samples.iter().map(|s| s.sequence_number).collect();
    for s in &streams[1..] {
        let seqs: BTreeSet<u64> = s.samples.iter().map(|t| t.sequence_number).collect();
        common = common.intersection(&seqs).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::NoCommonSamples);
    }

    let n_sta = streams.iter().map(|s| s.config.n_sta).sum();
    let config = NetworkConfig::new(
        n_sta,
        base.n_tx,
        base.n_rx_per_sta,
        base.n_ss_per_sta,
        base.n_subcarriers,
        base.bandwidth,
    )?;

    fn lookup(ds: &CsiDataset, seq: u64) -> &CsiTensor {
        // Sequence numbers are strictly increasing within a dataset.
        let idx = ds
            .samples
            .binary_search_by_key(&seq, |t| t.sequence_number)
            .expect("sequence number is in the intersection");
        &ds.samples[idx]
    }

    let samples = common
        .into_iter()
        .map(|seq| {
            let head = lookup(first, seq);
            let h = streams
                .iter()
                .flat_map(|ds| lookup(ds, seq).h.iter().cloned())
                .collect();
            CsiTensor {
                h,
                sequence_number: seq,
                timestamp_us: head.timestamp_us,
            }
        })
        .collect();

    Ok(CsiDataset {
        config,
        samples,
        provenance: first.provenance,
        seed: first.seed,
    })
}
