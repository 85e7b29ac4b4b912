//! Link-level BER simulation of zero-forcing MU-MIMO over measured or
//! synthetic per-subcarrier CSI.
//!
//! For every CSI sample and subcarrier the AP stacks the STAs' beamforming
//! matrices into `H_EQ = [V_1 … V_Ns]`, derives the ZF precoder `W`, and sends
//! one 16-QAM symbol per stream. STA `i` receives
//! `y_i = √(ρ/N_t) H_i W x + n_i` with `n_i ~ CN(0, I)`, combines, divides by
//! its known effective gain and slices. Each sample draws payload and noise
//! from its own RNG stream, so results do not depend on evaluation order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bcc::{bcc_encode, viterbi_decode};
use super::qam::{qam16_demod_into, qam16_symbol, BITS_PER_SYMBOL};
use super::zf::{normalize_total_power, zf_precoder};
use crate::channel::{CsiDataset, CsiTensor, NetworkConfig};
use crate::dnn::{data::unflatten, dequantize_bottleneck, flatten, quantize_bottleneck, SplitModel};
use crate::error::{Error, Result};
use crate::feedback::{compute_bm, dequantize, givens_decompose, givens_reconstruct, quantize, QuantConfig};
use crate::harness::sha256_hex;
use crate::tensor::{svd, CMatrix, Complex64, Rng, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    #[default]
    None,
    BccR12,
}

/// Receive processing for STAs with more than one antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    /// Left singular vectors of the STA's own channel, `u_k†`.
    #[default]
    DominantMode,
    /// Pseudo-inverse of the STA's effective channel to its own streams.
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyConfig {
    /// SNR ρ in dB; `inf` disables noise.
    pub snr_db: f64,
    /// Frames per CSI sample.
    pub n_frames: usize,
    /// Payload bits per stream and frame; defaults to one 16-QAM symbol per
    /// subcarrier (4·S) when unset.
    pub bits_per_frame: Option<usize>,
    pub coding: Coding,
    pub seed: u64,
    pub combining: Combining,
    /// Scale W to unit total power instead of using it as computed.
    pub normalize_power: bool,
}

impl Default for PhyConfig {
    fn default() -> Self {
        PhyConfig {
            snr_db: 20.0,
            n_frames: 1,
            bits_per_frame: None,
            coding: Coding::None,
            seed: 0,
            combining: Combining::DominantMode,
            normalize_power: false,
        }
    }
}

impl PhyConfig {
    pub fn noiseless() -> Self {
        PhyConfig {
            snr_db: f64::INFINITY,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::invalid("n_frames must be at least 1"));
        }
        if self.bits_per_frame == Some(0) {
            return Err(Error::invalid("bits_per_frame must be positive"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::invalid("snr_db must be a number or +inf"));
        }
        Ok(())
    }

    pub fn payload_bits(&self, n_subcarriers: usize) -> usize {
        self.bits_per_frame.unwrap_or(BITS_PER_SYMBOL * n_subcarriers)
    }
}

/// Where the AP's beamforming matrices come from.
#[derive(Debug, Clone, Copy)]
pub enum BmSource<'a> {
    /// Exact SVD of the true channel.
    IdealSvd,
    /// 802.11 Givens feedback, quantized unless `quant` is `None`.
    Givens { quant: Option<QuantConfig> },
    /// The split network, with the bottleneck quantized to `bottleneck_bits`
    /// unless `None`. `normalize_columns` rescales each output column to
    /// unit norm.
    Split {
        model: &'a SplitModel,
        bottleneck_bits: Option<u8>,
        normalize_columns: bool,
    },
    /// Diagnostic: `W = I`, no precoding.
    Identity,
}

impl BmSource<'_> {
    pub fn label(&self) -> String {
        match self {
            BmSource::IdealSvd => "ideal".into(),
            BmSource::Givens { quant: None } => "givens".into(),
            BmSource::Givens { quant: Some(q) } => format!("givens_b{}", q.b_phi()),
            BmSource::Split {
                model,
                bottleneck_bits,
                normalize_columns,
            } => {
                let bits = bottleneck_bits.map_or("f64".to_string(), |b| format!("q{b}"));
                let norm = if *normalize_columns { "_norm" } else { "" };
                format!("split_{}_{bits}{norm}", model.arch.label())
            }
            BmSource::Identity => "identity".into(),
        }
    }

    fn check(&self, config: &NetworkConfig) -> Result<()> {
        match self {
            BmSource::Split {
                model, bottleneck_bits, ..
            } => {
                let per_sta_in = config.flat_input_len();
                let per_sta_out = config.flat_output_len();
                if model.arch.input_len() != per_sta_in || model.arch.output_len() != per_sta_out {
                    return Err(Error::invalid(format!(
                        "model {} does not fit {} (needs {per_sta_in} inputs, {per_sta_out} outputs)",
                        model.arch.label(),
                        config.label()
                    )));
                }
                if let Some(b) = bottleneck_bits {
                    quantize_bottleneck(&[], *b)?;
                }
                Ok(())
            }
            BmSource::Identity if config.total_streams() != config.n_tx => Err(Error::invalid(
                "identity precoding needs as many streams as transmit antennas",
            )),
            _ => Ok(()),
        }
    }

    /// Beamforming matrices `[sta][subcarrier]`, each `N_t × N_ss`.
    pub fn beams(&self, sample: &CsiTensor, config: &NetworkConfig) -> Result<Vec<Vec<CMatrix>>> {
        let n_ss = config.n_ss_per_sta;
        sample
            .h
            .iter()
            .map(|h_sta| match self {
                BmSource::IdealSvd | BmSource::Identity => h_sta.iter().map(|h| compute_bm(h, n_ss)).collect(),
                BmSource::Givens { quant } => h_sta
                    .iter()
                    .map(|h| {
                        let v = compute_bm(h, n_ss)?;
                        let (angles, _) = givens_decompose(&v)?;
                        let angles = match quant {
                            Some(q) => dequantize(&quantize(&angles, *q)?, angles.n_tx, angles.n_ss, *q),
                            None => angles,
                        };
                        givens_reconstruct(&angles)
                    })
                    .collect(),
                BmSource::Split {
                    model,
                    bottleneck_bits,
                    normalize_columns,
                } => {
                    let mut z = model.infer_head(&flatten(h_sta))?;
                    if let Some(b) = bottleneck_bits {
                        z = dequantize_bottleneck(&quantize_bottleneck(&z, *b)?);
                    }
                    let y = model.infer_tail(&z)?;
                    let mut v = unflatten(&y, config.n_tx, n_ss, h_sta.len())?;
                    if *normalize_columns {
                        for m in &mut v {
                            normalize_columns_in_place(m);
                        }
                    }
                    Ok(v)
                }
            })
            .collect()
    }
}

fn normalize_columns_in_place(m: &mut CMatrix) {
    for c in 0..m.cols() {
        let n = m.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            for r in 0..m.rows() {
                m[(r, c)] /= n;
            }
        }
    }
}

/// Per-stream link after precoding on one subcarrier.
struct StreamLink {
    sta: usize,
    /// Combined effective row `c H_i W`, one entry per stream.
    gains: Vec<Complex64>,
    /// Receive combiner applied to the STA's noise vector.
    combiner: Vec<Complex64>,
}

/// Precoder for one subcarrier, or `None` when the effective channel is
/// too ill-conditioned to invert.
fn precoder(
    beams: &[Vec<CMatrix>],
    s: usize,
    source: &BmSource,
    phy: &PhyConfig,
    n_tx: usize,
) -> Result<Option<CMatrix>> {
    if let BmSource::Identity = source {
        return Ok(Some(CMatrix::identity(n_tx)));
    }
    let cols: Vec<&CMatrix> = beams.iter().map(|b| &b[s]).collect();
    let h_eq = CMatrix::hstack(&cols)?;
    match zf_precoder(&h_eq) {
        Ok(p) if phy.normalize_power => Ok(Some(normalize_total_power(&p))),
        Ok(p) => Ok(Some(p.w)),
        Err(Error::SingularEffectiveChannel { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn links(
    sample: &CsiTensor,
    w: &CMatrix,
    s: usize,
    config: &NetworkConfig,
    phy: &PhyConfig,
) -> Result<Vec<StreamLink>> {
    let n_ss = config.n_ss_per_sta;
    let mut out = Vec::with_capacity(config.total_streams());
    for (i, h_sta) in sample.h.iter().enumerate() {
        let h = &h_sta[s];
        let hw = h.matmul(w);
        let nr = h.rows();
        // Combiner rows, one per own stream.
        let comb: Vec<Vec<Complex64>> = if nr == 1 {
            vec![vec![Complex64::new(1.0, 0.0)]]
        } else {
            match phy.combining {
                Combining::DominantMode => {
                    let u = svd(h)?.u;
                    (0..n_ss)
                        .map(|k| u.column(k).iter().map(|z| z.conj()).collect())
                        .collect()
                }
                Combining::LeastSquares => {
                    let own = CMatrix::from_fn(nr, n_ss, |r, c| hw[(r, i * n_ss + c)]);
                    let d = svd(&own)?;
                    let v = d.v();
                    // pinv = V Σ⁻¹ U†, rows over own streams.
                    (0..n_ss)
                        .map(|k| {
                            (0..nr)
                                .map(|r| {
                                    (0..n_ss)
                                        .filter(|&j| d.sigma[j] > 0.0)
                                        .map(|j| v[(k, j)] * d.u[(r, j)].conj() / d.sigma[j])
                                        .sum()
                                })
                                .collect()
                        })
                        .collect()
                }
            }
        };
        for c in comb {
            let gains = (0..hw.cols())
                .map(|col| (0..nr).map(|r| c[r] * hw[(r, col)]).sum())
                .collect();
            out.push(StreamLink {
                sta: i,
                gains,
                combiner: c,
            });
        }
    }
    Ok(out)
}

struct Tally {
    errors: Vec<u64>,
    bits: Vec<u64>,
    skipped: bool,
}

fn simulate_sample(
    sample: &CsiTensor,
    index: u64,
    config: &NetworkConfig,
    source: &BmSource,
    phy: &PhyConfig,
) -> Result<Tally> {
    let n_sta = config.n_sta;
    let mut tally = Tally {
        errors: vec![0; n_sta],
        bits: vec![0; n_sta],
        skipped: false,
    };
    let n_sc = config.n_subcarriers;
    let beams = source.beams(sample, config)?;
    let mut per_sc = Vec::with_capacity(n_sc);
    for s in 0..n_sc {
        match precoder(&beams, s, source, phy, config.n_tx)? {
            Some(w) => per_sc.push(links(sample, &w, s, config, phy)?),
            None => {
                tally.skipped = true;
                return Ok(tally);
            }
        }
    }

    let mut rng = Rng::new(phy.seed, index);
    let n_streams = config.total_streams();
    let n_info = phy.payload_bits(n_sc);
    let coded_len = match phy.coding {
        Coding::None => n_info,
        Coding::BccR12 => 2 * (n_info + super::bcc::TAIL_BITS),
    };
    let n_sym = coded_len.div_ceil(BITS_PER_SYMBOL);
    let noisy = phy.snr_db.is_finite();
    let amp = if noisy {
        (10f64.powf(phy.snr_db / 10.0) / config.n_tx as f64).sqrt()
    } else {
        1.0
    };
    let nr = config.n_rx_per_sta;

    for _ in 0..phy.n_frames {
        let payload: Vec<Vec<u8>> = (0..n_streams)
            .map(|_| (0..n_info).map(|_| rng.bit()).collect())
            .collect();
        let symbols: Vec<Vec<Complex64>> = payload
            .iter()
            .map(|p| {
                let mut tx = match phy.coding {
                    Coding::None => p.clone(),
                    Coding::BccR12 => bcc_encode(p),
                };
                tx.resize(n_sym * BITS_PER_SYMBOL, 0);
                tx.chunks_exact(BITS_PER_SYMBOL).map(qam16_symbol).collect()
            })
            .collect();
        let mut rx_bits: Vec<Vec<u8>> = vec![Vec::with_capacity(n_sym * BITS_PER_SYMBOL); n_streams];
        let mut x = vec![ZERO; n_streams];
        let mut noise = vec![ZERO; n_sta * nr];
        for m in 0..n_sym {
            let s = m % n_sc;
            for (g, xs) in x.iter_mut().enumerate() {
                *xs = symbols[g][m];
            }
            for n in noise.iter_mut() {
                *n = rng.complex_normal();
            }
            for (g, link) in per_sc[s].iter().enumerate() {
                let mut r: Complex64 = link.gains.iter().zip(&x).map(|(a, b)| a * b).sum::<Complex64>() * amp;
                if noisy {
                    let n_sta_i = &noise[link.sta * nr..(link.sta + 1) * nr];
                    r += link.combiner.iter().zip(n_sta_i).map(|(c, n)| c * n).sum::<Complex64>();
                }
                qam16_demod_into(r / (link.gains[g] * amp), &mut rx_bits[g]);
            }
        }
        for (g, (sent, got)) in payload.iter().zip(rx_bits.iter_mut()).enumerate() {
            got.truncate(coded_len);
            let decoded = match phy.coding {
                Coding::None => std::mem::take(got),
                Coding::BccR12 => viterbi_decode(got)?,
            };
            let sta = per_sc[0][g].sta;
            tally.errors[sta] += sent.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
            tally.bits[sta] += n_info as u64;
        }
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaBer {
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub per_sta: Vec<StaBer>,
    /// Mean of the per-STA BERs.
    pub mean_ber: f64,
    pub skipped_samples: u64,
    /// SHA-256 over the network, PHY settings, source label and sample count.
    pub config_digest: String,
}

impl BerReport {
    pub fn total_errors(&self) -> u64 {
        self.per_sta.iter().map(|s| s.errors).sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.per_sta.iter().map(|s| s.bits).sum()
    }

    /// Standard error of the pooled BER estimate, treating bits as
    /// independent trials.
    pub fn standard_error(&self) -> f64 {
        let n = self.total_bits() as f64;
        let p = self.total_errors() as f64 / n;
        (p * (1.0 - p) / n).sqrt()
    }
}

fn digest(ds: &CsiDataset, source: &BmSource, phy: &PhyConfig) -> String {
    let value = serde_json::json!({
        "network": ds.config,
        "phy": phy,
        "source": source.label(),
        "n_samples": ds.len(),
    });
    sha256_hex(value.to_string().as_bytes())
}

/// Bit error rate of `source` over every sample of `ds`. Samples whose
/// effective channel cannot be inverted on some subcarrier are skipped and
/// counted in the report.
pub fn simulate_ber(ds: &CsiDataset, source: &BmSource, phy: &PhyConfig) -> Result<BerReport> {
    phy.validate()?;
    ds.validate()?;
    source.check(&ds.config)?;
    if ds.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    let tallies = ds
        .samples
        .par_iter()
        .enumerate()
        .map(|(j, sample)| simulate_sample(sample, j as u64, &ds.config, source, phy))
        .collect::<Result<Vec<_>>>()?;
    let n_sta = ds.config.n_sta;
    let mut errors = vec![0u64; n_sta];
    let mut bits = vec![0u64; n_sta];
    let mut skipped = 0u64;
    for t in &tallies {
        skipped += t.skipped as u64;
        for i in 0..n_sta {
            errors[i] += t.errors[i];
            bits[i] += t.bits[i];
        }
    }
    if skipped == ds.len() as u64 {
        return Err(Error::SingularEffectiveChannel {
            condition: f64::INFINITY,
        });
    }
    let per_sta: Vec<StaBer> = errors
        .iter()
        .zip(&bits)
        .map(|(&e, &b)| StaBer {
            errors: e,
            bits: b,
            ber: e as f64 / b as f64,
        })
        .collect();
    let mean_ber = per_sta.iter().map(|s| s.ber).sum::<f64>() / n_sta as f64;
    Ok(BerReport {
        per_sta,
        mean_ber,
        skipped_samples: skipped,
        config_digest: digest(ds, source, phy),
    })
}

/// Largest cross-stream gain `|c_k H_i W e_l|`, `l ≠ k`, over every sample
/// and subcarrier.
pub fn max_interference(ds: &CsiDataset, source: &BmSource, phy: &PhyConfig) -> Result<f64> {
    source.check(&ds.config)?;
    let per_sample = ds
        .samples
        .par_iter()
        .map(|sample| {
            let beams = source.beams(sample, &ds.config)?;
            let mut worst = 0.0f64;
            for s in 0..ds.config.n_subcarriers {
                if let Some(w) = precoder(&beams, s, source, phy, ds.config.n_tx)? {
                    for (g, link) in links(sample, &w, s, &ds.config, phy)?.iter().enumerate() {
                        for (l, gain) in link.gains.iter().enumerate() {
                            if l != g {
                                worst = worst.max(gain.norm());
                            }
                        }
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_sample.into_iter().fold(0.0, f64::max))
}
