//! Synthetic channel generators.
//!
//! Sample `k` of a dataset always draws from `Rng::new(seed, k)`, so samples
//! are generated in parallel and the result is independent of scheduling.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::config::NetworkConfig;
use super::dataset::{CsiDataset, CsiTensor, Provenance};
use crate::error::{Error, Result};
use crate::tensor::{Complex64, Rng};

/// Sounding interval used to stamp synthetic samples.
pub const SYNTHETIC_SAMPLE_PERIOD_US: u64 = 10_000;

const DEFAULT_PROFILE: &str = include_str!("../../data/clustered_9tap.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tap {
    pub cluster: u32,
    pub delay_ns: f64,
    pub power: f64,
}

/// Power delay profile of a clustered multipath channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    pub taps: Vec<Tap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    taps: usize,
    clusters: Option<usize>,
    tap: Vec<Tap>,
}

impl TapProfile {
    /// The 9-tap, 2-cluster profile shipped in `data/clustered_9tap.toml`.
    pub fn default_clustered() -> Self {
        Self::from_toml_str(DEFAULT_PROFILE).expect("bundled tap profile is valid")
    }

    /// A single tap at zero delay: frequency-flat fading.
    pub fn flat() -> Self {
        TapProfile {
            taps: vec![Tap {
                cluster: 1,
                delay_ns: 0.0,
                power: 1.0,
            }],
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ProfileFile = toml::from_str(text).map_err(|e| Error::invalid(format!("tap profile: {e}")))?;
        if file.taps != file.tap.len() {
            return Err(Error::invalid(format!(
                "tap profile declares {} taps but lists {}",
                file.taps,
                file.tap.len()
            )));
        }
        if let Some(clusters) = file.clusters {
            let mut ids: Vec<u32> = file.tap.iter().map(|t| t.cluster).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != clusters {
                return Err(Error::invalid(format!(
                    "tap profile declares {clusters} clusters but lists {}",
                    ids.len()
                )));
            }
        }
        let profile = TapProfile { taps: file.tap };
        profile.validate()?;
        Ok(profile)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() {
            return Err(Error::invalid("tap profile has no taps"));
        }
        if self
            .taps
            .iter()
            .any(|t| !(t.power >= 0.0) || !t.delay_ns.is_finite() || t.delay_ns < 0.0)
        {
            return Err(Error::invalid("tap powers and delays must be finite and non-negative"));
        }
        let total: f64 = self.taps.iter().map(|t| t.power).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("tap powers sum to {total}, expected 1")));
        }
        Ok(())
    }
}

fn check_count(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        Err(Error::invalid("n_samples must be at least 1"))
    } else {
        Ok(())
    }
}

fn generate(
    config: &NetworkConfig,
    n_samples: usize,
    seed: u64,
    provenance: Provenance,
    draw: impl Fn(&mut Rng, &mut CsiTensor) + Sync,
) -> CsiDataset {
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = Rng::new(seed, k as u64);
            let mut t = CsiTensor::zeros(config, k as u64, k as u64 * SYNTHETIC_SAMPLE_PERIOD_US);
            draw(&mut rng, &mut t);
            t
        })
        .collect();
    CsiDataset {
        config: *config,
        samples,
        provenance,
        seed: Some(seed),
    }
}

/// I.i.d. CN(0, 1) entries, drawn in (STA, rx, tx, subcarrier) order.
pub fn gen_rayleigh(config: &NetworkConfig, n_samples: usize, seed: u64) -> Result<CsiDataset> {
    config.validate()?;
    check_count(n_samples)?;
    Ok(generate(
        config,
        n_samples,
        seed,
        Provenance::SyntheticRayleigh,
        |rng, t| {
            for sta in t.h.iter_mut() {
                for rx in 0..config.n_rx_per_sta {
                    for tx in 0..config.n_tx {
                        for m in sta.iter_mut() {
                            m[(rx, tx)] = rng.complex_normal();
                        }
                    }
                }
            }
        },
    ))
}

/// Tapped-delay-line channel: for every (STA, rx, tx) link, one complex
/// Gaussian gain per tap with the tap's power, summed into the frequency
/// response `H(s) = Σ_k g_k exp(-j2π f_s τ_k)`. STAs are independent links.
pub fn gen_clustered(config: &NetworkConfig, n_samples: usize, profile: &TapProfile, seed: u64) -> Result<CsiDataset> {
    config.validate()?;
    check_count(n_samples)?;
    profile.validate()?;

    // phase[s][k] = exp(-j 2π f_s τ_k)
    let phase: Vec<Vec<Complex64>> = (0..config.n_subcarriers)
        .map(|s| {
            let f = config.subcarrier_offset_hz(s);
            profile
                .taps
                .iter()
                .map(|tap| Complex64::from_polar(1.0, -2.0 * PI * f * tap.delay_ns * 1e-9))
                .collect()
        })
        .collect();
    let amplitude: Vec<f64> = profile.taps.iter().map(|t| t.power.sqrt()).collect();

    Ok(generate(
        config,
        n_samples,
        seed,
        Provenance::SyntheticClustered,
        |rng, t| {
            let mut gains = vec![Complex64::new(0.0, 0.0); amplitude.len()];
            for sta in t.h.iter_mut() {
                for rx in 0..config.n_rx_per_sta {
                    for tx in 0..config.n_tx {
                        for (g, a) in gains.iter_mut().zip(&amplitude) {
                            *g = rng.complex_normal() * *a;
                        }
                        for (m, ph) in sta.iter_mut().zip(&phase) {
                            m[(rx, tx)] = gains.iter().zip(ph).map(|(g, p)| g * p).sum();
                        }
                    }
                }
            }
        },
    ))
}
