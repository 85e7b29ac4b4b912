use serde::{Deserialize, Serialize};

use super::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::tensor::CMatrix;

/// One channel snapshot for every STA.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTensor {
    /// `h[sta][subcarrier]` is an `n_rx_per_sta × n_tx` matrix.
    pub h: Vec<Vec<CMatrix>>,
    pub sequence_number: u64,
    pub timestamp_us: u64,
}

impl CsiTensor {
    pub fn zeros(config: &NetworkConfig, sequence_number: u64, timestamp_us: u64) -> Self {
        let h = (0..config.n_sta)
            .map(|_| {
                (0..config.n_subcarriers)
                    .map(|_| CMatrix::zeros(config.n_rx_per_sta, config.n_tx))
                    .collect()
            })
            .collect();
        CsiTensor {
            h,
            sequence_number,
            timestamp_us,
        }
    }

    pub fn matches(&self, config: &NetworkConfig) -> bool {
        self.h.len() == config.n_sta
            && self.h.iter().all(|sta| {
                sta.len() == config.n_subcarriers && sta.iter().all(|m| m.shape() == (config.n_rx_per_sta, config.n_tx))
            })
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().flatten().all(CMatrix::is_finite)
    }

    /// Mean entry magnitude of one STA over all subcarriers and antenna pairs.
    pub fn mean_amplitude(&self, sta: usize) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for m in &self.h[sta] {
            sum += m.as_slice().iter().map(|z| z.norm()).sum::<f64>();
            count += m.as_slice().len();
        }
        sum / count as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SyntheticRayleigh,
    SyntheticClustered,
    Imported,
}

impl Provenance {
    pub fn code(self) -> u32 {
        match self {
            Provenance::SyntheticRayleigh => 0,
            Provenance::SyntheticClustered => 1,
            Provenance::Imported => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Provenance::SyntheticRayleigh),
            1 => Some(Provenance::SyntheticClustered),
            2 => Some(Provenance::Imported),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsiDataset {
    pub config: NetworkConfig,
    pub samples: Vec<CsiTensor>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl CsiDataset {
    /// Checks shape agreement, finiteness and strictly increasing sequence numbers.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        for (i, s) in self.samples.iter().enumerate() {
            if !s.matches(&self.config) {
                return Err(Error::invalid(format!(
                    "sample {i} does not match the dataset dimensions"
                )));
            }
            if !s.is_finite() {
                return Err(Error::invalid(format!("sample {i} has non-finite entries")));
            }
        }
        if let Some(w) = self
            .samples
            .windows(2)
            .find(|w| w[0].sequence_number >= w[1].sequence_number)
        {
            return Err(Error::invalid(format!(
                "sequence numbers not strictly increasing ({} then {})",
                w[0].sequence_number, w[1].sequence_number
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Dataset restricted to the given sample indices (kept in the given order).
    pub fn select(&self, indices: &[usize]) -> CsiDataset {
        CsiDataset {
            config: self.config,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            provenance: self.provenance,
            seed: self.seed,
        }
    }

    /// Copy with every entry rounded to single precision, the storage precision
    /// of the binary format.
    pub fn rounded_to_f32(&self) -> CsiDataset {
        let mut out = self.clone();
        for s in &mut out.samples {
            for m in s.h.iter_mut().flatten() {
                for z in m.as_mut_slice() {
                    z.re = z.re as f32 as f64;
                    z.im = z.im as f32 as f64;
                }
            }
        }
        out
    }
}
