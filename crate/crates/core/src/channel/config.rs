use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Channel width. Each width has a standard number of data subcarriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Bandwidth {
    Mhz20,
    Mhz40,
    Mhz80,
    Mhz160,
}

impl Bandwidth {
    pub const ALL: [Bandwidth; 4] = [Self::Mhz20, Self::Mhz40, Self::Mhz80, Self::Mhz160];

    pub fn mhz(self) -> u32 {
        match self {
            Self::Mhz20 => 20,
            Self::Mhz40 => 40,
            Self::Mhz80 => 80,
            Self::Mhz160 => 160,
        }
    }

    pub fn hz(self) -> f64 {
        self.mhz() as f64 * 1e6
    }

    pub fn standard_subcarriers(self) -> usize {
        match self {
            Self::Mhz20 => 56,
            Self::Mhz40 => 114,
            Self::Mhz80 => 242,
            Self::Mhz160 => 486,
        }
    }

    pub fn from_mhz(mhz: u32) -> Result<Self> {
        match mhz {
            20 => Ok(Self::Mhz20),
            40 => Ok(Self::Mhz40),
            80 => Ok(Self::Mhz80),
            160 => Ok(Self::Mhz160),
            other => Err(Error::invalid(format!("unsupported bandwidth {other} MHz"))),
        }
    }

    pub fn from_subcarriers(n: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.standard_subcarriers() == n)
    }
}

impl TryFrom<u32> for Bandwidth {
    type Error = Error;
    fn try_from(mhz: u32) -> Result<Self> {
        Self::from_mhz(mhz)
    }
}

impl From<Bandwidth> for u32 {
    fn from(b: Bandwidth) -> u32 {
        b.mhz()
    }
}

/// Antenna, stream and subcarrier dimensions of a MU-MIMO downlink.
///
/// Every STA has the same receive antenna and spatial stream counts. A full
/// network sets `n_tx = n_sta * n_ss_per_sta`; single-STA capture streams
/// (before alignment) carry `n_sta = 1` with the full `n_tx`, so construction
/// only requires `n_sta * n_ss_per_sta <= n_tx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_sta: usize,
    pub n_tx: usize,
    pub n_rx_per_sta: usize,
    pub n_ss_per_sta: usize,
    pub n_subcarriers: usize,
    #[serde(rename = "bandwidth_mhz")]
    pub bandwidth: Bandwidth,
}

impl NetworkConfig {
    pub fn new(
        n_sta: usize,
        n_tx: usize,
        n_rx_per_sta: usize,
        n_ss_per_sta: usize,
        n_subcarriers: usize,
        bandwidth: Bandwidth,
    ) -> Result<Self> {
        let cfg = NetworkConfig {
            n_sta,
            n_tx,
            n_rx_per_sta,
            n_ss_per_sta,
            n_subcarriers,
            bandwidth,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `n` single-antenna, single-stream STAs served by `n` transmit antennas
    /// at the bandwidth's standard subcarrier count ("n×n" in the tables).
    pub fn symmetric(n: usize, bandwidth: Bandwidth) -> Result<Self> {
        Self::new(n, n, 1, 1, bandwidth.standard_subcarriers(), bandwidth)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sta == 0
            || self.n_tx == 0
            || self.n_rx_per_sta == 0
            || self.n_ss_per_sta == 0
            || self.n_subcarriers == 0
        {
            return Err(Error::invalid(format!(
                "all network dimensions must be positive: {self:?}"
            )));
        }
        if self.n_ss_per_sta > self.n_rx_per_sta {
            return Err(Error::invalid("n_ss_per_sta exceeds n_rx_per_sta"));
        }
        if self.n_sta * self.n_ss_per_sta > self.n_tx {
            return Err(Error::invalid(format!(
                "{} STAs x {} streams exceed {} transmit antennas",
                self.n_sta, self.n_ss_per_sta, self.n_tx
            )));
        }
        Ok(())
    }

    /// True when the transmit antennas equal the total stream count.
    pub fn is_fully_loaded(&self) -> bool {
        self.n_tx == self.n_sta * self.n_ss_per_sta
    }

    pub fn require_fully_loaded(&self) -> Result<()> {
        if self.is_fully_loaded() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "n_tx ({}) must equal n_sta x n_ss_per_sta ({})",
                self.n_tx,
                self.n_sta * self.n_ss_per_sta
            )))
        }
    }

    pub fn total_streams(&self) -> usize {
        self.n_sta * self.n_ss_per_sta
    }

    /// Complex CSI entries per STA per sample.
    pub fn entries_per_sta(&self) -> usize {
        self.n_rx_per_sta * self.n_tx * self.n_subcarriers
    }

    /// Length of one STA's flattened real-valued CSI vector.
    pub fn flat_input_len(&self) -> usize {
        2 * self.entries_per_sta()
    }

    /// Length of one STA's flattened real-valued beamforming matrix.
    pub fn flat_output_len(&self) -> usize {
        2 * self.n_tx * self.n_ss_per_sta * self.n_subcarriers
    }

    /// Subcarrier spacing: bandwidth divided by subcarrier count.
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.bandwidth.hz() / self.n_subcarriers as f64
    }

    /// Baseband frequency offset of subcarrier `s`: `(s - S/2) * spacing`.
    pub fn subcarrier_offset_hz(&self, s: usize) -> f64 {
        (s as f64 - self.n_subcarriers as f64 / 2.0) * self.subcarrier_spacing_hz()
    }

    /// Short label such as `2x2@20MHz`.
    pub fn label(&self) -> String {
        format!(
            "{}x{}@{}MHz",
            self.n_tx,
            self.n_sta * self.n_rx_per_sta,
            self.bandwidth.mhz()
        )
    }
}
