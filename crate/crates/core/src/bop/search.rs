//! Greedy bottleneck search: start at the strongest compression with the
//! shallowest tail, relax compression along the ladder, and deepen the tail
//! once the ladder is exhausted.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cost::{cost_report, objective, CostReport, DevicePlatform};
use crate::channel::CsiDataset;
use crate::dnn::{examples, train, Activation, ArchSpec, SplitModel, TrainConfig};
use crate::error::{Error, Result};
use crate::feedback::QuantConfig;
use crate::phy::{simulate_ber, BmSource, PhyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BopConfig {
    /// Largest tolerable validation BER.
    pub gamma: f64,
    /// Largest tolerable end-to-end delay.
    pub tau_ms: f64,
    /// Weight of STA computation against airtime when ranking candidates.
    pub mu: f64,
    /// Compression levels, strongest first.
    pub k_ladder: Vec<f64>,
    /// Number of depth levels; level `d` has `3 + d` dense layers.
    pub max_depth: usize,
    pub eval_snr_db: f64,
    pub bottleneck_bits: u8,
    /// Epoch count override for quick searches.
    pub fast_epochs: Option<usize>,
    /// Codebook of the 802.11 report the airtime is compared against.
    pub baseline_b_phi: u8,
    pub activation: Activation,
}

impl Default for BopConfig {
    fn default() -> Self {
        BopConfig {
            gamma: 0.05,
            tau_ms: 10.0,
            mu: 0.5,
            k_ladder: vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0],
            max_depth: 2,
            eval_snr_db: 20.0,
            bottleneck_bits: 16,
            fast_epochs: None,
            baseline_b_phi: QuantConfig::MU_HIGH.b_phi(),
            activation: Activation::default(),
        }
    }
}

impl BopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::invalid(format!("mu must lie in (0, 1), got {}", self.mu)));
        }
        if !(0.0..=0.5).contains(&self.gamma) {
            return Err(Error::invalid(format!(
                "gamma must lie in [0, 0.5], got {}",
                self.gamma
            )));
        }
        if !(self.tau_ms > 0.0) {
            return Err(Error::invalid("tau_ms must be positive"));
        }
        if self.k_ladder.is_empty()
            || self.k_ladder.iter().any(|&k| !(k > 0.0 && k < 1.0))
            || self.k_ladder.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::invalid("k_ladder must be strictly increasing values in (0, 1)"));
        }
        if self.max_depth == 0 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if self.fast_epochs == Some(0) {
            return Err(Error::invalid("fast_epochs must be positive"));
        }
        crate::dnn::quantize_bottleneck(&[], self.bottleneck_bits)?;
        QuantConfig::new(self.baseline_b_phi)?;
        Ok(())
    }
}

/// One evaluated candidate, as exported to the candidate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub arch: String,
    #[serde(rename = "K")]
    pub k: f64,
    pub depth: usize,
    pub val_ber: f64,
    pub head_flops: u64,
    pub feedback_bits: u64,
    pub t_total_ms: f64,
    pub feasible: bool,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct BopOutcome {
    pub arch: ArchSpec,
    pub model: SplitModel,
    pub cost: CostReport,
    /// Every candidate evaluated, in search order; the last one is chosen.
    pub candidates: Vec<CandidateRow>,
    pub costs: Vec<CostReport>,
}

fn rank(rows: &mut [CandidateRow], costs: &mut [CostReport], mu: f64, n_sta: usize) -> Result<()> {
    let flops: Vec<f64> = costs.iter().map(|c| c.head_flops as f64).collect();
    let air: Vec<f64> = costs.iter().map(|c| c.feedback_bits_splitbeam as f64).collect();
    for ((row, cost), obj) in rows
        .iter_mut()
        .zip(costs.iter_mut())
        .zip(objective(&flops, &air, mu, n_sta)?)
    {
        row.objective = obj;
        cost.objective = obj;
    }
    Ok(())
}

/// Trains candidates in order until one meets both the BER and the delay
/// bound. Fails with [`Error::Infeasible`] carrying the full candidate table
/// when none does.
pub fn solve_bop(
    train_ds: &CsiDataset,
    val_ds: &CsiDataset,
    bop: &BopConfig,
    train_cfg: &TrainConfig,
    phy: &PhyConfig,
    platform: &DevicePlatform,
) -> Result<BopOutcome> {
    bop.validate()?;
    platform.validate()?;
    if train_ds.is_empty() || val_ds.is_empty() {
        return Err(Error::invalid("search needs non-empty training and validation sets"));
    }
    let config = &train_ds.config;
    let train_ex = examples(train_ds, train_cfg.multi_sta)?;
    let val_ex = examples(val_ds, train_cfg.multi_sta)?;
    let mut cfg = train_cfg.clone();
    if let Some(e) = bop.fast_epochs {
        cfg.epochs = e;
    }
    let probe_phy = PhyConfig {
        snr_db: bop.eval_snr_db,
        ..phy.clone()
    };
    let q = QuantConfig::new(bop.baseline_b_phi)?;

    let mut rows = Vec::new();
    let mut costs = Vec::new();
    for level in 0..bop.max_depth {
        let depth = 3 + level;
        for &k in &bop.k_ladder {
            let mut arch = ArchSpec::ladder(config.flat_input_len(), config.flat_output_len(), k, depth)?;
            arch.activation = bop.activation;
            let model = SplitModel::build(&arch, cfg.seed)?;
            let mut probe = |m: &SplitModel| -> Result<f64> {
                let src = BmSource::Split {
                    model: m,
                    bottleneck_bits: Some(bop.bottleneck_bits),
                    normalize_columns: false,
                };
                Ok(simulate_ber(val_ds, &src, &probe_phy)?.mean_ber)
            };
            let outcome = train(model, &train_ex, &val_ex, &cfg, &mut probe)?;
            let val_ber = outcome.history[outcome.best_epoch].val_ber;
            let cost = cost_report(config, &arch, bop.bottleneck_bits, q, platform)?;
            let feasible = val_ber <= bop.gamma && cost.t_total_ms <= bop.tau_ms;
            rows.push(CandidateRow {
                arch: arch.label(),
                k,
                depth,
                val_ber,
                head_flops: cost.head_flops,
                feedback_bits: cost.feedback_bits_splitbeam,
                t_total_ms: cost.t_total_ms,
                feasible,
                objective: 0.0,
            });
            costs.push(cost);
            rank(&mut rows, &mut costs, bop.mu, config.n_sta)?;
            if feasible {
                return Ok(BopOutcome {
                    arch,
                    model: outcome.model,
                    cost: *costs.last().unwrap(),
                    candidates: rows,
                    costs,
                });
            }
        }
    }
    Err(Error::Infeasible { candidates: rows })
}

/// Writes the candidate table with columns
/// `arch,K,depth,val_ber,head_flops,feedback_bits,t_total_ms,feasible,objective`.
pub fn write_candidates_csv<W: Write>(rows: &[CandidateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
