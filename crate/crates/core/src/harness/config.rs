use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bop::{BopConfig, DevicePlatform};
use crate::channel::{NetworkConfig, SplitSpec, TapProfile};
use crate::dnn::{Activation, TrainConfig};
use crate::error::{Error, Result};
use crate::phy::PhyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Rayleigh,
    Clustered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    /// Tap profile for the clustered model; the bundled 9-tap profile when unset.
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    /// Trailing median filter window over consecutive samples; 0 disables it.
    #[serde(default)]
    pub median_window: usize,
}

/// Split models trained and evaluated by the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub k_ladder: Vec<f64>,
    pub depth: usize,
    pub bottleneck_bits: u8,
    pub activation: Activation,
    pub normalize_columns: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            k_ladder: BopConfig::default().k_ladder,
            depth: 3,
            bottleneck_bits: 16,
            activation: Activation::default(),
            normalize_columns: false,
        }
    }
}

/// Everything one pipeline run needs. Seeds inside `train` and `phy` are
/// ignored: every stage derives its seed from `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub n_samples: usize,
    pub network: NetworkConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub bop: Option<BopConfig>,
    #[serde(default)]
    pub phy: PhyConfig,
    #[serde(default)]
    pub platform: DevicePlatform,
    /// Directory relative paths resolve against; set by [`ExperimentConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(config_err)?;
        Ok(cfg)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every section; all failures surface as [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        self.network.validate().map_err(config_err)?;
        self.network.require_fully_loaded().map_err(config_err)?;
        if self.n_samples < 10 {
            return Err(Error::Config(format!(
                "n_samples must be at least 10, got {}",
                self.n_samples
            )));
        }
        self.split.validate().map_err(config_err)?;
        self.train.validate().map_err(config_err)?;
        self.phy.validate().map_err(config_err)?;
        self.platform.validate().map_err(config_err)?;
        if let Some(b) = &self.bop {
            b.validate().map_err(config_err)?;
        }
        let ladder_check = BopConfig {
            k_ladder: self.model.k_ladder.clone(),
            bottleneck_bits: self.model.bottleneck_bits,
            ..BopConfig::default()
        };
        ladder_check.validate().map_err(config_err)?;
        if self.model.depth < 3 {
            return Err(Error::Config("model.depth must be at least 3".into()));
        }
        if self.channel.model == ChannelModel::Clustered {
            self.tap_profile()?;
        } else if self.channel.profile.is_some() {
            return Err(Error::Config(
                "channel.profile only applies to the clustered model".into(),
            ));
        }
        Ok(())
    }

    pub fn tap_profile(&self) -> Result<TapProfile> {
        match &self.channel.profile {
            None => Ok(TapProfile::default_clustered()),
            Some(p) => {
                let path = self.base_dir.join(p);
                if !path.exists() {
                    return Err(Error::Config(format!("tap profile {} does not exist", path.display())));
                }
                TapProfile::from_file(&path).map_err(config_err)
            }
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output_dir {
            Some(p) => self.base_dir.join(p),
            None => self.base_dir.join("out"),
        }
    }
}
