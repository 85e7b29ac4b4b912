use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ChannelModel, ExperimentConfig};
use super::manifest::{ManifestEntry, RunManifest};
use super::{child_seed, sha256_hex};
use crate::bop::{account_table, solve_bop, write_candidates_csv, BopOutcome};
use crate::channel::{self, format as sbcsi, Bandwidth, CsiDataset, NetworkConfig};
use crate::dnn::{self, format as sbnn, ArchSpec, SplitModel, TrainConfig};
use crate::error::{Error, Result};
use crate::feedback::QuantConfig;
use crate::phy::{simulate_ber, BerReport, BmSource, PhyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Gen,
    Train,
    Eval,
    Bop,
    Account,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Gen,
        Stage::Train,
        Stage::Eval,
        Stage::Bop,
        Stage::Account,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Gen => "gen",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Bop => "bop",
            Stage::Account => "account",
            Stage::Report => "report",
        }
    }
}

const SPLITS: [&str; 3] = ["train", "val", "test"];

/// Files written by one stage; removed again if the stage fails.
struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<ManifestEntry>,
}

impl Outputs<'_> {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("partial");
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, &path)?;
        self.written.push(ManifestEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
        self.write(rel, (text + "\n").as_bytes())
    }

    fn discard(self) {
        for e in &self.written {
            let _ = std::fs::remove_file(self.dir.join(&e.path));
        }
    }
}

/// One row of the collated report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub source: String,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub arch: Option<String>,
    pub snr_db: f64,
    pub mean_ber: f64,
    pub errors: u64,
    pub bits: u64,
    pub skipped_samples: u64,
    /// Per-STA feedback size, where the source has one.
    pub feedback_bits: Option<u64>,
}

/// A validated configuration bound to an output directory.
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    digest: String,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::invalid(e.to_string()))
}

impl Pipeline {
    pub fn new(config: ExperimentConfig, out: PathBuf) -> Result<Self> {
        config.validate()?;
        std::fs::create_dir_all(&out)?;
        let digest = sha256_hex(config.to_toml().as_bytes());
        Ok(Pipeline { config, out, digest })
    }

    pub fn config_digest(&self) -> &str {
        &self.digest
    }

    pub fn seed(&self, module: &str, index: u64) -> u64 {
        child_seed(self.config.master_seed, module, index)
    }

    /// Runs one stage and records its outputs in the manifest.
    pub fn run(&self, stage: Stage) -> Result<Vec<ManifestEntry>> {
        let mut outs = Outputs {
            dir: &self.out,
            written: Vec::new(),
        };
        let result = match stage {
            Stage::Gen => self.gen(&mut outs),
            Stage::Train => self.train(&mut outs),
            Stage::Eval => self.eval(&mut outs),
            Stage::Bop => self.bop(&mut outs),
            Stage::Account => self.account(&mut outs),
            Stage::Report => self.report(&mut outs),
        };
        if let Err(e) = result {
            outs.discard();
            return Err(e);
        }
        let mut manifest = RunManifest::open(&self.out, &self.digest, self.config.master_seed)?;
        manifest.stages.insert(stage.name().to_string(), outs.written.clone());
        manifest.save(&self.out)?;
        Ok(outs.written)
    }

    /// Every stage in order; the search runs only when configured.
    pub fn run_all(&self) -> Result<()> {
        for stage in Stage::ALL {
            if stage == Stage::Bop && self.config.bop.is_none() {
                continue;
            }
            self.run(stage)?;
        }
        Ok(())
    }

    pub fn dataset_path(&self, split: &str) -> PathBuf {
        self.out.join(format!("{split}.sbcsi"))
    }

    fn read(&self, rel: &str, producer: Stage) -> Result<Vec<u8>> {
        let path = self.out.join(rel);
        std::fs::read(&path)
            .map_err(|_| Error::MissingArtifact(format!("{} (run `{}` first)", path.display(), producer.name())))
    }

    pub fn load_dataset(&self, split: &str) -> Result<CsiDataset> {
        sbcsi::load(&self.read(&format!("{split}.sbcsi"), Stage::Gen)?)
    }

    pub fn ladder_archs(&self) -> Result<Vec<ArchSpec>> {
        let n = &self.config.network;
        self.config
            .model
            .k_ladder
            .iter()
            .map(|&k| {
                let mut a = ArchSpec::ladder(n.flat_input_len(), n.flat_output_len(), k, self.config.model.depth)?;
                a.activation = self.config.model.activation;
                Ok(a)
            })
            .collect()
    }

    pub fn model_path(arch: &ArchSpec) -> String {
        format!("models/{}.sbnn", arch.label())
    }

    pub fn load_model(&self, arch: &ArchSpec) -> Result<SplitModel> {
        sbnn::load_model(&self.read(&Self::model_path(arch), Stage::Train)?)
    }

    fn phy(&self, module: &str) -> PhyConfig {
        PhyConfig {
            seed: self.seed(module, 0),
            ..self.config.phy.clone()
        }
    }

    fn gen(&self, outs: &mut Outputs) -> Result<()> {
        let c = &self.config;
        let seed = self.seed("channel", 0);
        let mut ds = match c.channel.model {
            ChannelModel::Rayleigh => channel::gen_rayleigh(&c.network, c.n_samples, seed)?,
            ChannelModel::Clustered => channel::gen_clustered(&c.network, c.n_samples, &c.tap_profile()?, seed)?,
        };
        if c.channel.median_window > 1 {
            ds = channel::median_smooth(&ds, c.channel.median_window);
        }
        let ds = channel::normalize(&ds)?;
        let parts = channel::split(&ds, &c.split, self.seed("split", 0))?;
        for (name, part) in SPLITS.iter().zip([&parts.train, &parts.val, &parts.test]) {
            outs.write(&format!("{name}.sbcsi"), &sbcsi::save(part))?;
        }
        Ok(())
    }

    fn train(&self, outs: &mut Outputs) -> Result<()> {
        let train_ds = self.load_dataset("train")?;
        let val_ds = self.load_dataset("val")?;
        let multi = self.config.train.multi_sta;
        let train_ex = dnn::examples(&train_ds, multi)?;
        let val_ex = dnn::examples(&val_ds, multi)?;
        let probe_phy = self.phy("phy-val");
        let bits = self.config.model.bottleneck_bits;
        for (i, arch) in self.ladder_archs()?.iter().enumerate() {
            let cfg = TrainConfig {
                seed: self.seed("dnn", i as u64),
                ..self.config.train.clone()
            };
            let model = SplitModel::build(arch, cfg.seed)?;
            let mut probe = |m: &SplitModel| -> Result<f64> {
                let src = BmSource::Split {
                    model: m,
                    bottleneck_bits: Some(bits),
                    normalize_columns: self.config.model.normalize_columns,
                };
                Ok(simulate_ber(&val_ds, &src, &probe_phy)?.mean_ber)
            };
            let outcome = dnn::train(model, &train_ex, &val_ex, &cfg, &mut probe)?;
            let label = arch.label();
            outs.write(&Self::model_path(arch), &sbnn::save_model(&outcome.model))?;
            outs.write(&format!("models/{label}.head.sbnn"), &sbnn::save_head(&outcome.model))?;
            outs.write(&format!("models/{label}.tail.sbnn"), &sbnn::save_tail(&outcome.model))?;
            let mut hist = Vec::new();
            dnn::write_history_csv(&outcome.history, &mut hist)?;
            outs.write(&format!("models/{label}.history.csv"), &hist)?;
        }
        Ok(())
    }

    fn eval(&self, outs: &mut Outputs) -> Result<()> {
        let test = self.load_dataset("test")?;
        let phy = self.phy("phy");
        let models = self
            .ladder_archs()?
            .iter()
            .map(|a| self.load_model(a))
            .collect::<Result<Vec<_>>>()?;
        let mut sources = vec![
            ("ideal".to_string(), BmSource::IdealSvd),
            (
                "givens_b7".into(),
                BmSource::Givens {
                    quant: Some(QuantConfig::MU_LOW),
                },
            ),
            (
                "givens_b9".into(),
                BmSource::Givens {
                    quant: Some(QuantConfig::MU_HIGH),
                },
            ),
        ];
        for m in &models {
            sources.push((
                format!("split_{}", m.arch.label()),
                BmSource::Split {
                    model: m,
                    bottleneck_bits: Some(self.config.model.bottleneck_bits),
                    normalize_columns: self.config.model.normalize_columns,
                },
            ));
        }
        for (name, src) in &sources {
            let report = simulate_ber(&test, src, &phy)?;
            outs.write_json(&format!("ber/{name}.json"), &report)?;
        }
        Ok(())
    }

    fn bop(&self, outs: &mut Outputs) -> Result<()> {
        let bop = self
            .config
            .bop
            .as_ref()
            .ok_or_else(|| Error::Config("no [bop] section in the configuration".into()))?;
        let train_ds = self.load_dataset("train")?;
        let val_ds = self.load_dataset("val")?;
        let cfg = TrainConfig {
            seed: self.seed("bop", 0),
            ..self.config.train.clone()
        };
        let result = solve_bop(
            &train_ds,
            &val_ds,
            bop,
            &cfg,
            &self.phy("phy-val"),
            &self.config.platform,
        );
        let (rows, choice) = match result {
            Ok(BopOutcome {
                arch,
                model,
                cost,
                candidates,
                ..
            }) => {
                outs.write("bop/model.sbnn", &sbnn::save_model(&model))?;
                let choice = serde_json::json!({
                    "feasible": true,
                    "arch": arch.label(),
                    "K": arch.compression(),
                    "depth": arch.n_layers(),
                    "cost": cost,
                });
                (candidates, choice)
            }
            Err(Error::Infeasible { candidates }) => (candidates, serde_json::json!({ "feasible": false })),
            Err(e) => return Err(e),
        };
        let mut buf = Vec::new();
        write_candidates_csv(&rows, &mut buf)?;
        outs.write("bop/candidates.csv", &buf)?;
        outs.write_json("bop/choice.json", &choice)
    }

    /// Cost table over `n × n` networks (n = 2..8) at every bandwidth plus
    /// the configured network.
    pub fn account_configs(&self) -> Result<Vec<NetworkConfig>> {
        let mut configs = Vec::new();
        for bw in Bandwidth::ALL {
            for n in 2..=8 {
                configs.push(NetworkConfig::symmetric(n, bw)?);
            }
        }
        if !configs.contains(&self.config.network) {
            configs.push(self.config.network);
        }
        Ok(configs)
    }

    fn account(&self, outs: &mut Outputs) -> Result<()> {
        let rows = account_table(
            &self.account_configs()?,
            &self.config.model.k_ladder,
            self.config.model.bottleneck_bits,
            QuantConfig::MU_HIGH,
        )?;
        outs.write("account.csv", &csv_bytes(&rows)?)
    }

    fn read_ber(&self, name: &str) -> Result<BerReport> {
        let bytes = self.read(&format!("ber/{name}.json"), Stage::Eval)?;
        serde_json::from_slice(&bytes).map_err(|e| Error::format(e.column() as u64, format!("ber/{name}.json: {e}")))
    }

    fn report(&self, outs: &mut Outputs) -> Result<()> {
        let net = &self.config.network;
        let snr = self.config.phy.snr_db;
        let row = |source: &str, k: Option<f64>, arch: Option<String>, fb: Option<u64>| -> Result<ReportRow> {
            let r = self.read_ber(source)?;
            Ok(ReportRow {
                source: source.to_string(),
                k,
                arch,
                snr_db: snr,
                mean_ber: r.mean_ber,
                errors: r.total_errors(),
                bits: r.total_bits(),
                skipped_samples: r.skipped_samples,
                feedback_bits: fb,
            })
        };
        let mut rows = vec![row("ideal", None, None, None)?];
        for q in [QuantConfig::MU_LOW, QuantConfig::MU_HIGH] {
            let bmr = crate::feedback::accounting(net, q, None).bmr_bits;
            rows.push(row(&format!("givens_b{}", q.b_phi()), None, None, Some(bmr))?);
        }
        for arch in self.ladder_archs()? {
            let bits = dnn::bottleneck_airtime_bits(arch.bottleneck_width(), self.config.model.bottleneck_bits);
            rows.push(row(
                &format!("split_{}", arch.label()),
                Some(arch.compression()),
                Some(arch.label()),
                Some(bits),
            )?);
        }
        outs.write("report.csv", &csv_bytes(&rows)?)?;

        let read_csv = |rel: &str| -> Result<Option<Vec<BTreeMap<String, String>>>> {
            let path = self.out.join(rel);
            if !path.exists() {
                return Ok(None);
            }
            let mut rdr = csv::Reader::from_path(&path).map_err(|e| Error::invalid(e.to_string()))?;
            let recs = rdr
                .deserialize()
                .collect::<std::result::Result<Vec<BTreeMap<String, String>>, _>>()
                .map_err(|e| Error::invalid(format!("{rel}: {e}")))?;
            Ok(Some(recs))
        };
        let choice = match std::fs::read(self.out.join("bop/choice.json")) {
            Ok(b) => Some(serde_json::from_slice::<serde_json::Value>(&b).map_err(|e| Error::invalid(e.to_string()))?),
            Err(_) => None,
        };
        let summary = serde_json::json!({
            "config_digest": self.digest,
            "network": net.label(),
            "ber": rows,
            "account": read_csv("account.csv")?,
            "bop_candidates": read_csv("bop/candidates.csv")?,
            "bop_choice": choice,
        });
        outs.write_json("report.json", &summary)
    }
}
