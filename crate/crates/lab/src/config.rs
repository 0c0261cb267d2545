//! Run configuration: defaults, INI files and command-line overrides.
//!
//! The file format is flat `key = value` lines grouped under `[run]`,
//! `[train]`, `[hardware]`, `[series]`, `[align]` and `[theory]`. Unknown
//! sections and keys are rejected. Lists are comma separated.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ftp_core::hardware::{NoiseModel, ASYMMETRY_MARGIN};
use ftp_core::optim::{LrSchedule, TrainConfig, BATCH_SIZE, CLASSIFIER_MILESTONES, MOMENTUM, RNN_MILESTONES};
use ftp_core::rules::GlobalLoss;
use ftp_core::Rule;

use crate::data::Normalization;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchFamily {
    Fc,
    Cnn,
    Rnn,
}

impl ArchFamily {
    pub fn name(self) -> &'static str {
        match self {
            ArchFamily::Fc => "fc",
            ArchFamily::Cnn => "cnn",
            ArchFamily::Rnn => "rnn",
        }
    }
}

impl FromStr for ArchFamily {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fc" => Ok(ArchFamily::Fc),
            "cnn" => Ok(ArchFamily::Cnn),
            "rnn" => Ok(ArchFamily::Rnn),
            other => Err(LabError::Config(format!("unknown architecture `{other}` (fc, cnn, rnn)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [run]
    pub algo: Rule,
    pub arch: ArchFamily,
    /// `mnist`, `fmnist`, `cifar10`, `cifar100`, `sine`, or a CSV path.
    pub dataset: String,
    /// Overrides `$FTP_DATA_ROOT`.
    pub data_root: Option<PathBuf>,
    /// Train on a seeded subset of this many examples.
    pub subset: Option<usize>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,

    // [train]
    /// `None` means 0.01 for classifiers and 0.001 for the forecaster.
    pub lr: Option<f64>,
    pub momentum: f64,
    pub batch_size: usize,
    /// `None` means 100 for classifiers and 500 for the forecaster.
    pub epochs: Option<usize>,
    /// `None` means the family's protocol milestones.
    pub milestones: Option<Vec<usize>>,
    pub gamma: f64,
    pub reuse_masks: bool,
    pub dropout: f64,
    pub hidden: Vec<usize>,
    pub filters: usize,
    pub rnn_hidden: usize,

    // [hardware]
    pub bits: u32,
    /// Swept by `hw-sim`; the first entry is used elsewhere.
    pub alpha: Vec<f64>,
    pub corrupted_fraction: f64,
    pub margin: f64,
    pub quantize_forward: bool,

    // [series]
    pub window: usize,
    pub normalization: Normalization,
    pub header: bool,
    pub train_fraction: f64,
    pub sine_steps: usize,
    pub sine_period: f64,
    pub sine_noise: f64,

    // [align]
    /// Record alignment every this many epochs; 0 disables.
    pub align_every: usize,
    pub align_examples: usize,

    // [theory]
    pub theory_instances: usize,
    /// Orthonormal-`A` instances for the Gauss–Newton check.
    pub theory_gn_instances: usize,
    pub theory_steps: usize,
    pub theory_eta: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algo: Rule::Ftp,
            arch: ArchFamily::Fc,
            dataset: "mnist".into(),
            data_root: None,
            subset: None,
            seeds: vec![0, 1, 2],
            out: PathBuf::from("runs"),
            lr: None,
            momentum: MOMENTUM,
            batch_size: BATCH_SIZE,
            epochs: None,
            milestones: None,
            gamma: 1.0,
            reuse_masks: true,
            dropout: 0.1,
            hidden: vec![1024, 128],
            filters: 32,
            rnn_hidden: 512,
            bits: 32,
            alpha: vec![0.0],
            corrupted_fraction: 0.0,
            margin: ASYMMETRY_MARGIN,
            quantize_forward: true,
            window: 24,
            normalization: Normalization::MaxAbs,
            header: false,
            train_fraction: 0.8,
            sine_steps: 2000,
            sine_period: 50.0,
            sine_noise: 0.1,
            align_every: 0,
            align_examples: 1000,
            theory_instances: 1000,
            theory_gn_instances: 100,
            theory_steps: 100,
            theory_eta: 0.01,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| LabError::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(LabError::Config(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(LabError::Config(format!("`{key}`: expected true or false, got `{other}`"))),
    }
}

impl RunConfig {
    /// Sets `section.key`; unknown names are configuration errors.
    pub fn set(&mut self, section: &str, key: &str, v: &str) -> Result<()> {
        let name = format!("{section}.{key}");
        let k = name.as_str();
        match k {
            "run.algo" => self.algo = v.trim().parse()?,
            "run.arch" => self.arch = v.trim().parse()?,
            "run.dataset" => self.dataset = v.trim().to_string(),
            "run.data_root" => self.data_root = Some(PathBuf::from(v.trim())),
            "run.subset" => self.subset = Some(parse(k, v)?),
            "run.seeds" => self.seeds = parse_list(k, v)?,
            "run.out" => self.out = PathBuf::from(v.trim()),
            "train.lr" => self.lr = Some(parse(k, v)?),
            "train.momentum" => self.momentum = parse(k, v)?,
            "train.batch_size" => self.batch_size = parse(k, v)?,
            "train.epochs" => self.epochs = Some(parse(k, v)?),
            "train.milestones" => {
                self.milestones = Some(if v.trim().is_empty() {
                    Vec::new()
                } else {
                    parse_list(k, v)?
                })
            }
            "train.gamma" => self.gamma = parse(k, v)?,
            "train.reuse_masks" => self.reuse_masks = parse_bool(k, v)?,
            "train.dropout" => self.dropout = parse(k, v)?,
            "train.hidden" => self.hidden = parse_list(k, v)?,
            "train.filters" => self.filters = parse(k, v)?,
            "train.rnn_hidden" => self.rnn_hidden = parse(k, v)?,
            "hardware.bits" => self.bits = parse(k, v)?,
            "hardware.alpha" => self.alpha = parse_list(k, v)?,
            "hardware.corrupted_fraction" => self.corrupted_fraction = parse(k, v)?,
            "hardware.margin" => self.margin = parse(k, v)?,
            "hardware.quantize_forward" => self.quantize_forward = parse_bool(k, v)?,
            "series.window" => self.window = parse(k, v)?,
            "series.normalization" => self.normalization = v.trim().parse()?,
            "series.header" => self.header = parse_bool(k, v)?,
            "series.train_fraction" => self.train_fraction = parse(k, v)?,
            "series.sine_steps" => self.sine_steps = parse(k, v)?,
            "series.sine_period" => self.sine_period = parse(k, v)?,
            "series.sine_noise" => self.sine_noise = parse(k, v)?,
            "align.every" => self.align_every = parse(k, v)?,
            "align.examples" => self.align_examples = parse(k, v)?,
            "theory.instances" => self.theory_instances = parse(k, v)?,
            "theory.gn_instances" => self.theory_gn_instances = parse(k, v)?,
            "theory.steps" => self.theory_steps = parse(k, v)?,
            "theory.eta" => self.theory_eta = parse(k, v)?,
            _ => return Err(LabError::Config(format!("unknown configuration key `{name}`"))),
        }
        Ok(())
    }

    /// Defaults updated by every entry of an INI document.
    pub fn from_ini_str(text: &str, origin: &Path) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| LabError::parse(origin, e.to_string()))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(LabError::Config(format!("key `{k}` appears before any [section]")));
                }
                continue;
            };
            for (k, v) in props.iter() {
                cfg.set(section, k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn from_ini_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_ini_str(&text, path)
    }

    pub fn epochs(&self) -> usize {
        self.epochs.unwrap_or(match self.arch {
            ArchFamily::Rnn => 500,
            _ => 100,
        })
    }

    pub fn lr(&self) -> f64 {
        self.lr.unwrap_or(match self.arch {
            ArchFamily::Rnn => 0.001,
            _ => 0.01,
        })
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let milestones = self.milestones.clone().unwrap_or_else(|| match self.arch {
            ArchFamily::Rnn => RNN_MILESTONES.to_vec(),
            _ => CLASSIFIER_MILESTONES.to_vec(),
        });
        TrainConfig {
            schedule: LrSchedule::step(self.lr(), &milestones),
            momentum: self.momentum,
            batch_size: self.batch_size,
            epochs: self.epochs(),
            gamma: self.gamma,
            seed,
            loss: match self.arch {
                ArchFamily::Rnn => GlobalLoss::SquaredError,
                _ => GlobalLoss::CrossEntropy,
            },
            reuse_masks: self.reuse_masks,
        }
    }

    pub fn noise_model(&self, alpha: f64) -> NoiseModel {
        NoiseModel {
            alpha,
            bits: self.bits,
            corrupted_fraction: self.corrupted_fraction,
            margin: self.margin,
            quantize_forward: self.quantize_forward,
        }
    }

    /// Hard errors for unusable settings, checked before any data is read.
    /// Returns warnings for settings outside the evaluated ranges.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.seeds.is_empty() {
            return Err(LabError::Config("at least one seed is required".into()));
        }
        if self.arch == ArchFamily::Rnn && self.algo == Rule::Pepita {
            return Err(LabError::Config("the recurrent forecaster supports bp and ftp".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(LabError::Config("hidden layer sizes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(LabError::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.epochs() == 0 {
            return Err(LabError::Config("epochs must be positive".into()));
        }
        if self.subset == Some(0) {
            return Err(LabError::Config("subset must be positive".into()));
        }
        for &a in &self.alpha {
            self.noise_model(a).validate()?;
        }
        if let Some(w) = self.train_config(self.seeds[0]).validate()? {
            warnings.push(w);
        }
        Ok(warnings)
    }
}

/// Command-line overrides; each flag replaces the matching config key.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Training rule: bp, ftp or pepita.
    #[arg(long)]
    pub algo: Option<String>,
    /// Architecture family: fc, cnn or rnn.
    #[arg(long)]
    pub arch: Option<String>,
    /// mnist, fmnist, cifar10, cifar100, sine, or a CSV file.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Single seed; replaces the seed list.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated seed list.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub bits: Option<u32>,
    /// Programming-noise scale; comma-separated for sweeps.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Fraction of BP backward entries perturbed.
    #[arg(long)]
    pub corrupt: Option<f64>,
    /// Train on a seeded subset of this many examples.
    #[arg(long)]
    pub subset: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// INI configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Overrides {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_ini_file(p)?,
            None => RunConfig::default(),
        };
        let set = |cfg: &mut RunConfig, key: &str, v: &Option<String>| -> Result<()> {
            match v {
                Some(v) => {
                    let (s, k) = key.split_once('.').expect("qualified key");
                    cfg.set(s, k, v)
                }
                None => Ok(()),
            }
        };
        set(&mut cfg, "run.algo", &self.algo)?;
        set(&mut cfg, "run.arch", &self.arch)?;
        set(&mut cfg, "run.dataset", &self.dataset)?;
        set(&mut cfg, "run.seeds", &self.seeds)?;
        set(&mut cfg, "hardware.alpha", &self.alpha)?;
        if let Some(e) = self.epochs {
            cfg.epochs = Some(e);
        }
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(lr) = self.lr {
            cfg.lr = Some(lr);
        }
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if let Some(b) = self.bits {
            cfg.bits = b;
        }
        if let Some(c) = self.corrupt {
            cfg.corrupted_fraction = c;
        }
        if let Some(n) = self.subset {
            cfg.subset = Some(n);
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_defaults() {
        let c = RunConfig::default();
        let t = c.train_config(0);
        assert_eq!((t.batch_size, t.momentum, t.epochs), (64, 0.9, 100));
        assert_eq!(t.schedule.milestones, vec![60, 90]);
        let rnn = RunConfig {
            arch: ArchFamily::Rnn,
            ..RunConfig::default()
        };
        assert_eq!(rnn.train_config(0).schedule.milestones, vec![300, 450]);
        assert_eq!(rnn.epochs(), 500);
    }

    #[test]
    fn empty_milestones_mean_constant_rate() {
        let mut c = RunConfig::default();
        c.set("train", "milestones", "").unwrap();
        assert_eq!(c.train_config(0).lr_at(95), 0.01);
    }
}
