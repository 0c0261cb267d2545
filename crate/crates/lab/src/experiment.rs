//! Experiment orchestration: data for a config, per-seed training sessions,
//! multi-seed runs, hardware sweeps and output files.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use ftp_core::alignment::{record_alignment, AlignmentRecord};
use ftp_core::hardware::run_hw_experiment;
use ftp_core::metrics::rrse_corr;
use ftp_core::network::{cnn_arch, fc_arch, rnn_arch, RecurrentNet};
use ftp_core::train::{evaluate, Dataset, EpochStats, RnnTrainer, Trainer};
use ftp_core::{LayerSpec, Network, Rng, Tensor};

use crate::config::{ArchFamily, RunConfig};
use crate::data::{self, load_named, noisy_sine, window_rows, window_series};
use crate::error::{LabError, Result};
use crate::model::Model;
use crate::report::{write_csv, write_json, AlignmentRow, FinalMetrics, MetricsRow, Summary, SweepRow};

const EVAL_BATCH: usize = 1000;

/// Train and test splits for one config.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub test: Dataset,
    /// `(channels, height, width)` for image datasets.
    pub image: Option<(usize, usize, usize)>,
    /// Short name used in run ids.
    pub name: String,
}

fn short_name(dataset: &str) -> String {
    Path::new(dataset)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dataset.to_string())
}

pub fn load_splits(cfg: &RunConfig) -> Result<Splits> {
    let name = short_name(&cfg.dataset);
    if cfg.arch == ArchFamily::Rnn {
        let series = if cfg.dataset == "sine" {
            let rows = noisy_sine(cfg.sine_steps, 1, cfg.sine_period, cfg.sine_noise, cfg.seeds[0]);
            window_rows(&rows, cfg.window, cfg.normalization, cfg.train_fraction)?
        } else if cfg.dataset.ends_with(".csv") {
            window_series(Path::new(&cfg.dataset), cfg.window, cfg.normalization, cfg.header, cfg.train_fraction)?
        } else {
            return Err(LabError::Config(format!(
                "the rnn family needs `sine` or a .csv series, got `{}`",
                cfg.dataset
            )));
        };
        if series.test.is_empty() {
            return Err(LabError::Data("the chronological split left no test windows".into()));
        }
        if series.train.is_empty() {
            return Err(LabError::Data("the chronological split left no training windows".into()));
        }
        return Ok(Splits {
            train: series.train,
            test: series.test,
            image: None,
            name,
        });
    }
    let image = match cfg.dataset.as_str() {
        "mnist" | "fmnist" => (1, 28, 28),
        "cifar10" | "cifar100" => (3, 32, 32),
        other => {
            return Err(LabError::Config(format!(
                "the {} family needs an image dataset (mnist, fmnist, cifar10, cifar100), got `{other}`",
                cfg.arch.name()
            )))
        }
    };
    let root = cfg.data_root.clone().unwrap_or_else(data::data_root);
    let (mut train, test) = load_named(&cfg.dataset, &root)?;
    if let Some(n) = cfg.subset {
        train = data::subset(&train, n, cfg.seeds[0]);
    }
    Ok(Splits {
        train,
        test,
        image: Some(image),
        name,
    })
}

pub fn build_arch(cfg: &RunConfig, splits: &Splits) -> Result<Vec<LayerSpec>> {
    let outputs = splits.train.y.cols();
    Ok(match cfg.arch {
        ArchFamily::Fc => fc_arch(splits.train.x.cols(), &cfg.hidden, outputs, cfg.dropout),
        ArchFamily::Cnn => {
            let (c, h, w) = splits
                .image
                .ok_or_else(|| LabError::Config("the cnn family needs an image dataset".into()))?;
            cnn_arch(c, h, w, cfg.filters, outputs)
        }
        ArchFamily::Rnn => rnn_arch(splits.train.x.shape()[2], cfg.rnn_hidden, outputs),
    })
}

enum Learner {
    Feedforward(Trainer),
    Recurrent(RnnTrainer),
}

/// Test metrics of a model on a split.
pub fn evaluate_model(model: &Model, data: &Dataset, loss: ftp_core::rules::GlobalLoss) -> Result<FinalMetrics> {
    match model {
        Model::Feedforward(net) => {
            let e = evaluate(net, data, loss, EVAL_BATCH)?;
            Ok(FinalMetrics {
                seed: 0,
                test_accuracy: Some(e.accuracy),
                test_rrse: None,
                test_corr: None,
                test_loss: e.loss,
                wall_seconds: 0.0,
            })
        }
        Model::Recurrent(net) => {
            let y_hat = predict_chunked(net, &data.x)?;
            let (rrse, corr) = rrse_corr(&data.y, &y_hat)?;
            Ok(FinalMetrics {
                seed: 0,
                test_accuracy: None,
                test_rrse: Some(rrse),
                test_corr: Some(corr),
                test_loss: loss.value(&y_hat, &data.y)?,
                wall_seconds: 0.0,
            })
        }
    }
}

fn predict_chunked(net: &RecurrentNet, x: &Tensor) -> Result<Tensor> {
    let n = x.rows();
    let mut out = Vec::with_capacity(n * net.outputs());
    let all: Vec<usize> = (0..n).collect();
    for idx in all.chunks(EVAL_BATCH) {
        out.extend_from_slice(net.predict(&x.select_rows(idx))?.data());
    }
    Ok(Tensor::matrix(n, net.outputs(), out)?)
}

/// Training state of one seed with per-epoch evaluation and optional
/// alignment probes.
pub struct Session<'a> {
    pub seed: u64,
    pub run_id: String,
    splits: &'a Splits,
    learner: Learner,
    loss: ftp_core::rules::GlobalLoss,
    gamma: f64,
    align_every: usize,
    probe: Option<(Tensor, Tensor)>,
    start: Instant,
    pub rows: Vec<MetricsRow>,
    pub alignment: Vec<AlignmentRecord>,
    last_test: Option<FinalMetrics>,
}

impl<'a> Session<'a> {
    /// Weights are drawn from `Rng::new(seed)`; alignment is recorded
    /// before training when `align_every > 0`.
    pub fn new(cfg: &RunConfig, splits: &'a Splits, seed: u64) -> Result<Self> {
        let arch = build_arch(cfg, splits)?;
        let tc = cfg.train_config(seed);
        let mut rng = Rng::new(seed);
        let learner = match cfg.arch {
            ArchFamily::Rnn => Learner::Recurrent(RnnTrainer::new(RecurrentNet::from_arch(&arch, &mut rng)?, cfg.algo, tc.clone())?),
            _ => Learner::Feedforward(Trainer::new(Network::init(&arch, &mut rng)?, cfg.algo, tc.clone())?),
        };
        let probe = (cfg.align_every > 0 && matches!(learner, Learner::Feedforward(_))).then(|| {
            let idx: Vec<usize> = (0..cfg.align_examples.min(splits.train.len())).collect();
            splits.train.batch(&idx)
        });
        let mut s = Session {
            seed,
            run_id: format!("{}-{}-{}-s{seed}", cfg.algo, cfg.arch.name(), splits.name),
            splits,
            learner,
            loss: tc.loss,
            gamma: tc.gamma,
            align_every: cfg.align_every,
            probe,
            start: Instant::now(),
            rows: Vec::new(),
            alignment: Vec::new(),
            last_test: None,
        };
        s.record_alignment(0)?;
        Ok(s)
    }

    fn record_alignment(&mut self, epoch: usize) -> Result<()> {
        let (Some((x, y)), Learner::Feedforward(t)) = (&self.probe, &self.learner) else {
            return Ok(());
        };
        if epoch % self.align_every != 0 {
            return Ok(());
        }
        let rec = record_alignment(&t.net, x, y, self.gamma, self.loss, epoch, self.seed)?;
        self.alignment.push(rec);
        Ok(())
    }

    pub fn epochs_done(&self) -> usize {
        match &self.learner {
            Learner::Feedforward(t) => t.epoch,
            Learner::Recurrent(t) => t.epoch,
        }
    }

    pub fn model(&self) -> Model {
        match &self.learner {
            Learner::Feedforward(t) => Model::Feedforward(t.net.clone()),
            Learner::Recurrent(t) => Model::Recurrent(t.net.clone()),
        }
    }

    pub fn network(&self) -> Option<&Network> {
        match &self.learner {
            Learner::Feedforward(t) => Some(&t.net),
            Learner::Recurrent(_) => None,
        }
    }

    /// One training epoch followed by a test evaluation. Returns the train
    /// and test rows (epochs are numbered from 1).
    pub fn run_epoch(&mut self) -> Result<[MetricsRow; 2]> {
        let stats: EpochStats = match &mut self.learner {
            Learner::Feedforward(t) => t.train_epoch(&self.splits.train)?,
            Learner::Recurrent(t) => t.train_epoch(&self.splits.train)?,
        };
        let epoch = stats.epoch + 1;
        let mut test = evaluate_model(&self.model(), &self.splits.test, self.loss)?;
        let wall = self.start.elapsed().as_secs_f64();
        test.seed = self.seed;
        test.wall_seconds = wall;
        let train_row = MetricsRow {
            run_id: self.run_id.clone(),
            seed: self.seed,
            epoch,
            split: "train",
            accuracy: stats.accuracy,
            rrse: None,
            corr: None,
            loss: stats.loss,
            wall_seconds: wall,
        };
        let test_row = MetricsRow {
            run_id: self.run_id.clone(),
            seed: self.seed,
            epoch,
            split: "test",
            accuracy: test.test_accuracy,
            rrse: test.test_rrse,
            corr: test.test_corr,
            loss: test.test_loss,
            wall_seconds: wall,
        };
        self.last_test = Some(test);
        self.rows.push(train_row.clone());
        self.rows.push(test_row.clone());
        self.record_alignment(epoch)?;
        Ok([train_row, test_row])
    }

    /// Test metrics after the most recent epoch.
    pub fn final_metrics(&self) -> Option<&FinalMetrics> {
        self.last_test.as_ref()
    }
}

/// Outputs of a multi-seed run, in seed-list order.
pub struct Experiment {
    pub rows: Vec<MetricsRow>,
    pub alignment: Vec<AlignmentRecord>,
    pub summary: Summary,
    pub models: Vec<(u64, Model)>,
}

struct SeedOutcome {
    rows: Vec<MetricsRow>,
    alignment: Vec<AlignmentRecord>,
    finals: FinalMetrics,
    model: Model,
}

fn run_seed(cfg: &RunConfig, splits: &Splits, seed: u64, on_row: &(dyn Fn(&MetricsRow) + Sync)) -> Result<SeedOutcome> {
    let mut s = Session::new(cfg, splits, seed)?;
    for _ in 0..cfg.epochs() {
        for r in s.run_epoch()? {
            on_row(&r);
        }
    }
    let finals = s.final_metrics().cloned().expect("at least one epoch ran");
    Ok(SeedOutcome {
        model: s.model(),
        rows: s.rows,
        alignment: s.alignment,
        finals,
    })
}

/// Trains every seed of `cfg`, spreading seeds over the available cores.
pub fn run_experiment(cfg: &RunConfig, splits: &Splits, on_row: &(dyn Fn(&MetricsRow) + Sync)) -> Result<Experiment> {
    cfg.validate()?;
    let workers = std::thread::available_parallelism().map_or(1, usize::from).min(cfg.seeds.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<SeedOutcome>>>> = cfg.seeds.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = cfg.seeds.get(i) else { break };
                let out = run_seed(cfg, splits, seed, on_row);
                *slots[i].lock().expect("no worker panics while holding a slot") = Some(out);
            });
        }
    });
    let mut rows = Vec::new();
    let mut alignment = Vec::new();
    let mut finals = Vec::new();
    let mut models = Vec::new();
    for (slot, &seed) in slots.into_iter().zip(&cfg.seeds) {
        let out = slot.into_inner().expect("workers joined").expect("every seed was claimed")?;
        rows.extend(out.rows);
        alignment.extend(out.alignment);
        finals.push(out.finals);
        models.push((seed, out.model));
    }
    let summary = Summary::aggregate(
        cfg.algo.name(),
        cfg.arch.name(),
        &splits.name,
        cfg.epochs(),
        cfg.gamma,
        cfg.lr(),
        finals,
    );
    Ok(Experiment {
        rows,
        alignment,
        summary,
        models,
    })
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ALIGNMENT_FILE: &str = "alignment.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

pub fn model_file(seed: u64) -> String {
    format!("model_seed{seed}.json")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Writes metrics, summary, alignment (when recorded) and one model file
/// per seed. Returns the paths written.
pub fn write_experiment(exp: &Experiment, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = vec![dir.join(METRICS_FILE), dir.join(SUMMARY_FILE)];
    write_csv(&written[0], &exp.rows)?;
    write_json(&written[1], &exp.summary)?;
    if !exp.alignment.is_empty() {
        let rows: Vec<AlignmentRow> = exp.alignment.iter().flat_map(AlignmentRow::from_record).collect();
        let p = dir.join(ALIGNMENT_FILE);
        write_csv(&p, &rows)?;
        written.push(p);
    }
    for (seed, m) in &exp.models {
        let p = dir.join(model_file(*seed));
        m.save(&p)?;
        written.push(p);
    }
    Ok(written)
}

/// Device-emulated training for every `(alpha, seed)` of `cfg`, evaluated
/// on a freshly programmed copy after the last epoch.
pub fn run_hw_sweep(
    cfg: &RunConfig,
    splits: &Splits,
    on_epoch: &mut dyn FnMut(f64, u64, &EpochStats),
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.arch == ArchFamily::Rnn {
        return Err(LabError::Config("hardware emulation covers the fc and cnn families".into()));
    }
    let arch = build_arch(cfg, splits)?;
    let tc = cfg.train_config(cfg.seeds[0]);
    let mut rows = Vec::new();
    for &alpha in &cfg.alpha {
        let point = run_hw_experiment(
            &arch,
            cfg.algo,
            cfg.noise_model(alpha),
            &splits.train,
            &splits.test,
            &tc,
            &cfg.seeds,
            &mut |seed, stats| on_epoch(alpha, seed, stats),
        )?;
        rows.extend(point.runs.iter().map(|r| SweepRow {
            rule: cfg.algo.name().into(),
            bits: cfg.bits,
            alpha,
            seed: r.seed,
            test_accuracy: r.accuracy,
            corrupted_fraction: cfg.corrupted_fraction,
        }));
    }
    Ok(rows)
}

pub fn write_sweep(rows: &[SweepRow], dir: &Path) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let p = dir.join(SWEEP_FILE);
    write_csv(&p, rows)?;
    Ok(p)
}
