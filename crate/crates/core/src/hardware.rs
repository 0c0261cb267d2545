//! Analog in-memory device emulation: k-bit weight quantization,
//! programming noise `N(0, (α|w|)²)` at write time, and perturbed backward
//! matrices for BP.
//!
//! Device model used in training: the optimizer keeps high-precision
//! master weights. Before every step the forward weights are written to the
//! device (fresh noise each write). BP additionally writes `W_iᵀ` into
//! separate backward arrays every step and perturbs a fraction of them.
//! FTP's `G` is written once, when the device is created. Quantization
//! ranges are fixed per matrix at `1.25 · max|w|` of its initial value.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::metrics;
use crate::network::{FeedbackMatrix, Network};
use crate::optim::TrainConfig;
use crate::rng::Rng;
use crate::rules::Rule;
use crate::tensor::Tensor;
use crate::train::{Dataset, EpochStats, StepHooks, Trainer};

/// Quantization range as a multiple of the initial `max|w|`.
pub const RANGE_HEADROOM: f64 = 1.25;
/// Relative perturbation of a corrupted backward entry.
pub const ASYMMETRY_MARGIN: f64 = 0.10;
/// Programming-noise grid for sweeps.
pub const ALPHA_GRID: [f64; 6] = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2];

/// Matrices are written either before every optimizer step or once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WritePolicy {
    PerUpdate,
    Once,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    /// Programming noise scale: write error std is `α|w|`.
    pub alpha: f64,
    /// Device precision; `32` and above means no quantization.
    pub bits: u32,
    /// Fraction of BP backward entries perturbed by `±margin`.
    pub corrupted_fraction: f64,
    pub margin: f64,
    /// Quantize the forward arrays as well as the backward ones.
    pub quantize_forward: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            alpha: 0.0,
            bits: 32,
            corrupted_fraction: 0.0,
            margin: ASYMMETRY_MARGIN,
            quantize_forward: true,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.bits < 2 {
            return Err(Error::Config(format!("need at least 2 bits, got {}", self.bits)));
        }
        if !(0.0..=1.0).contains(&self.corrupted_fraction) {
            return Err(Error::Config(format!(
                "corrupted fraction {} outside [0, 1]",
                self.corrupted_fraction
            )));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Config(format!("margin must be >= 0, got {}", self.margin)));
        }
        Ok(())
    }

    pub fn quantizes(&self) -> bool {
        self.bits < 32
    }

    /// Writes leave values untouched.
    pub fn is_ideal(&self) -> bool {
        self.alpha == 0.0 && !self.quantizes()
    }
}

/// Mid-rise uniform quantizer with `2^bits` levels on `[−r, r]`; inputs
/// outside the range saturate to the extreme levels. Zero maps to `Δ/2`.
pub fn quantize_value(w: f64, bits: u32, range: f64) -> f64 {
    if bits >= 32 {
        return w;
    }
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * range / levels;
    let k = math::floor((w + range) / step).clamp(0.0, levels - 1.0);
    -range + (k + 0.5) * step
}

pub fn quantize(w: &Tensor, bits: u32, range: f64) -> Result<Tensor> {
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::Config(format!("quantization range must be positive, got {range}")));
    }
    if bits < 2 {
        return Err(Error::Config(format!("need at least 2 bits, got {bits}")));
    }
    Ok(w.map(|v| quantize_value(v, bits, range)))
}

/// Range used for a matrix whose initial values are `w`.
pub fn quantization_range(w: &Tensor) -> f64 {
    let m = w.max_abs();
    if m > 0.0 {
        RANGE_HEADROOM * m
    } else {
        1.0
    }
}

/// One device write: `quantize(w + N(0, (α|w|)²))`, entry by entry.
pub fn program_write(w: &Tensor, model: &NoiseModel, range: f64, quantized: bool, rng: &mut Rng) -> Result<Tensor> {
    model.validate()?;
    let noisy = if model.alpha > 0.0 {
        w.map(|v| v + model.alpha * v.abs() * rng.normal())
    } else {
        w.clone()
    };
    if quantized && model.quantizes() {
        quantize(&noisy, model.bits, range)
    } else {
        Ok(noisy)
    }
}

/// Copy of `Wᵀ` in which `round(fraction · size)` uniformly chosen entries
/// are scaled by `1 ± margin` (sign drawn per entry).
pub fn asymmetric_backward(w: &Tensor, fraction: f64, margin: f64, rng: &mut Rng) -> Result<Tensor> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config(format!("corrupted fraction {fraction} outside [0, 1]")));
    }
    let mut t = w.transpose()?;
    let n = t.len();
    let k = math::round(fraction * n as f64) as usize;
    if k == 0 {
        return Ok(t);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below(n - i);
        idx.swap(i, j);
    }
    let data = t.data_mut();
    for &i in &idx[..k] {
        let sign = if rng.bernoulli(0.5) { 1.0 } else { -1.0 };
        data[i] *= 1.0 + sign * margin;
    }
    Ok(t)
}

/// Device state attached to a training run.
#[derive(Debug, Clone)]
pub struct AnalogDevice {
    model: NoiseModel,
    ranges: Vec<f64>,
    feedback: FeedbackMatrix,
    rng: Rng,
}

impl AnalogDevice {
    /// Fixes per-matrix ranges from `net`'s current weights and writes `G`
    /// once.
    pub fn new(net: &Network, model: NoiseModel, rng: Rng) -> Result<Self> {
        model.validate()?;
        let mut rng = rng;
        let g = net.feedback().matrix();
        let feedback = FeedbackMatrix::new(program_write(g, &model, quantization_range(g), true, &mut rng)?)?;
        Ok(AnalogDevice {
            model,
            ranges: net.weights().iter().map(quantization_range).collect(),
            feedback,
            rng,
        })
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn programmed_feedback(&self) -> &FeedbackMatrix {
        &self.feedback
    }

    pub fn policy_of_feedback(&self) -> WritePolicy {
        WritePolicy::Once
    }

    /// A fresh device copy of `master` for inference or the next step.
    pub fn program_network(&mut self, master: &Network) -> Result<Network> {
        let mut net = master.clone().with_feedback(self.feedback.clone())?;
        if !self.model.is_ideal() {
            let q = self.model.quantize_forward;
            for (w, &r) in net.weights_mut().iter_mut().zip(&self.ranges) {
                *w = program_write(w, &self.model, r, q, &mut self.rng)?;
            }
        }
        Ok(net)
    }
}

impl StepHooks for AnalogDevice {
    fn compute_net(&mut self, master: &Network) -> Result<Option<Network>> {
        self.program_network(master).map(Some)
    }

    fn transport(&mut self, master: &Network) -> Result<Vec<Option<Tensor>>> {
        let mut out = Vec::with_capacity(master.depth());
        out.push(None);
        for (i, w) in master.weights().iter().enumerate().skip(1) {
            let written = program_write(w, &self.model, self.ranges[i], true, &mut self.rng)?;
            let bt = asymmetric_backward(&written, self.model.corrupted_fraction, self.model.margin, &mut self.rng)?;
            out.push(Some(bt));
        }
        Ok(out)
    }
}

/// Final test accuracy of one seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwRun {
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HwPoint {
    pub alpha: f64,
    pub runs: Vec<HwRun>,
    pub mean: f64,
    pub std: f64,
}

/// Trains `rule` under `model` for each seed and reports test accuracy of
/// a freshly programmed device copy after the last epoch.
#[allow(clippy::too_many_arguments)]
pub fn run_hw_experiment(
    arch: &[crate::network::LayerSpec],
    rule: Rule,
    model: NoiseModel,
    train: &Dataset,
    test: &Dataset,
    cfg: &TrainConfig,
    seeds: &[u64],
    on_epoch: &mut dyn FnMut(u64, &EpochStats),
) -> Result<HwPoint> {
    model.validate()?;
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let net = Network::init(arch, &mut Rng::new(seed))?;
        let mut cfg = cfg.clone();
        cfg.seed = seed;
        let mut device = AnalogDevice::new(&net, model, Rng::new(seed).fork(3))?;
        let mut trainer = Trainer::new(net, rule, cfg.clone())?;
        for _ in 0..cfg.epochs {
            let stats = trainer.train_epoch_with(train, &mut device)?;
            on_epoch(seed, &stats);
        }
        let deployed = device.program_network(&trainer.net)?;
        let eval = crate::train::evaluate(&deployed, test, cfg.loss, 1000)?;
        runs.push(HwRun {
            seed,
            accuracy: eval.accuracy,
        });
    }
    let accs: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    let (mean, std) = metrics::mean_std(&accs)?;
    Ok(HwPoint {
        alpha: model.alpha,
        runs,
        mean,
        std,
    })
}
