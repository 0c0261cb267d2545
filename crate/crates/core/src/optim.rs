//! SGD with momentum, step learning-rate decay and the training protocol
//! constants.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::rules::{GlobalLoss, GradientSet};
use crate::tensor::Tensor;

/// Step decay: `η(epoch) = η₀ · factor^k` where `k` counts milestones
/// `≤ epoch` (epochs are 0-based).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LrSchedule {
    pub base: f64,
    pub milestones: Vec<usize>,
    pub factor: f64,
}

impl LrSchedule {
    pub fn constant(base: f64) -> Self {
        LrSchedule {
            base,
            milestones: Vec::new(),
            factor: 1.0,
        }
    }

    pub fn step(base: f64, milestones: &[usize]) -> Self {
        LrSchedule {
            base,
            milestones: milestones.to_vec(),
            factor: 0.1,
        }
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        let k = self.milestones.iter().filter(|&&m| m <= epoch).count();
        let mut lr = self.base;
        for _ in 0..k {
            lr *= self.factor;
        }
        lr
    }
}

/// Decay epochs for the classifier families.
pub const CLASSIFIER_MILESTONES: [usize; 2] = [60, 90];
/// Decay epochs for the recurrent forecaster.
pub const RNN_MILESTONES: [usize; 2] = [300, 450];
pub const MOMENTUM: f64 = 0.9;
pub const BATCH_SIZE: usize = 64;
/// γ values outside this range were not evaluated and trigger a warning.
pub const GAMMA_RANGE: (f64, f64) = (0.1, 1.5);

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub schedule: LrSchedule,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub gamma: f64,
    pub seed: u64,
    pub loss: GlobalLoss,
    /// Reuse first-pass dropout masks in the FTP target pass.
    pub reuse_masks: bool,
}

impl TrainConfig {
    /// Classifier protocol: cross-entropy, decay at epochs 60 and 90,
    /// 100 epochs.
    pub fn classifier(lr: f64) -> Self {
        TrainConfig {
            schedule: LrSchedule::step(lr, &CLASSIFIER_MILESTONES),
            momentum: MOMENTUM,
            batch_size: BATCH_SIZE,
            epochs: 100,
            gamma: 1.0,
            seed: 0,
            loss: GlobalLoss::CrossEntropy,
            reuse_masks: true,
        }
    }

    /// Forecasting protocol: squared error, decay at epochs 300 and 450,
    /// 500 epochs.
    pub fn forecaster(lr: f64) -> Self {
        TrainConfig {
            schedule: LrSchedule::step(lr, &RNN_MILESTONES),
            momentum: MOMENTUM,
            batch_size: BATCH_SIZE,
            epochs: 500,
            gamma: 1.0,
            seed: 0,
            loss: GlobalLoss::SquaredError,
            reuse_masks: true,
        }
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.schedule.lr_at(epoch)
    }

    /// Hard errors for unusable settings; returns a warning when γ lies
    /// outside the evaluated range.
    pub fn validate(&self) -> Result<Option<String>> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.schedule.base >= 0.0) || !self.schedule.base.is_finite() {
            return Err(Error::Config(format!("learning rate {} is not usable", self.schedule.base)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        let (lo, hi) = GAMMA_RANGE;
        if self.gamma < lo || self.gamma > hi {
            return Ok(Some(format!(
                "gamma {} is outside the evaluated range [{lo}, {hi}]",
                self.gamma
            )));
        }
        Ok(None)
    }
}

/// Momentum buffers, one per parameter matrix, allocated on first use.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sgd {
    pub momentum: f64,
    velocity: Vec<Tensor>,
}

impl Sgd {
    pub fn new(momentum: f64) -> Self {
        Sgd {
            momentum,
            velocity: Vec::new(),
        }
    }

    pub fn velocity(&self) -> &[Tensor] {
        &self.velocity
    }

    /// `v ← μv + ΔW`, `W ← W − ηv` for each parameter in order.
    pub fn step<'a>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut Tensor>,
        grads: &GradientSet,
        lr: f64,
    ) -> Result<()> {
        let params: Vec<&mut Tensor> = params.into_iter().collect();
        if params.len() != grads.len() {
            return Err(Error::Consistency(format!(
                "{} gradients for {} parameters",
                grads.len(),
                params.len()
            )));
        }
        if self.velocity.is_empty() {
            self.velocity = params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        }
        for ((w, g), v) in params.into_iter().zip(&grads.grads).zip(&mut self.velocity) {
            if w.shape() != g.shape() || v.shape() != g.shape() {
                return Err(Error::dim("sgd step", g.shape(), w.shape()));
            }
            let mu = self.momentum;
            for (vv, &gv) in v.data_mut().iter_mut().zip(g.data()) {
                *vv = mu * *vv + gv;
            }
            w.axpy(-lr, v)?;
        }
        Ok(())
    }
}

/// Applies one optimizer step to every weight matrix of `net`.
pub fn sgd_step(net: &mut Network, grads: &GradientSet, sgd: &mut Sgd, lr: f64) -> Result<()> {
    sgd.step(net.weights_mut().iter_mut(), grads, lr)
}

/// Zeroed gradient set shaped like `params`.
pub fn zero_grads<'a>(params: impl IntoIterator<Item = &'a Tensor>) -> GradientSet {
    let grads: Vec<Tensor> = params.into_iter().map(|p| Tensor::zeros(p.shape())).collect();
    let n = grads.len();
    GradientSet {
        grads,
        losses: vec![0.0; n],
    }
}
