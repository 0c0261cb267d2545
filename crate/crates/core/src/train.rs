//! Mini-batch training loops for the feed-forward and recurrent families.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metrics;
use crate::network::{ActivationTrace, FeedbackMatrix, Mode, Network, RecurrentNet};
use crate::optim::{Sgd, TrainConfig};
use crate::rng::Rng;
use crate::rules::{
    bp_gradients_with_transport, bp_rnn_gradients, estimate_first_target, ftp_gradients, ftp_rnn_gradients,
    pepita_feedback, pepita_gradients, propagate_targets, propagate_targets_resampled, GradientSet, Rule,
};
use crate::tensor::Tensor;

/// Examples and targets with matching leading dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Tensor,
    pub y: Tensor,
}

impl Dataset {
    pub fn new(x: Tensor, y: Tensor) -> Result<Self> {
        if x.rank() < 2 || y.rank() != 2 {
            return Err(Error::Config("dataset needs batched inputs and a target matrix".into()));
        }
        if x.rows() != y.rows() {
            return Err(Error::dim("Dataset::new", x.shape(), y.shape()));
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn batch(&self, idx: &[usize]) -> (Tensor, Tensor) {
        (self.x.select_rows(idx), self.y.select_rows(idx))
    }

    /// First `n` examples (or all, if fewer).
    pub fn head(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        let (x, y) = self.batch(&idx);
        Dataset { x, y }
    }
}

/// Shuffled index batches of `size`; the last batch may be shorter.
pub fn epoch_batches(n: usize, size: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    order.chunks(size).map(<[usize]>::to_vec).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    /// Example-weighted mean of the global loss over the epoch.
    pub loss: f64,
    /// Training accuracy of the first-pass predictions (classifiers only).
    pub accuracy: Option<f64>,
}

/// Device emulation hooks for [`Trainer::train_epoch_with`].
pub trait StepHooks {
    /// Network whose weights are read by forward and target passes for the
    /// next step. `None` uses the master weights.
    fn compute_net(&mut self, master: &Network) -> Result<Option<Network>> {
        let _ = master;
        Ok(None)
    }

    /// Backward matrices for BP error transport, derived from the master
    /// weights (see [`bp_gradients_with_transport`]). Never called for
    /// other rules.
    fn transport(&mut self, master: &Network) -> Result<Vec<Option<Tensor>>> {
        let _ = master;
        Ok(Vec::new())
    }
}

/// Exact arithmetic with no device effects.
pub struct Ideal;

impl StepHooks for Ideal {}

/// Training state for a feed-forward classifier or regressor.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub net: Network,
    pub sgd: Sgd,
    pub cfg: TrainConfig,
    pub rule: Rule,
    pub epoch: usize,
    rng: Rng,
    pepita: Option<FeedbackMatrix>,
}

impl Trainer {
    pub fn new(net: Network, rule: Rule, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let base = Rng::new(cfg.seed);
        let pepita = (rule == Rule::Pepita).then(|| pepita_feedback(&net, &mut base.fork(2)));
        Ok(Trainer {
            sgd: Sgd::new(cfg.momentum),
            rng: base.fork(1),
            net,
            cfg,
            rule,
            epoch: 0,
            pepita,
        })
    }

    pub fn pepita_feedback(&self) -> Option<&FeedbackMatrix> {
        self.pepita.as_ref()
    }

    /// Forward pass plus the rule's gradients for one batch, evaluated on
    /// `compute` (defaults to the master network).
    pub fn gradients(
        &mut self,
        compute: Option<&Network>,
        x: &Tensor,
        y: &Tensor,
        hooks: &mut dyn StepHooks,
    ) -> Result<(ActivationTrace, GradientSet)> {
        let net = compute.unwrap_or(&self.net);
        let trace = net.forward(x, Mode::Train, &mut self.rng)?;
        let grads = match self.rule {
            Rule::Bp => {
                let transport = hooks.transport(&self.net)?;
                bp_gradients_with_transport(net, &trace, y, self.cfg.loss, &transport)?
            }
            Rule::Ftp => {
                let tau1 = estimate_first_target(net, &trace, y, self.cfg.gamma)?;
                let targets = if self.cfg.reuse_masks {
                    propagate_targets(net, &trace, &tau1, y)?
                } else {
                    propagate_targets_resampled(net, &trace, &tau1, y, &mut self.rng)?
                };
                ftp_gradients(net, &trace, &targets, self.cfg.loss)?
            }
            Rule::Pepita => {
                let f = self.pepita.as_ref().expect("pepita feedback exists for the pepita rule");
                pepita_gradients(net, &trace, y, f, self.cfg.loss)?
            }
        };
        Ok((trace, grads))
    }

    pub fn train_epoch(&mut self, data: &Dataset) -> Result<EpochStats> {
        self.train_epoch_with(data, &mut Ideal)
    }

    /// One shuffled pass over `data`, updating the master weights after
    /// every batch.
    pub fn train_epoch_with(&mut self, data: &Dataset, hooks: &mut dyn StepHooks) -> Result<EpochStats> {
        if data.is_empty() {
            return Err(Error::Config("cannot train on an empty dataset".into()));
        }
        if data.x.cols() != self.net.input_dim() || data.y.cols() != self.net.output_dim() {
            return Err(Error::dim(
                "train_epoch",
                &[data.x.cols(), data.y.cols()],
                &[self.net.input_dim(), self.net.output_dim()],
            ));
        }
        let lr = self.cfg.lr_at(self.epoch);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let classify = self.cfg.loss == crate::rules::GlobalLoss::CrossEntropy;
        for idx in epoch_batches(data.len(), self.cfg.batch_size, &mut self.rng) {
            let (x, y) = data.batch(&idx);
            let compute = hooks.compute_net(&self.net)?;
            let (trace, grads) = self.gradients(compute.as_ref(), &x, &y, hooks)?;
            if !grads.grads.iter().all(Tensor::is_finite) {
                return Err(Error::Degenerate(format!(
                    "non-finite {} update in epoch {}",
                    self.rule, self.epoch
                )));
            }
            loss_sum += grads.global_loss() * idx.len() as f64;
            if classify {
                correct += metrics::count_correct(trace.output(), &y)?;
            }
            self.sgd.step(self.net.weights_mut().iter_mut(), &grads, lr)?;
        }
        let stats = EpochStats {
            epoch: self.epoch,
            lr,
            loss: loss_sum / data.len() as f64,
            accuracy: classify.then(|| correct as f64 / data.len() as f64),
        };
        self.epoch += 1;
        Ok(stats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Evaluation-mode loss and accuracy over `data` in chunks of `batch`.
pub fn evaluate(net: &Network, data: &Dataset, loss: crate::rules::GlobalLoss, batch: usize) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut loss_sum = 0.0;
    let mut correct = 0;
    let all: Vec<usize> = (0..data.len()).collect();
    for idx in all.chunks(batch.max(1)) {
        let (x, y) = data.batch(idx);
        let out = net.predict(&x)?;
        loss_sum += loss.value(&out, &y)? * idx.len() as f64;
        correct += metrics::count_correct(&out, &y)?;
    }
    Ok(Evaluation {
        loss: loss_sum / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
    })
}

/// Training state for the recurrent forecaster. Windows are
/// `[N × T × features]`, targets `[N × outputs]`.
#[derive(Debug, Clone)]
pub struct RnnTrainer {
    pub net: RecurrentNet,
    pub sgd: Sgd,
    pub cfg: TrainConfig,
    pub rule: Rule,
    pub epoch: usize,
    rng: Rng,
}

impl RnnTrainer {
    pub fn new(net: RecurrentNet, rule: Rule, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if rule == Rule::Pepita {
            return Err(Error::Config("the recurrent forecaster supports bp and ftp".into()));
        }
        Ok(RnnTrainer {
            sgd: Sgd::new(cfg.momentum),
            rng: Rng::new(cfg.seed).fork(1),
            net,
            cfg,
            rule,
            epoch: 0,
        })
    }

    pub fn train_epoch(&mut self, data: &Dataset) -> Result<EpochStats> {
        if data.is_empty() {
            return Err(Error::Config("cannot train on an empty dataset".into()));
        }
        if data.x.rank() != 3 {
            return Err(Error::Rank {
                op: "RnnTrainer::train_epoch",
                expected: 3,
                shape: data.x.shape().to_vec(),
            });
        }
        let lr = self.cfg.lr_at(self.epoch);
        let mut loss_sum = 0.0;
        for idx in epoch_batches(data.len(), self.cfg.batch_size, &mut self.rng) {
            let (x, y) = data.batch(&idx);
            let trace = self.net.forward_batch(&x)?;
            let grads = match self.rule {
                Rule::Ftp => ftp_rnn_gradients(&self.net, &trace, &y, self.cfg.gamma)?,
                _ => bp_rnn_gradients(&self.net, &trace, &y)?,
            };
            if !grads.grads.iter().all(Tensor::is_finite) {
                return Err(Error::Degenerate(format!("non-finite {} update", self.rule)));
            }
            loss_sum += grads.global_loss() * idx.len() as f64;
            self.sgd.step(self.net.weights_mut(), &grads, lr)?;
        }
        let stats = EpochStats {
            epoch: self.epoch,
            lr,
            loss: loss_sum / data.len() as f64,
            accuracy: None,
        };
        self.epoch += 1;
        Ok(stats)
    }
}
