//! Weight-update rules.
//!
//! Every rule returns a [`GradientSet`] holding the *ascent* direction
//! `∂L_i/∂W_i` of its per-layer objective, averaged over the batch. The
//! optimizer subtracts it. Hidden-layer losses are `½‖h_i − τ_i‖²`.

mod bp;
mod ftp;
mod pepita;
mod rnn;

use alloc::format;
use alloc::vec::Vec;

pub use bp::{bp_gradients, bp_gradients_with_transport};
pub use ftp::{
    estimate_first_target, ftp_gradients, ftp_step, propagate_targets, propagate_targets_resampled,
};
pub use pepita::{pepita_feedback, pepita_gradients, PEPITA_FEEDBACK_SCALE};
pub use rnn::{bp_rnn_gradients, ftp_rnn_gradients, ftp_rnn_target};

use crate::error::{Error, Result};
use crate::math;
use crate::network::{Activation, ActivationTrace, Network};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Rule {
    Bp,
    Ftp,
    Pepita,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Bp, Rule::Ftp, Rule::Pepita];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Bp => "bp",
            Rule::Ftp => "ftp",
            Rule::Pepita => "pepita",
        }
    }
}

impl core::fmt::Display for Rule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bp" => Ok(Rule::Bp),
            "ftp" => Ok(Rule::Ftp),
            "pepita" => Ok(Rule::Pepita),
            other => Err(Error::Config(format!("unknown algorithm `{other}` (expected bp, ftp or pepita)"))),
        }
    }
}

/// Objective at the output layer. Both are means over the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GlobalLoss {
    /// `−Σ y log p` on a softmax output.
    CrossEntropy,
    /// `½‖h_L − y‖²`.
    SquaredError,
}

impl GlobalLoss {
    pub fn value(self, output: &Tensor, y: &Tensor) -> Result<f64> {
        let y = y.as_matrix();
        if output.shape() != y.shape() {
            return Err(Error::dim("GlobalLoss::value", output.shape(), y.shape()));
        }
        let b = output.rows() as f64;
        let total: f64 = match self {
            GlobalLoss::CrossEntropy => output
                .data()
                .iter()
                .zip(y.data())
                .filter(|(_, &t)| t != 0.0)
                .map(|(&p, &t)| -t * math::ln(p.max(f64::MIN_POSITIVE)))
                .sum(),
            GlobalLoss::SquaredError => {
                0.5 * output.data().iter().zip(y.data()).map(|(h, t)| (h - t) * (h - t)).sum::<f64>()
            }
        };
        Ok(total / b)
    }
}

/// Per-layer updates `∂L_i/∂W_i` and the per-layer loss values `L_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub grads: Vec<Tensor>,
    pub losses: Vec<f64>,
}

impl GradientSet {
    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    /// Loss at the output layer.
    pub fn global_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(0.0)
    }
}

/// Layer-wise targets `τ_1 .. τ_L`; `tau[L-1]` is the label.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub tau: Vec<Tensor>,
}

impl TargetSet {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// `τ_i` with 1-based layer index.
    pub fn layer(&self, i: usize) -> &Tensor {
        &self.tau[i - 1]
    }
}

/// `∂L/∂pre_L` for the global loss. Cross-entropy requires a softmax
/// output and uses the combined form `(p − y)/B`.
pub(crate) fn output_delta(net: &Network, trace: &ActivationTrace, y: &Tensor, loss: GlobalLoss) -> Result<Tensor> {
    let last = net.depth() - 1;
    let out = trace.output();
    let y = y.as_matrix();
    if out.shape() != y.shape() {
        return Err(Error::dim("output_delta", out.shape(), y.shape()));
    }
    let inv_b = 1.0 / out.rows() as f64;
    let diff = out.sub(&y)?.scale(inv_b);
    match loss {
        GlobalLoss::CrossEntropy => {
            if net.stages()[last].activation != Activation::Softmax {
                return Err(Error::Config("cross-entropy loss needs a softmax output layer".into()));
            }
            match &trace.masks[last] {
                Some(_) => Err(Error::Config("dropout on the softmax output layer is not supported".into())),
                None => Ok(diff),
            }
        }
        GlobalLoss::SquaredError => net.stage_pre_delta(last, trace, &diff),
    }
}

/// Output-layer update shared by all three rules.
pub(crate) fn output_layer(
    net: &Network,
    trace: &ActivationTrace,
    y: &Tensor,
    loss: GlobalLoss,
) -> Result<(Tensor, Tensor, f64)> {
    let last = net.depth() - 1;
    let delta = output_delta(net, trace, y, loss)?;
    let grad = net.stage_weight_grad(last, &trace.h[last], &delta)?;
    let value = loss.value(trace.output(), y)?;
    Ok((grad, delta, value))
}

pub(crate) fn half_sq_mean(a: &Tensor, b: &Tensor) -> f64 {
    let n = a.rows() as f64;
    0.5 * a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
}

pub(crate) fn check_trace(net: &Network, trace: &ActivationTrace) -> Result<()> {
    if trace.depth() != net.depth() {
        return Err(Error::Consistency(format!(
            "trace has {} layers, network has {}",
            trace.depth(),
            net.depth()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!(matches!("dtp".parse::<Rule>(), Err(Error::Config(_))));
    }

    #[test]
    fn loss_values() {
        let p = Tensor::from_rows(&[&[0.25, 0.75], &[0.5, 0.5]]);
        let y = Tensor::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let ce = GlobalLoss::CrossEntropy.value(&p, &y).unwrap();
        assert!((ce - (-(0.75f64.ln()) - 0.5f64.ln()) / 2.0).abs() < 1e-15);
        let se = GlobalLoss::SquaredError.value(&p, &y).unwrap();
        assert!((se - 0.5 * (0.0625 * 2.0 + 0.25 * 2.0) / 2.0).abs() < 1e-15);
    }
}
