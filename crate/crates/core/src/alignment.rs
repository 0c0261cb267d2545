//! Angles between FTP updates and exact gradients during training.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{Mode, Network};
use crate::rng::Rng;
use crate::rules::{bp_gradients, estimate_first_target, ftp_gradients, propagate_targets, GlobalLoss};
use crate::tensor::{cosine_angle_deg, matmul, Tensor};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignmentRecord {
    pub epoch: usize,
    /// Angle in degrees between flattened FTP and BP updates, per layer.
    pub layer_angles: Vec<f64>,
    /// Angle between `flatten((W_L ⋯ W_2)ᵀ)` and `flatten(G)`.
    pub structural_angle: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl AlignmentRecord {
    /// Mean angle over the hidden layers (all but the output layer).
    pub fn mean_hidden_angle(&self) -> f64 {
        let hidden = &self.layer_angles[..self.layer_angles.len() - 1];
        hidden.iter().sum::<f64>() / hidden.len().max(1) as f64
    }
}

/// Computes FTP and BP updates on the same batch in evaluation mode
/// without touching the weights. A zero update on any layer yields
/// [`Error::UndefinedAngle`].
pub fn record_alignment(
    net: &Network,
    x: &Tensor,
    y: &Tensor,
    gamma: f64,
    loss: GlobalLoss,
    epoch: usize,
    seed: u64,
) -> Result<AlignmentRecord> {
    let trace = net.forward(x, Mode::Eval, &mut Rng::new(seed))?;
    let tau1 = estimate_first_target(net, &trace, y, gamma)?;
    let targets = propagate_targets(net, &trace, &tau1, y)?;
    let ftp = ftp_gradients(net, &trace, &targets, loss)?;
    let bp = bp_gradients(net, &trace, y, loss)?;
    let layer_angles = ftp
        .grads
        .iter()
        .zip(&bp.grads)
        .map(|(a, b)| cosine_angle_deg(a, b))
        .collect::<Result<Vec<f64>>>()?;
    Ok(AlignmentRecord {
        epoch,
        layer_angles,
        structural_angle: structural_angle(net)?,
        gamma,
        seed,
    })
}

/// Angle between the transposed product of the forward weights above the
/// first layer and the feedback matrix `G` (both `d₁ × d_y`).
pub fn structural_angle(net: &Network) -> Result<f64> {
    let w = net.weights();
    if w.len() < 2 {
        return Err(Error::Config("structural alignment needs at least two layers".into()));
    }
    let mut product = w[w.len() - 1].clone();
    for wi in w[1..w.len() - 1].iter().rev() {
        product = matmul(&product, wi)?;
    }
    cosine_angle_deg(&product.transpose()?, net.feedback().matrix())
}
