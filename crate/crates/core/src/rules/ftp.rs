use alloc::format;
use alloc::vec::Vec;

use super::{check_trace, half_sq_mean, output_layer, GlobalLoss, GradientSet, TargetSet};
use crate::error::{Error, Result};
use crate::network::{ActivationTrace, Mode, Network};
use crate::rng::Rng;
use crate::tensor::{activate, Tensor};

/// `τ₁ = γ(σ(Gy) − σ(G h_L)) + h₁`, with `σ` the activation of the first
/// parametric layer. For a single-layer network `τ₁` is the label.
pub fn estimate_first_target(net: &Network, trace: &ActivationTrace, y: &Tensor, gamma: f64) -> Result<Tensor> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Config(format!("gamma must be positive and finite, got {gamma}")));
    }
    check_trace(net, trace)?;
    let y = y.as_matrix();
    if y.shape() != trace.output().shape() {
        return Err(Error::dim("estimate_first_target", y.shape(), trace.output().shape()));
    }
    if net.depth() == 1 {
        return Ok(y);
    }
    let sigma = net.stages()[0].activation;
    let g = net.feedback();
    let proj_y = activate(&g.project(&y)?, sigma);
    let proj_h = activate(&g.project(trace.output())?, sigma);
    let mut tau = trace.h[1].clone();
    tau.axpy(gamma, &proj_y.sub(&proj_h)?)?;
    Ok(tau)
}

/// Second forward pass: `τ_i = σ(W_i τ_{i−1})` for `i = 2..L−1` with the
/// first-pass dropout masks, and `τ_L = y`.
pub fn propagate_targets(net: &Network, trace: &ActivationTrace, tau1: &Tensor, y: &Tensor) -> Result<TargetSet> {
    propagate(net, trace, tau1, y, |i, _| Ok(trace.masks[i].clone()))
}

/// As [`propagate_targets`] but with freshly sampled dropout masks.
pub fn propagate_targets_resampled(
    net: &Network,
    trace: &ActivationTrace,
    tau1: &Tensor,
    y: &Tensor,
    rng: &mut Rng,
) -> Result<TargetSet> {
    propagate(net, trace, tau1, y, |i, out: &Tensor| {
        let rate = net.stages()[i].dropout;
        Ok((rate > 0.0).then(|| {
            let keep = 1.0 - rate;
            out.map(|_| if rng.bernoulli(keep) { 1.0 / keep } else { 0.0 })
        }))
    })
}

fn propagate(
    net: &Network,
    trace: &ActivationTrace,
    tau1: &Tensor,
    y: &Tensor,
    mut mask_for: impl FnMut(usize, &Tensor) -> Result<Option<Tensor>>,
) -> Result<TargetSet> {
    check_trace(net, trace)?;
    let depth = net.depth();
    let tau1 = tau1.as_matrix();
    if tau1.shape() != trace.h[1].shape() {
        return Err(Error::dim("propagate_targets", tau1.shape(), trace.h[1].shape()));
    }
    let mut tau = Vec::with_capacity(depth);
    tau.push(tau1);
    for i in 1..depth.saturating_sub(1) {
        let out = net.stage_forward(i, &tau[i - 1])?.out;
        let t = match mask_for(i, &out)? {
            Some(m) => out.hadamard(&m)?,
            None => out,
        };
        tau.push(t);
    }
    if depth > 1 {
        let y = y.as_matrix();
        if y.shape() != trace.output().shape() {
            return Err(Error::dim("propagate_targets", y.shape(), trace.output().shape()));
        }
        tau.push(y);
    }
    Ok(TargetSet { tau })
}

/// Local-loss gradients `∂½‖h_i − τ_i‖²/∂W_i` for hidden layers (targets
/// held constant) and the global-loss gradient at the output layer.
pub fn ftp_gradients(
    net: &Network,
    trace: &ActivationTrace,
    targets: &TargetSet,
    loss: GlobalLoss,
) -> Result<GradientSet> {
    check_trace(net, trace)?;
    let depth = net.depth();
    if targets.len() != depth {
        return Err(Error::Consistency(format!(
            "{} targets for {} layers",
            targets.len(),
            depth
        )));
    }
    let mut grads = Vec::with_capacity(depth);
    let mut losses = Vec::with_capacity(depth);
    for i in 0..depth - 1 {
        let h = &trace.h[i + 1];
        let tau = &targets.tau[i];
        if h.shape() != tau.shape() {
            return Err(Error::Consistency(format!(
                "target {} has shape {:?}, activation has {:?}",
                i + 1,
                tau.shape(),
                h.shape()
            )));
        }
        let g = h.sub(tau)?.scale(1.0 / h.rows() as f64);
        let delta = net.stage_pre_delta(i, trace, &g)?;
        grads.push(net.stage_weight_grad(i, &trace.h[i], &delta)?);
        losses.push(half_sq_mean(h, tau));
    }
    let (out_grad, _, value) = output_layer(net, trace, &targets.tau[depth - 1], loss)?;
    grads.push(out_grad);
    losses.push(value);
    Ok(GradientSet { grads, losses })
}

/// One FTP step on a batch: forward, target estimation, target pass and
/// local gradients.
pub fn ftp_step(
    net: &Network,
    x: &Tensor,
    y: &Tensor,
    loss: GlobalLoss,
    gamma: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(ActivationTrace, TargetSet, GradientSet)> {
    let trace = net.forward(x, mode, rng)?;
    let tau1 = estimate_first_target(net, &trace, y, gamma)?;
    let targets = propagate_targets(net, &trace, &tau1, y)?;
    let grads = ftp_gradients(net, &trace, &targets, loss)?;
    Ok((trace, targets, grads))
}
