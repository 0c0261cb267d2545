use alloc::vec::Vec;

use super::{check_trace, half_sq_mean, output_layer, GlobalLoss, GradientSet};
use crate::error::{Error, Result};
use crate::math;
use crate::network::{ActivationTrace, FeedbackMatrix, Network};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Standard deviation multiplier of the input-modulation matrix `F`.
pub const PEPITA_FEEDBACK_SCALE: f64 = 0.05;

/// `F ∈ ℝ^{d_x × d_y}` with entries `N(0, 0.05²/d_y)`.
pub fn pepita_feedback(net: &Network, rng: &mut Rng) -> FeedbackMatrix {
    let (dx, dy) = (net.input_dim(), net.output_dim());
    FeedbackMatrix::new(Tensor::randn(&[dx, dy], PEPITA_FEEDBACK_SCALE / math::sqrt(dy as f64), rng))
        .expect("rank-2 feedback")
}

/// Error-modulated second pass on `x + F e` (first-pass dropout masks
/// reused). Hidden layer `i` receives `(h_i − h_i^mod) ⊗ h_{i−1}^mod`,
/// routed back through pooling only. The output layer uses the global-loss
/// gradient.
pub fn pepita_gradients(
    net: &Network,
    trace: &ActivationTrace,
    y: &Tensor,
    f: &FeedbackMatrix,
    loss: GlobalLoss,
) -> Result<GradientSet> {
    check_trace(net, trace)?;
    let depth = net.depth();
    let (dx, dy) = (net.input_dim(), net.output_dim());
    if f.matrix().shape() != [dx, dy] {
        return Err(Error::dim("pepita_gradients", f.matrix().shape(), &[dx, dy]));
    }
    let y = y.as_matrix();
    let e = trace.output().sub(&y)?;
    let x_mod = trace.h[0].add(&f.project(&e)?)?;
    let inv_b = 1.0 / x_mod.rows() as f64;

    let mut grads = Vec::with_capacity(depth);
    let mut losses = Vec::with_capacity(depth);
    let mut prev_mod = x_mod;
    for i in 0..depth - 1 {
        let so = net.stage_forward(i, &prev_mod)?;
        let mask = trace.masks[i].as_ref();
        let h_mod = match mask {
            Some(m) => so.out.hadamard(m)?,
            None => so.out,
        };
        let h = &trace.h[i + 1];
        let diff = h.sub(&h_mod)?.scale(inv_b);
        let delta = net.pre_delta_raw(i, &so.pre, mask, so.pool_index.as_deref(), &diff, false)?;
        grads.push(net.stage_weight_grad(i, &prev_mod, &delta)?);
        losses.push(half_sq_mean(h, &h_mod));
        prev_mod = h_mod;
    }
    let (out_grad, _, value) = output_layer(net, trace, &y, loss)?;
    grads.push(out_grad);
    losses.push(value);
    Ok(GradientSet { grads, losses })
}
