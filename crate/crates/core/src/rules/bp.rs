use alloc::vec;
use alloc::vec::Vec;

use super::{check_trace, output_layer, GlobalLoss, GradientSet};
use crate::error::{Error, Result};
use crate::network::{ActivationTrace, Network};
use crate::tensor::Tensor;

/// Chain-rule gradients of the global loss.
pub fn bp_gradients(net: &Network, trace: &ActivationTrace, y: &Tensor, loss: GlobalLoss) -> Result<GradientSet> {
    bp_gradients_with_transport(net, trace, y, loss, &[])
}

/// Backpropagation where the error path of stage `i` uses `transport[i]`
/// (shape `fan_in × fan_out`) in place of `W_iᵀ`. Missing or `None`
/// entries fall back to the exact transpose; entry 0 is never read.
pub fn bp_gradients_with_transport(
    net: &Network,
    trace: &ActivationTrace,
    y: &Tensor,
    loss: GlobalLoss,
    transport: &[Option<Tensor>],
) -> Result<GradientSet> {
    check_trace(net, trace)?;
    let depth = net.depth();
    for (i, t) in transport.iter().enumerate().skip(1).take(depth - 1) {
        if let Some(t) = t {
            let [o, n] = net.stages()[i].weight_shape();
            if t.shape() != [n, o] {
                return Err(Error::dim("bp transport", t.shape(), &[n, o]));
            }
        }
    }
    let (out_grad, mut delta, value) = output_layer(net, trace, y, loss)?;
    let mut grads: Vec<Option<Tensor>> = vec![None; depth];
    grads[depth - 1] = Some(out_grad);
    for i in (1..depth).rev() {
        let bt = transport.get(i).and_then(Option::as_ref);
        let g = net.stage_input_grad(i, &delta, bt)?;
        delta = net.stage_pre_delta(i - 1, trace, &g)?;
        grads[i - 1] = Some(net.stage_weight_grad(i - 1, &trace.h[i - 1], &delta)?);
    }
    Ok(GradientSet {
        grads: grads.into_iter().map(Option::unwrap).collect(),
        losses: vec![value; depth],
    })
}
