//! Rules for [`RecurrentNet`]. Gradient order is `[W_in, W_rec, W_out]`;
//! the global loss is `½‖ŷ − y‖²` averaged over the batch.

use alloc::format;
use alloc::vec;

use super::{half_sq_mean, GradientSet};
use crate::error::{Error, Result};
use crate::network::{Activation, RecurrentNet, RnnTrace};
use crate::tensor::{activate, matmul, Tensor};

fn head(net: &RecurrentNet, trace: &RnnTrace, y: &Tensor) -> Result<(Tensor, Tensor, f64)> {
    let y = y.as_matrix();
    if y.shape() != trace.y_hat.shape() {
        return Err(Error::dim("rnn head", y.shape(), trace.y_hat.shape()));
    }
    if trace.hs.len() != trace.xs.len() + 1 || trace.last_hidden().cols() != net.hidden() {
        return Err(Error::Consistency(format!(
            "trace with {} states does not fit a {}-unit recurrent net",
            trace.hs.len(),
            net.hidden()
        )));
    }
    let delta = trace.y_hat.sub(&y)?.scale(1.0 / y.rows() as f64);
    let grad = matmul(&delta.transpose()?, trace.last_hidden())?;
    Ok((grad, delta, half_sq_mean(&trace.y_hat, &y)))
}

fn tanh_backprop(h: &Tensor, g: &Tensor) -> Result<Tensor> {
    g.zip_map(h, "tanh_backprop", |gv, hv| gv * (1.0 - hv * hv))
}

/// Backpropagation through time over the whole window.
pub fn bp_rnn_gradients(net: &RecurrentNet, trace: &RnnTrace, y: &Tensor) -> Result<GradientSet> {
    let (g_out, delta, value) = head(net, trace, y)?;
    let mut g_in = Tensor::zeros(net.w_in.shape());
    let mut g_rec = Tensor::zeros(net.w_rec.shape());
    let mut gh = matmul(&delta, &net.w_out)?;
    for t in (1..=trace.steps()).rev() {
        let d = tanh_backprop(&trace.hs[t], &gh)?;
        let dt = d.transpose()?;
        g_in.axpy(1.0, &matmul(&dt, &trace.xs[t - 1])?)?;
        g_rec.axpy(1.0, &matmul(&dt, &trace.hs[t - 1])?)?;
        gh = matmul(&d, &net.w_rec)?;
    }
    Ok(GradientSet {
        grads: vec![g_in, g_rec, g_out],
        losses: vec![value; 3],
    })
}

/// `τ_h = γ(tanh(Gy) − tanh(Gŷ)) + h^(T)`.
pub fn ftp_rnn_target(net: &RecurrentNet, trace: &RnnTrace, y: &Tensor, gamma: f64) -> Result<Tensor> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Config(format!("gamma must be positive and finite, got {gamma}")));
    }
    let y = y.as_matrix();
    if y.shape() != trace.y_hat.shape() {
        return Err(Error::dim("ftp_rnn_target", y.shape(), trace.y_hat.shape()));
    }
    let g = net.feedback();
    let py = activate(&g.project(&y)?, Activation::Tanh);
    let ph = activate(&g.project(&trace.y_hat)?, Activation::Tanh);
    let mut tau = trace.last_hidden().clone();
    tau.axpy(gamma, &py.sub(&ph)?)?;
    Ok(tau)
}

/// FTP for the recurrent layer: the local loss `½‖h^(T) − τ_h‖²` is
/// differentiated through the final step only (`h^(T−1)` held constant).
/// The head uses the global-loss gradient.
pub fn ftp_rnn_gradients(net: &RecurrentNet, trace: &RnnTrace, y: &Tensor, gamma: f64) -> Result<GradientSet> {
    let (g_out, _, value) = head(net, trace, y)?;
    let tau = ftp_rnn_target(net, trace, y, gamma)?;
    let t = trace.steps();
    let h = trace.last_hidden();
    let g = h.sub(&tau)?.scale(1.0 / h.rows() as f64);
    let d = tanh_backprop(h, &g)?.transpose()?;
    let g_in = matmul(&d, &trace.xs[t - 1])?;
    let g_rec = matmul(&d, &trace.hs[t - 1])?;
    let local = half_sq_mean(h, &tau);
    Ok(GradientSet {
        grads: vec![g_in, g_rec, g_out],
        losses: vec![local, local, value],
    })
}
