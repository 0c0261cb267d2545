//! Single-layer tanh recurrent network with a linear forecasting head.

use alloc::format;
use alloc::vec::Vec;

use super::{FeedbackMatrix, LayerSpec};
use crate::error::{Error, Result};
use crate::math;
use crate::network::Activation;
use crate::rng::Rng;
use crate::tensor::{activate, matmul_nt, Tensor};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecurrentNet {
    /// `hidden × features`.
    pub w_in: Tensor,
    /// `hidden × hidden`.
    pub w_rec: Tensor,
    /// `outputs × hidden`.
    pub w_out: Tensor,
    feedback: FeedbackMatrix,
}

/// Cached unrolled forward pass over a batch of windows.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnTrace {
    /// Inputs `x_t`, one `[B × features]` matrix per step.
    pub xs: Vec<Tensor>,
    /// Hidden states `h^(0) .. h^(T)`; `h^(0)` is zero.
    pub hs: Vec<Tensor>,
    /// `[B × outputs]` prediction from `h^(T)`.
    pub y_hat: Tensor,
}

impl RnnTrace {
    pub fn steps(&self) -> usize {
        self.xs.len()
    }

    pub fn last_hidden(&self) -> &Tensor {
        self.hs.last().expect("h0 always present")
    }
}

impl RecurrentNet {
    /// He initialisation of all three matrices and of `G` (`hidden × outputs`).
    pub fn init(features: usize, hidden: usize, outputs: usize, rng: &mut Rng) -> Result<Self> {
        if features == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::Construction("zero-sized recurrent network".into()));
        }
        let he = |fan_in: usize| math::sqrt(2.0 / fan_in as f64);
        let w_in = Tensor::randn(&[hidden, features], he(features), rng);
        let w_rec = Tensor::randn(&[hidden, hidden], he(hidden), rng);
        let w_out = Tensor::randn(&[outputs, hidden], he(hidden), rng);
        let feedback = FeedbackMatrix::he(hidden, outputs, rng);
        Ok(RecurrentNet {
            w_in,
            w_rec,
            w_out,
            feedback,
        })
    }

    /// Accepts `[Recurrent, Dense(linear)]` as produced by
    /// [`super::rnn_arch`].
    pub fn from_arch(arch: &[LayerSpec], rng: &mut Rng) -> Result<Self> {
        match arch {
            [LayerSpec::Recurrent { input, hidden }, LayerSpec::Dense {
                fan_in,
                fan_out,
                activation: Activation::Linear,
                ..
            }] if fan_in == hidden => Self::init(*input, *hidden, *fan_out, rng),
            _ => Err(Error::Construction(format!(
                "recurrent architecture must be [recurrent, linear dense], got {} layers",
                arch.len()
            ))),
        }
    }

    pub fn from_parts(w_in: Tensor, w_rec: Tensor, w_out: Tensor, feedback: FeedbackMatrix) -> Result<Self> {
        let h = w_rec.rows();
        if w_rec.shape() != [h, h] || w_in.rows() != h || w_out.cols() != h {
            return Err(Error::Construction("inconsistent recurrent weight shapes".into()));
        }
        if feedback.matrix().shape() != [h, w_out.rows()] {
            return Err(Error::dim("RecurrentNet::from_parts", feedback.matrix().shape(), &[h, w_out.rows()]));
        }
        Ok(RecurrentNet {
            w_in,
            w_rec,
            w_out,
            feedback,
        })
    }

    pub fn features(&self) -> usize {
        self.w_in.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w_rec.rows()
    }

    pub fn outputs(&self) -> usize {
        self.w_out.rows()
    }

    pub fn feedback(&self) -> &FeedbackMatrix {
        &self.feedback
    }

    pub fn weights(&self) -> [&Tensor; 3] {
        [&self.w_in, &self.w_rec, &self.w_out]
    }

    pub fn weights_mut(&mut self) -> [&mut Tensor; 3] {
        [&mut self.w_in, &mut self.w_rec, &mut self.w_out]
    }

    /// Unrolls one window `[T × features]`; returns `h^(1) .. h^(T)` and `ŷ`.
    pub fn forward_rnn(&self, window: &Tensor) -> Result<(Vec<Tensor>, Tensor)> {
        if window.rank() != 2 {
            return Err(Error::Rank {
                op: "forward_rnn",
                expected: 2,
                shape: window.shape().to_vec(),
            });
        }
        let (t, f) = (window.rows(), window.cols());
        let batch = window.reshape(&[1, t, f])?;
        let trace = self.forward_batch(&batch)?;
        let states = trace.hs[1..].iter().map(Tensor::flatten).collect();
        Ok((states, trace.y_hat.flatten()))
    }

    /// Unrolls a batch of windows `[B × T × features]`.
    pub fn forward_batch(&self, windows: &Tensor) -> Result<RnnTrace> {
        let (b, t, f) = match windows.shape() {
            [b, t, f] => (*b, *t, *f),
            s => {
                return Err(Error::Rank {
                    op: "forward_batch",
                    expected: 3,
                    shape: s.to_vec(),
                })
            }
        };
        if t == 0 || b == 0 {
            return Err(Error::dim("forward_batch", windows.shape(), &[b.max(1), 1, self.features()]));
        }
        if f != self.features() {
            return Err(Error::dim("forward_batch", windows.shape(), &[b, t, self.features()]));
        }
        let xs: Vec<Tensor> = (0..t)
            .map(|step| {
                let mut data = Vec::with_capacity(b * f);
                for n in 0..b {
                    let off = (n * t + step) * f;
                    data.extend_from_slice(&windows.data()[off..off + f]);
                }
                Tensor::matrix(b, f, data).expect("step slice")
            })
            .collect();
        let mut hs = Vec::with_capacity(t + 1);
        hs.push(Tensor::zeros(&[b, self.hidden()]));
        for x in &xs {
            let pre = matmul_nt(x, &self.w_in)?.add(&matmul_nt(&hs[hs.len() - 1], &self.w_rec)?)?;
            hs.push(activate(&pre, Activation::Tanh));
        }
        let y_hat = matmul_nt(&hs[t], &self.w_out)?;
        Ok(RnnTrace { xs, hs, y_hat })
    }

    pub fn predict(&self, windows: &Tensor) -> Result<Tensor> {
        Ok(self.forward_batch(windows)?.y_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(w_in: f64, w_rec: f64, w_out: f64) -> RecurrentNet {
        RecurrentNet::from_parts(
            Tensor::from_rows(&[&[w_in]]),
            Tensor::from_rows(&[&[w_rec]]),
            Tensor::from_rows(&[&[w_out]]),
            FeedbackMatrix::new(Tensor::from_rows(&[&[1.0]])).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero_states() {
        let net = RecurrentNet::from_parts(
            Tensor::zeros(&[4, 2]),
            Tensor::zeros(&[4, 4]),
            Tensor::zeros(&[1, 4]),
            FeedbackMatrix::new(Tensor::zeros(&[4, 1])).unwrap(),
        )
        .unwrap();
        let mut rng = Rng::new(3);
        let (hs, y) = net.forward_rnn(&Tensor::randn(&[5, 2], 1.0, &mut rng)).unwrap();
        assert_eq!(hs.len(), 5);
        assert!(hs.iter().all(|h| h.data().iter().all(|&v| v == 0.0)));
        assert_eq!(y.data(), &[0.0]);
    }

    #[test]
    fn single_step_of_zero_input() {
        let (hs, _) = scalar(1.0, 7.0, 1.0).forward_rnn(&Tensor::from_rows(&[&[0.0]])).unwrap();
        assert_eq!(hs[0].data(), &[0.0]);
    }

    #[test]
    fn two_step_scalar_recursion() {
        let (hs, y) = scalar(1.0, 0.5, 2.0).forward_rnn(&Tensor::from_rows(&[&[0.1], &[0.2]])).unwrap();
        let expect = libm::tanh(0.2 + 0.5 * libm::tanh(0.1));
        assert!((hs[1].data()[0] - expect).abs() < 1e-15);
        assert!((y.data()[0] - 2.0 * expect).abs() < 1e-15);
    }

    #[test]
    fn empty_window_is_rejected() {
        let net = scalar(1.0, 0.0, 1.0);
        assert!(matches!(net.forward_rnn(&Tensor::zeros(&[0, 1])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn batch_rows_match_single_windows() {
        let mut rng = Rng::new(9);
        let net = RecurrentNet::init(3, 6, 2, &mut rng).unwrap();
        let windows = Tensor::randn(&[4, 5, 3], 1.0, &mut rng);
        let batch = net.forward_batch(&windows).unwrap();
        for n in 0..4 {
            let w = Tensor::matrix(5, 3, windows.data()[n * 15..(n + 1) * 15].to_vec()).unwrap();
            let (_, y) = net.forward_rnn(&w).unwrap();
            assert_eq!(y.data(), batch.y_hat.row(n));
        }
    }
}
