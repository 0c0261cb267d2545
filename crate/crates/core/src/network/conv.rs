//! Valid-padding, stride-1 convolution lowered to matrix products, and
//! non-overlapping 2×2 max pooling.
//!
//! Per-example activations are stored channel-major (`[c, h, w]` flattened).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::{matmul, matmul_nt, matmul_tn, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvGeometry {
    pub in_channels: usize,
    pub height: usize,
    pub width: usize,
    pub out_channels: usize,
    pub kernel: usize,
}

impl ConvGeometry {
    pub(crate) fn validate(&self) -> core::result::Result<(), String> {
        if self.in_channels == 0 || self.out_channels == 0 || self.kernel == 0 {
            return Err("zero-sized convolution".into());
        }
        if self.kernel > self.height || self.kernel > self.width {
            return Err(format!(
                "kernel {} larger than input {}x{}",
                self.kernel, self.height, self.width
            ));
        }
        Ok(())
    }

    pub fn out_height(&self) -> usize {
        self.height - self.kernel + 1
    }

    pub fn out_width(&self) -> usize {
        self.width - self.kernel + 1
    }

    /// Output positions per channel.
    pub fn positions(&self) -> usize {
        self.out_height() * self.out_width()
    }

    /// Receptive field size `C·k·k` (the fan-in of one output unit).
    pub fn patch_len(&self) -> usize {
        self.in_channels * self.kernel * self.kernel
    }

    pub fn in_len(&self) -> usize {
        self.in_channels * self.height * self.width
    }

    pub fn out_len(&self) -> usize {
        self.out_channels * self.positions()
    }

    /// Lowers one example to a `patch_len × positions` matrix.
    fn im2col(&self, x: &[f64]) -> Tensor {
        let (k, oh, ow) = (self.kernel, self.out_height(), self.out_width());
        let p = oh * ow;
        let mut out = vec![0.0; self.patch_len() * p];
        for c in 0..self.in_channels {
            let plane = &x[c * self.height * self.width..(c + 1) * self.height * self.width];
            for ki in 0..k {
                for kj in 0..k {
                    let r = (c * k + ki) * k + kj;
                    let dst = &mut out[r * p..(r + 1) * p];
                    for oi in 0..oh {
                        let src = &plane[(oi + ki) * self.width + kj..(oi + ki) * self.width + kj + ow];
                        dst[oi * ow..(oi + 1) * ow].copy_from_slice(src);
                    }
                }
            }
        }
        Tensor::matrix(self.patch_len(), p, out).expect("im2col shape")
    }

    /// Adjoint of [`Self::im2col`]: accumulates patch gradients into `dx`.
    fn col2im(&self, cols: &Tensor, dx: &mut [f64]) {
        let (k, oh, ow) = (self.kernel, self.out_height(), self.out_width());
        let p = oh * ow;
        let cd = cols.data();
        for c in 0..self.in_channels {
            let plane = &mut dx[c * self.height * self.width..(c + 1) * self.height * self.width];
            for ki in 0..k {
                for kj in 0..k {
                    let r = (c * k + ki) * k + kj;
                    let src = &cd[r * p..(r + 1) * p];
                    for oi in 0..oh {
                        let base = (oi + ki) * self.width + kj;
                        for oj in 0..ow {
                            plane[base + oj] += src[oi * ow + oj];
                        }
                    }
                }
            }
        }
    }

    /// `[B × in_len] → [B × out_len]` pre-activations for kernel `w`
    /// (`out_channels × patch_len`).
    pub(crate) fn forward(&self, x: &Tensor, w: &Tensor) -> Result<Tensor> {
        if w.shape() != [self.out_channels, self.patch_len()] {
            return Err(Error::dim("conv forward", w.shape(), &[self.out_channels, self.patch_len()]));
        }
        let b = x.rows();
        let mut out = Vec::with_capacity(b * self.out_len());
        for n in 0..b {
            let cols = self.im2col(x.row(n));
            out.extend_from_slice(matmul(w, &cols)?.data());
        }
        Tensor::matrix(b, self.out_len(), out)
    }

    /// `Σ_b δ_b · colsᵀ_b`, shaped like the kernel.
    pub(crate) fn weight_grad(&self, x: &Tensor, delta: &Tensor) -> Result<Tensor> {
        let p = self.positions();
        let mut grad = Tensor::zeros(&[self.out_channels, self.patch_len()]);
        for n in 0..x.rows() {
            let cols = self.im2col(x.row(n));
            let d = Tensor::matrix(self.out_channels, p, delta.row(n).to_vec())?;
            grad.axpy(1.0, &matmul_nt(&d, &cols)?)?;
        }
        Ok(grad)
    }

    /// Gradient with respect to the input for kernel `w`.
    pub(crate) fn input_grad(&self, delta: &Tensor, w: &Tensor) -> Result<Tensor> {
        let p = self.positions();
        let b = delta.rows();
        let mut dx = vec![0.0; b * self.in_len()];
        for n in 0..b {
            let d = Tensor::matrix(self.out_channels, p, delta.row(n).to_vec())?;
            let cols = matmul_tn(w, &d)?;
            self.col2im(&cols, &mut dx[n * self.in_len()..(n + 1) * self.in_len()]);
        }
        Tensor::matrix(b, self.in_len(), dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoolGeometry {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl PoolGeometry {
    pub fn out_height(&self) -> usize {
        self.height / 2
    }

    pub fn out_width(&self) -> usize {
        self.width / 2
    }

    pub fn out_len(&self) -> usize {
        self.channels * self.out_height() * self.out_width()
    }

    /// Max over each 2×2 window; returns the pooled batch and, per output
    /// element, the index of the winning input within its example. Ties go
    /// to the first position in row-major window order.
    pub(crate) fn forward(&self, x: &Tensor) -> (Tensor, Vec<u32>) {
        let (h, w, oh, ow) = (self.height, self.width, self.out_height(), self.out_width());
        let b = x.rows();
        let mut out = Vec::with_capacity(b * self.out_len());
        let mut idx = Vec::with_capacity(b * self.out_len());
        for n in 0..b {
            let row = x.row(n);
            for c in 0..self.channels {
                let base = c * h * w;
                for oi in 0..oh {
                    for oj in 0..ow {
                        let mut best = base + 2 * oi * w + 2 * oj;
                        for (di, dj) in [(0, 1), (1, 0), (1, 1)] {
                            let j = base + (2 * oi + di) * w + 2 * oj + dj;
                            if row[j] > row[best] {
                                best = j;
                            }
                        }
                        out.push(row[best]);
                        idx.push(best as u32);
                    }
                }
            }
        }
        (Tensor::matrix(b, self.out_len(), out).expect("pool shape"), idx)
    }

    /// Routes pooled gradients back to the winning inputs.
    pub(crate) fn backward(&self, g: &Tensor, idx: &[u32], in_len: usize) -> Tensor {
        let b = g.rows();
        let ol = self.out_len();
        let mut dx = vec![0.0; b * in_len];
        for n in 0..b {
            let dst = &mut dx[n * in_len..(n + 1) * in_len];
            for (gv, &j) in g.row(n).iter().zip(&idx[n * ol..(n + 1) * ol]) {
                dst[j as usize] += gv;
            }
        }
        Tensor::matrix(b, in_len, dx).expect("unpool shape")
    }
}
