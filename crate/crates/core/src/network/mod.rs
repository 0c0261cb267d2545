//! Model definitions and the first forward pass.
//!
//! A feed-forward [`Network`] is a sequence of *stages*. Each stage owns one
//! weight matrix `W_i` (dense or convolution kernel) followed by its
//! activation and any parameter-free layers that come after it in the
//! architecture list (2×2 max pooling, flatten, dropout). The stage output
//! is the layer activation `h_i`; for the convolutional family the first
//! stage therefore ends in the flattened post-pool representation.

mod conv;
mod recurrent;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use conv::{ConvGeometry, PoolGeometry};
pub use recurrent::{RecurrentNet, RnnTrace};

use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::tensor::{activate, matmul, matmul_nt, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Tanh,
    Sigmoid,
    Softmax,
    Linear,
}

impl Activation {
    /// Vector-Jacobian product of the activation at `pre`, applied in place
    /// to `g` (one row per example).
    pub(crate) fn backprop_in_place(self, pre: &Tensor, g: &mut Tensor) {
        let c = pre.cols();
        match self {
            Activation::Linear => {}
            Activation::Tanh => {
                for (gv, &z) in g.data_mut().iter_mut().zip(pre.data()) {
                    let t = math::tanh(z);
                    *gv *= 1.0 - t * t;
                }
            }
            Activation::Sigmoid => {
                for (gv, &z) in g.data_mut().iter_mut().zip(pre.data()) {
                    let s = math::sigmoid(z);
                    *gv *= s * (1.0 - s);
                }
            }
            Activation::Softmax => {
                let p = activate(pre, Activation::Softmax);
                for (grow, prow) in g.data_mut().chunks_mut(c).zip(p.data().chunks(c)) {
                    let inner: f64 = grow.iter().zip(prow).map(|(a, b)| a * b).sum();
                    for (gv, &pv) in grow.iter_mut().zip(prow) {
                        *gv = pv * (*gv - inner);
                    }
                }
            }
        }
    }
}

impl core::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "softmax" => Ok(Activation::Softmax),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Training mode samples dropout masks; evaluation mode is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One entry of an architecture list.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum LayerSpec {
    Dense {
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        dropout: f64,
    },
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        height: usize,
        width: usize,
        activation: Activation,
    },
    #[cfg_attr(feature = "serde", serde(rename = "maxpool2x2"))]
    MaxPool2x2,
    Flatten,
    Recurrent {
        input: usize,
        hidden: usize,
    },
}

impl LayerSpec {
    pub fn dense(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        LayerSpec::Dense {
            fan_in,
            fan_out,
            activation,
            dropout: 0.0,
        }
    }

    pub fn with_dropout(self, rate: f64) -> Self {
        match self {
            LayerSpec::Dense {
                fan_in,
                fan_out,
                activation,
                ..
            } => LayerSpec::Dense {
                fan_in,
                fan_out,
                activation,
                dropout: rate,
            },
            other => other,
        }
    }
}

/// Fully connected classifier: tanh hidden layers with dropout, softmax
/// output.
pub fn fc_arch(input: usize, hidden: &[usize], classes: usize, dropout: f64) -> Vec<LayerSpec> {
    let mut arch = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input;
    for &h in hidden {
        arch.push(LayerSpec::dense(prev, h, Activation::Tanh).with_dropout(dropout));
        prev = h;
    }
    arch.push(LayerSpec::dense(prev, classes, Activation::Softmax));
    arch
}

/// One convolution block (5×5 kernel, tanh, 2×2 max pool) feeding a softmax
/// classifier.
pub fn cnn_arch(channels: usize, height: usize, width: usize, filters: usize, classes: usize) -> Vec<LayerSpec> {
    let kernel = 5;
    let flat = filters * ((height - kernel + 1) / 2) * ((width - kernel + 1) / 2);
    vec![
        LayerSpec::Conv2d {
            in_channels: channels,
            out_channels: filters,
            kernel,
            height,
            width,
            activation: Activation::Tanh,
        },
        LayerSpec::MaxPool2x2,
        LayerSpec::Flatten,
        LayerSpec::dense(flat, classes, Activation::Softmax),
    ]
}

/// Single tanh recurrent layer with a linear forecasting head.
pub fn rnn_arch(features: usize, hidden: usize, outputs: usize) -> Vec<LayerSpec> {
    vec![
        LayerSpec::Recurrent { input: features, hidden },
        LayerSpec::dense(hidden, outputs, Activation::Linear),
    ]
}

/// Parametric operation of a stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StageOp {
    Dense { fan_in: usize, fan_out: usize },
    Conv(ConvGeometry),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage {
    pub op: StageOp,
    pub activation: Activation,
    pub pool: Option<PoolGeometry>,
    pub dropout: f64,
}

impl Stage {
    pub fn in_dim(&self) -> usize {
        match &self.op {
            StageOp::Dense { fan_in, .. } => *fan_in,
            StageOp::Conv(g) => g.in_len(),
        }
    }

    /// Width of the activation before pooling.
    pub fn pre_dim(&self) -> usize {
        match &self.op {
            StageOp::Dense { fan_out, .. } => *fan_out,
            StageOp::Conv(g) => g.out_len(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match &self.pool {
            Some(p) => p.out_len(),
            None => self.pre_dim(),
        }
    }

    pub fn weight_shape(&self) -> [usize; 2] {
        match &self.op {
            StageOp::Dense { fan_in, fan_out } => [*fan_out, *fan_in],
            StageOp::Conv(g) => [g.out_channels, g.patch_len()],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight_shape()[1]
    }
}

/// Fixed random projection `G` from the output space to the first hidden
/// representation. There is no mutable access once constructed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeedbackMatrix {
    g: Tensor,
}

impl FeedbackMatrix {
    pub fn new(g: Tensor) -> Result<Self> {
        if g.rank() != 2 {
            return Err(Error::Rank {
                op: "FeedbackMatrix::new",
                expected: 2,
                shape: g.shape().to_vec(),
            });
        }
        Ok(FeedbackMatrix { g })
    }

    /// He-initialised `rows × cols` projection (`N(0, 2/cols)`).
    pub fn he(rows: usize, cols: usize, rng: &mut Rng) -> Self {
        let std = math::sqrt(2.0 / cols as f64);
        FeedbackMatrix {
            g: Tensor::randn(&[rows, cols], std, rng),
        }
    }

    pub fn matrix(&self) -> &Tensor {
        &self.g
    }

    pub fn frozen(&self) -> bool {
        true
    }

    /// Projects a batch of rows: `[B × cols] → [B × rows]`.
    pub fn project(&self, y: &Tensor) -> Result<Tensor> {
        matmul_nt(&y.as_matrix(), &self.g)
    }
}

/// Values cached by the first forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    /// `h_0 .. h_L`, one `[B × d_i]` matrix each; `h_0` is the input.
    pub h: Vec<Tensor>,
    /// Pre-activation `W_i h_{i-1}` per stage (before pooling).
    pub pre: Vec<Tensor>,
    /// Inverted-dropout masks (entries `0` or `1/(1-p)`) per stage.
    pub masks: Vec<Option<Tensor>>,
    pub(crate) pool_index: Vec<Option<Vec<u32>>>,
}

impl ActivationTrace {
    pub fn output(&self) -> &Tensor {
        self.h.last().expect("trace has at least one layer")
    }

    pub fn depth(&self) -> usize {
        self.h.len() - 1
    }

    pub fn batch(&self) -> usize {
        self.h[0].rows()
    }
}

/// Output of one stage applied to an arbitrary input (used for both the
/// data pass and the target pass).
pub(crate) struct StageOutput {
    pub pre: Tensor,
    pub out: Tensor,
    pub pool_index: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Network {
    arch: Vec<LayerSpec>,
    stages: Vec<Stage>,
    weights: Vec<Tensor>,
    feedback: FeedbackMatrix,
}

impl Network {
    /// He-initialises every weight matrix and the feedback projection `G`.
    pub fn init(arch: &[LayerSpec], rng: &mut Rng) -> Result<Self> {
        let stages = build_stages(arch)?;
        let weights: Vec<Tensor> = stages
            .iter()
            .map(|s| {
                let shape = s.weight_shape();
                Tensor::randn(&shape, math::sqrt(2.0 / shape[1] as f64), rng)
            })
            .collect();
        let d1 = stages[0].out_dim();
        let dy = stages.last().unwrap().out_dim();
        let feedback = FeedbackMatrix::he(d1, dy, rng);
        Ok(Network {
            arch: arch.to_vec(),
            stages,
            weights,
            feedback,
        })
    }

    /// Assembles a network from explicit parameters.
    pub fn from_parts(arch: &[LayerSpec], weights: Vec<Tensor>, feedback: FeedbackMatrix) -> Result<Self> {
        let stages = build_stages(arch)?;
        if weights.len() != stages.len() {
            return Err(Error::Construction(format!(
                "{} weight matrices for {} parametric layers",
                weights.len(),
                stages.len()
            )));
        }
        for (s, w) in stages.iter().zip(&weights) {
            if w.shape() != s.weight_shape() {
                return Err(Error::dim("Network::from_parts", w.shape(), &s.weight_shape()));
            }
        }
        let d1 = stages[0].out_dim();
        let dy = stages.last().unwrap().out_dim();
        if feedback.matrix().shape() != [d1, dy] {
            return Err(Error::dim("Network::from_parts", feedback.matrix().shape(), &[d1, dy]));
        }
        Ok(Network {
            arch: arch.to_vec(),
            stages,
            weights,
            feedback,
        })
    }

    pub fn arch(&self) -> &[LayerSpec] {
        &self.arch
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Number of parametric layers `L`.
    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn weights(&self) -> &[Tensor] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Tensor] {
        &mut self.weights
    }

    pub fn feedback(&self) -> &FeedbackMatrix {
        &self.feedback
    }

    /// Same parameters with a different feedback projection.
    pub fn with_feedback(mut self, feedback: FeedbackMatrix) -> Result<Self> {
        if feedback.matrix().shape() != self.feedback.matrix().shape() {
            return Err(Error::dim(
                "Network::with_feedback",
                feedback.matrix().shape(),
                self.feedback.matrix().shape(),
            ));
        }
        self.feedback = feedback;
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.stages[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.stages.last().unwrap().out_dim()
    }

    /// Width of `h_i` for `i = 0..=L`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.stages.iter().map(Stage::out_dim));
        d
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Tensor::len).sum()
    }

    /// First forward pass, caching every activation. In training mode a
    /// fresh dropout mask is drawn for each stage with a nonzero rate.
    pub fn forward(&self, x: &Tensor, mode: Mode, rng: &mut Rng) -> Result<ActivationTrace> {
        let x = x.as_matrix();
        if x.cols() != self.input_dim() {
            return Err(Error::dim("forward", x.shape(), &[self.input_dim()]));
        }
        let depth = self.depth();
        let mut trace = ActivationTrace {
            h: Vec::with_capacity(depth + 1),
            pre: Vec::with_capacity(depth),
            masks: Vec::with_capacity(depth),
            pool_index: Vec::with_capacity(depth),
        };
        trace.h.push(x);
        for i in 0..depth {
            let so = self.stage_forward(i, &trace.h[i])?;
            let stage = &self.stages[i];
            let mask = if mode == Mode::Train && stage.dropout > 0.0 {
                Some(dropout_mask(so.out.shape(), stage.dropout, rng))
            } else {
                None
            };
            let out = match &mask {
                Some(m) => so.out.hadamard(m)?,
                None => so.out,
            };
            trace.h.push(out);
            trace.pre.push(so.pre);
            trace.masks.push(mask);
            trace.pool_index.push(so.pool_index);
        }
        Ok(trace)
    }

    /// Class scores for a batch in evaluation mode.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let mut rng = Rng::new(0);
        let mut trace = self.forward(x, Mode::Eval, &mut rng)?;
        Ok(trace.h.pop().unwrap())
    }

    /// Applies stage `i` (weights, activation, pooling; no dropout) to `input`.
    pub(crate) fn stage_forward(&self, i: usize, input: &Tensor) -> Result<StageOutput> {
        self.stage_forward_with(i, input, &self.weights[i])
    }

    pub(crate) fn stage_forward_with(&self, i: usize, input: &Tensor, w: &Tensor) -> Result<StageOutput> {
        let stage = &self.stages[i];
        let input = input.as_matrix();
        if input.cols() != stage.in_dim() {
            return Err(Error::dim("stage_forward", input.shape(), &[stage.in_dim()]));
        }
        let pre = match &stage.op {
            StageOp::Dense { .. } => matmul_nt(&input, w)?,
            StageOp::Conv(g) => g.forward(&input, w)?,
        };
        let act = activate(&pre, stage.activation);
        let (out, pool_index) = match &stage.pool {
            Some(p) => {
                let (o, idx) = p.forward(&act);
                (o, Some(idx))
            }
            None => (act, None),
        };
        Ok(StageOutput { pre, out, pool_index })
    }

    /// `dL/d(pre_i)` from `dL/d(h_i)`: undoes dropout, pooling and the
    /// activation of stage `i`, in that order.
    pub(crate) fn stage_pre_delta(&self, i: usize, trace: &ActivationTrace, grad_out: &Tensor) -> Result<Tensor> {
        self.pre_delta_raw(i, &trace.pre[i], trace.masks[i].as_ref(), trace.pool_index[i].as_deref(), grad_out, true)
    }

    pub(crate) fn pre_delta_raw(
        &self,
        i: usize,
        pre: &Tensor,
        mask: Option<&Tensor>,
        pool_index: Option<&[u32]>,
        grad_out: &Tensor,
        through_activation: bool,
    ) -> Result<Tensor> {
        let stage = &self.stages[i];
        let mut g = match mask {
            Some(m) => grad_out.hadamard(m)?,
            None => grad_out.clone(),
        };
        if let (Some(p), Some(idx)) = (&stage.pool, pool_index) {
            g = p.backward(&g, idx, stage.pre_dim());
        }
        if through_activation {
            stage.activation.backprop_in_place(pre, &mut g);
        }
        Ok(g)
    }

    /// `∂L/∂W_i` given `δ = ∂L/∂pre_i` and the stage input.
    pub(crate) fn stage_weight_grad(&self, i: usize, input: &Tensor, delta: &Tensor) -> Result<Tensor> {
        match &self.stages[i].op {
            StageOp::Dense { .. } => matmul(&delta.transpose()?, &input.as_matrix()),
            StageOp::Conv(g) => g.weight_grad(&input.as_matrix(), delta),
        }
    }

    /// `∂L/∂h_{i-1}` from `δ = ∂L/∂pre_i`. When `transport` is given it
    /// replaces `W_iᵀ` (shape `fan_in × fan_out`) for the error path.
    pub(crate) fn stage_input_grad(&self, i: usize, delta: &Tensor, transport: Option<&Tensor>) -> Result<Tensor> {
        match &self.stages[i].op {
            StageOp::Dense { .. } => match transport {
                Some(bt) => matmul_nt(delta, bt),
                None => matmul(delta, &self.weights[i]),
            },
            StageOp::Conv(g) => {
                let w = match transport {
                    Some(bt) => bt.transpose()?,
                    None => self.weights[i].clone(),
                };
                g.input_grad(delta, &w)
            }
        }
    }
}

fn dropout_mask(shape: &[usize], rate: f64, rng: &mut Rng) -> Tensor {
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| if rng.bernoulli(keep) { scale } else { 0.0 }).collect();
    Tensor::new(shape.to_vec(), data).expect("mask shape")
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Vector(usize),
    Spatial(usize, usize, usize),
}

impl Shape {
    fn len(self) -> usize {
        match self {
            Shape::Vector(d) => d,
            Shape::Spatial(c, h, w) => c * h * w,
        }
    }
}

/// Groups an architecture list into stages and checks that adjacent layer
/// dimensions compose.
pub fn build_stages(arch: &[LayerSpec]) -> Result<Vec<Stage>> {
    if arch.is_empty() {
        return Err(Error::Construction("empty architecture".into()));
    }
    let mut stages: Vec<Stage> = Vec::new();
    let mut shape: Option<Shape> = None;
    for (pos, layer) in arch.iter().enumerate() {
        match *layer {
            LayerSpec::Dense {
                fan_in,
                fan_out,
                activation,
                dropout,
            } => {
                if fan_in == 0 || fan_out == 0 {
                    return Err(Error::Construction(format!("layer {pos}: zero-width dense layer")));
                }
                if !(0.0..1.0).contains(&dropout) {
                    return Err(Error::Construction(format!("layer {pos}: dropout {dropout} outside [0, 1)")));
                }
                match shape {
                    None => {}
                    Some(Shape::Vector(d)) if d == fan_in => {}
                    Some(Shape::Spatial(..)) => {
                        return Err(Error::Construction(format!(
                            "layer {pos}: dense layer after a spatial layer needs a flatten"
                        )))
                    }
                    Some(s) => {
                        return Err(Error::Construction(format!(
                            "layer {pos}: fan_in {fan_in} does not match previous width {}",
                            s.len()
                        )))
                    }
                }
                stages.push(Stage {
                    op: StageOp::Dense { fan_in, fan_out },
                    activation,
                    pool: None,
                    dropout,
                });
                shape = Some(Shape::Vector(fan_out));
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                height,
                width,
                activation,
            } => {
                let geom = ConvGeometry {
                    in_channels,
                    height,
                    width,
                    out_channels,
                    kernel,
                };
                geom.validate().map_err(|m| Error::Construction(format!("layer {pos}: {m}")))?;
                match shape {
                    None => {}
                    Some(Shape::Spatial(c, h, w)) if (c, h, w) == (in_channels, height, width) => {}
                    Some(s) => {
                        return Err(Error::Construction(format!(
                            "layer {pos}: conv input {in_channels}x{height}x{width} does not match previous {s:?}"
                        )))
                    }
                }
                stages.push(Stage {
                    op: StageOp::Conv(geom),
                    activation,
                    pool: None,
                    dropout: 0.0,
                });
                shape = Some(Shape::Spatial(out_channels, geom.out_height(), geom.out_width()));
            }
            LayerSpec::MaxPool2x2 => match (shape, stages.last_mut()) {
                (Some(Shape::Spatial(c, h, w)), Some(stage)) if stage.pool.is_none() && h >= 2 && w >= 2 => {
                    let p = PoolGeometry {
                        channels: c,
                        height: h,
                        width: w,
                    };
                    stage.pool = Some(p);
                    shape = Some(Shape::Spatial(c, h / 2, w / 2));
                }
                _ => {
                    return Err(Error::Construction(format!(
                        "layer {pos}: 2x2 max pooling needs a preceding convolution"
                    )))
                }
            },
            LayerSpec::Flatten => match shape {
                Some(s) => shape = Some(Shape::Vector(s.len())),
                None => return Err(Error::Construction(format!("layer {pos}: flatten before any layer"))),
            },
            LayerSpec::Recurrent { .. } => {
                return Err(Error::Construction(format!(
                    "layer {pos}: recurrent layers belong to RecurrentNet"
                )))
            }
        }
    }
    if stages.is_empty() {
        return Err(Error::Construction("architecture has no parametric layer".into()));
    }
    if matches!(shape, Some(Shape::Spatial(..))) {
        return Err(Error::Construction("architecture ends in a spatial layer".into()));
    }
    Ok(stages)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mnist_fc_shapes() {
        let mut rng = Rng::new(0);
        let net = Network::init(&fc_arch(784, &[1024, 128], 10, 0.1), &mut rng).unwrap();
        let shapes: Vec<&[usize]> = net.weights().iter().map(Tensor::shape).collect();
        assert_eq!(shapes, vec![&[1024, 784][..], &[128, 1024][..], &[10, 128][..]]);
        assert_eq!(net.feedback().matrix().shape(), &[1024, 10]);
        assert_eq!(net.layer_dims(), vec![784, 1024, 128, 10]);
    }

    #[test]
    fn he_init_scale() {
        let mut rng = Rng::new(1);
        let net = Network::init(&fc_arch(400, &[300], 10, 0.0), &mut rng).unwrap();
        let w = &net.weights()[0];
        let var = w.data().iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
        assert!((var - 2.0 / 400.0).abs() < 0.05 * 2.0 / 400.0, "{var}");
        let g = net.feedback().matrix();
        let gvar = g.data().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
        assert!((gvar - 2.0 / 10.0).abs() < 0.1 * 0.2, "{gvar}");
    }

    #[test]
    fn empty_and_broken_archs_fail() {
        let mut rng = Rng::new(0);
        assert!(matches!(Network::init(&[], &mut rng), Err(Error::Construction(_))));
        let broken = [
            LayerSpec::dense(4, 5, Activation::Tanh),
            LayerSpec::dense(6, 2, Activation::Softmax),
        ];
        assert!(matches!(Network::init(&broken, &mut rng), Err(Error::Construction(_))));
        let no_flatten = [
            LayerSpec::Conv2d {
                in_channels: 1,
                out_channels: 2,
                kernel: 3,
                height: 6,
                width: 6,
                activation: Activation::Tanh,
            },
            LayerSpec::dense(32, 2, Activation::Softmax),
        ];
        assert!(Network::init(&no_flatten, &mut rng).is_err());
        assert!(Network::init(&rnn_arch(2, 3, 2), &mut rng).is_err());
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let arch = fc_arch(20, &[8, 6], 3, 0.1);
        let a = Network::init(&arch, &mut Rng::new(99)).unwrap();
        let b = Network::init(&arch, &mut Rng::new(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_weights_give_zero_hidden_and_uniform_output() {
        let arch = fc_arch(5, &[4, 3], 4, 0.0);
        let mut rng = Rng::new(2);
        let mut net = Network::init(&arch, &mut rng).unwrap();
        for w in net.weights_mut() {
            w.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        let x = Tensor::randn(&[3, 5], 1.0, &mut rng);
        let t = net.forward(&x, Mode::Eval, &mut rng).unwrap();
        assert!(t.h[1].data().iter().all(|&v| v == 0.0));
        assert!(t.h[2].data().iter().all(|&v| v == 0.0));
        assert!(t.output().data().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn scalar_linear_chain() {
        let arch = [
            LayerSpec::dense(1, 1, Activation::Linear),
            LayerSpec::dense(1, 1, Activation::Linear),
        ];
        let net = Network::from_parts(
            &arch,
            vec![Tensor::from_rows(&[&[2.0]]), Tensor::from_rows(&[&[3.0]])],
            FeedbackMatrix::new(Tensor::from_rows(&[&[1.0]])).unwrap(),
        )
        .unwrap();
        let t = net.forward(&Tensor::vector(vec![1.0]), Mode::Eval, &mut Rng::new(0)).unwrap();
        assert_eq!(t.h[1].data(), &[2.0]);
        assert_eq!(t.h[2].data(), &[6.0]);
    }

    #[test]
    fn eval_forward_is_pure_and_train_masks_replay() {
        let arch = fc_arch(6, &[10, 5], 3, 0.3);
        let mut rng = Rng::new(5);
        let net = Network::init(&arch, &mut rng).unwrap();
        let x = Tensor::randn(&[4, 6], 1.0, &mut rng);
        let a = net.forward(&x, Mode::Eval, &mut Rng::new(1)).unwrap();
        let b = net.forward(&x, Mode::Eval, &mut Rng::new(2)).unwrap();
        assert_eq!(a, b);
        assert!(a.masks.iter().all(Option::is_none));

        let t = net.forward(&x, Mode::Train, &mut rng).unwrap();
        for i in 0..net.depth() {
            let dims = net.layer_dims();
            assert_eq!(t.h[i + 1].shape(), &[4, dims[i + 1]]);
            let replay = activate(
                &matmul_nt(&t.h[i], &net.weights()[i]).unwrap(),
                net.stages()[i].activation,
            );
            let replay = match &t.masks[i] {
                Some(m) => replay.hadamard(m).unwrap(),
                None => replay,
            };
            assert_eq!(replay, t.h[i + 1]);
        }
        assert!(t.masks[0].is_some() && t.masks[2].is_none());
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = Network::init(&fc_arch(6, &[4], 2, 0.0), &mut Rng::new(0)).unwrap();
        assert!(matches!(
            net.forward(&Tensor::zeros(&[2, 5]), Mode::Eval, &mut Rng::new(0)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn cnn_stage_grouping() {
        let arch = cnn_arch(1, 28, 28, 32, 10);
        let net = Network::init(&arch, &mut Rng::new(0)).unwrap();
        assert_eq!(net.depth(), 2);
        assert_eq!(net.weights()[0].shape(), &[32, 25]);
        assert_eq!(net.layer_dims(), vec![784, 32 * 12 * 12, 10]);
        assert_eq!(net.feedback().matrix().shape(), &[4608, 10]);
    }
}
