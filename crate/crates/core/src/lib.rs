//! Forward target propagation (FTP) and its reference baselines.
//!
//! The crate is `no_std` and only needs an allocator. It holds the numeric
//! core of the project:
//!
//! - [`tensor`]: dense row-major `f64` arrays, matrix products, activations,
//!   and the deterministic [`Rng`].
//! - [`network`]: fully connected, convolutional and recurrent model
//!   definitions with cached forward passes.
//! - [`rules`]: backpropagation, FTP and PEPITA weight updates.
//! - [`optim`] and [`train`]: SGD with momentum, step decay and the
//!   mini-batch training loop.
//! - [`alignment`] and [`theory`]: gradient-alignment instrumentation and a
//!   numerical verifier for the two-hidden-layer linear analysis.
//! - [`hardware`]: quantization, programming noise and backward-matrix
//!   asymmetry for analog in-memory training.
//! - [`cost`]: multiply-accumulate accounting per training step.
//! - [`metrics`]: accuracy, RRSE and CORR.
//!
//! File formats, configuration and the command line live in the `ftp-lab`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod alignment;
pub mod cost;
mod error;
pub mod hardware;
pub mod linalg;
mod math;
pub mod metrics;
pub mod network;
pub mod optim;
pub mod rng;
pub mod rules;
pub mod tensor;
pub mod theory;
pub mod train;

pub use error::{Error, Result};
pub use network::{Activation, ActivationTrace, FeedbackMatrix, LayerSpec, Mode, Network};
pub use rng::Rng;
pub use rules::{GlobalLoss, GradientSet, Rule, TargetSet};
pub use tensor::Tensor;
