//! Numerical verifier for the two-hidden-layer linear analysis of FTP.
//!
//! A linear network `x → W₁ → W₂ → W₃` is trained with FTP on a single
//! pair `(x, y)` from `W₁ = 0`, `W₂ = A`, `W₃ = 0`. Two trajectories are
//! produced side by side:
//!
//! - the *simulated* matrices, obtained by running the library's FTP rule;
//! - the *closed-form* scalars `s₁, s_{W₁}, s_{W₂}, s_{W₃}, s₃` advanced by
//!   their scalar recursions, which imply
//!   `h₁ = s₁Gy`, `W₁ = s_{W₁}Gyxᵀ`, `W₂ = A(I + s_{W₂}Gy(Gy)ᵀ)`,
//!   `W₃ = s_{W₃}y(AGy)ᵀ` and `e = (1 − s₃)y`.
//!
//! Per-layer learning rates are applied as `W_i ← W_i − η_i ∂L_i/∂W_i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{penrose_residual, pinv, random_orthonormal_columns};
use crate::math;
use crate::network::{Activation, FeedbackMatrix, LayerSpec, Mode, Network};
use crate::rng::Rng;
use crate::rules::{estimate_first_target, ftp_gradients, propagate_targets, GlobalLoss};
use crate::tensor::{matmul, matvec, outer, Tensor};

/// Layer widths `d_x, d₁, d₂, d_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaDims {
    pub dx: usize,
    pub d1: usize,
    pub d2: usize,
    pub dy: usize,
}

impl LemmaDims {
    pub const fn new(dx: usize, d1: usize, d2: usize, dy: usize) -> Self {
        LemmaDims { dx, d1, d2, dy }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaInstance {
    pub x: Tensor,
    pub y: Tensor,
    /// `d₁ × d_y`.
    pub g: Tensor,
    /// `d₂ × d₁`, the initial `W₂`.
    pub a: Tensor,
    pub etas: [f64; 3],
}

impl LemmaInstance {
    /// Unit-norm Gaussian `x` and `y`, `G ~ N(0, 1)`, and `A` either with
    /// orthonormal columns or with `N(0, 1/d₁)` entries.
    pub fn random(dims: LemmaDims, orthonormal: bool, etas: [f64; 3], rng: &mut Rng) -> Result<Self> {
        let unit = |n: usize, rng: &mut Rng| {
            let v = Tensor::randn(&[n], 1.0, rng);
            let norm = v.norm();
            v.scale(1.0 / norm)
        };
        let x = unit(dims.dx, rng);
        let y = unit(dims.dy, rng);
        let g = Tensor::randn(&[dims.d1, dims.dy], 1.0, rng);
        let a = if orthonormal {
            random_orthonormal_columns(dims.d2, dims.d1, rng)?
        } else {
            Tensor::randn(&[dims.d2, dims.d1], 1.0 / math::sqrt(dims.d1 as f64), rng)
        };
        Ok(LemmaInstance { x, y, g, a, etas })
    }

    pub fn dims(&self) -> LemmaDims {
        LemmaDims::new(self.x.len(), self.g.rows(), self.a.rows(), self.y.len())
    }

    fn gy(&self) -> Tensor {
        matvec(&self.g, &self.y).expect("G and y compose")
    }

    fn agy(&self) -> Tensor {
        matvec(&self.a, &self.gy()).expect("A and Gy compose")
    }

    /// `AᵀA = I` to `1e-10`.
    pub fn has_orthonormal_a(&self) -> bool {
        let ata = matmul(&self.a.transpose().expect("rank 2"), &self.a).expect("square");
        ata.max_abs_diff(&Tensor::identity(self.a.cols())) <= 1e-10
    }

    fn network(&self) -> Result<Network> {
        let d = self.dims();
        let arch = [
            LayerSpec::dense(d.dx, d.d1, Activation::Linear),
            LayerSpec::dense(d.d1, d.d2, Activation::Linear),
            LayerSpec::dense(d.d2, d.dy, Activation::Linear),
        ];
        Network::from_parts(
            &arch,
            vec![
                Tensor::zeros(&[d.d1, d.dx]),
                self.a.clone(),
                Tensor::zeros(&[d.dy, d.d2]),
            ],
            FeedbackMatrix::new(self.g.clone())?,
        )
    }
}

/// Scalars of the closed form at one step together with the simulated
/// quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaOneState {
    pub t: usize,
    pub s1: f64,
    pub s_w1: f64,
    pub s_w2: f64,
    pub s_w3: f64,
    pub s3: f64,
    /// Simulated `W₁, W₂, W₃` before the step-`t` update.
    pub w: [Tensor; 3],
    /// Simulated `h₁` and `e = y − h₃`.
    pub h1: Tensor,
    pub e: Tensor,
}

impl LemmaOneState {
    /// `s_{3,2} = s_{W₃} s_{W₂} ‖AGy‖²`.
    pub fn s32(&self, inst: &LemmaInstance) -> f64 {
        let agy = inst.agy();
        self.s_w3 * self.s_w2 * agy.dot(&agy).unwrap()
    }

    /// `s′_{3,2} = s_{W₃} + s_{W₃} s_{W₂} ‖Gy‖²`.
    pub fn s32_prime(&self, inst: &LemmaInstance) -> f64 {
        let gy = inst.gy();
        self.s_w3 + self.s_w3 * self.s_w2 * gy.dot(&gy).unwrap()
    }

    /// Matrices and vectors implied by the scalars:
    /// `[W₁, W₂, W₃]`, `h₁`, `e`.
    pub fn closed_form(&self, inst: &LemmaInstance) -> ([Tensor; 3], Tensor, Tensor) {
        let gy = inst.gy();
        let agy = inst.agy();
        let w1 = outer(&gy, &inst.x).unwrap().scale(self.s_w1);
        let mut w2 = inst.a.clone();
        w2.axpy(self.s_w2, &outer(&agy, &gy).unwrap()).unwrap();
        let w3 = outer(&inst.y, &agy).unwrap().scale(self.s_w3);
        let h1 = gy.scale(self.s1);
        let e = inst.y.scale(1.0 - self.s3);
        ([w1, w2, w3], h1, e)
    }

    /// Largest entrywise gap between simulated and closed-form values.
    pub fn deviation(&self, inst: &LemmaInstance) -> f64 {
        let (w, h1, e) = self.closed_form(inst);
        let mut dev = self.h1.max_abs_diff(&h1).max(self.e.max_abs_diff(&e));
        for (sim, cf) in self.w.iter().zip(&w) {
            dev = dev.max(sim.max_abs_diff(cf));
        }
        dev
    }
}

/// Runs `steps` FTP updates; returns the states for `t = 0..=steps`.
pub fn lemma1_simulate(inst: &LemmaInstance, steps: usize) -> Result<Vec<LemmaOneState>> {
    if inst.x.norm() == 0.0 || inst.y.norm() == 0.0 {
        return Err(Error::Degenerate("x and y must be nonzero".into()));
    }
    let mut net = inst.network()?;
    let gy = inst.gy();
    let agy = inst.agy();
    let gy2 = gy.dot(&gy)?;
    let agy2 = agy.dot(&agy)?;
    let x2 = inst.x.dot(&inst.x)?;
    let [eta1, eta2, eta3] = inst.etas;
    let x = inst.x.as_matrix();
    let y = inst.y.as_matrix();
    let mut rng = Rng::new(0);

    let (mut s1, mut s_w1, mut s_w2, mut s_w3) = (0.0, 0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let s3 = s1 * s_w3 * (agy2 + s_w2 * agy2 * gy2);
        let trace = net.forward(&x, Mode::Eval, &mut rng)?;
        let e = y.sub(trace.output())?.flatten();
        let w = net.weights();
        out.push(LemmaOneState {
            t,
            s1,
            s_w1,
            s_w2,
            s_w3,
            s3,
            w: [w[0].clone(), w[1].clone(), w[2].clone()],
            h1: trace.h[1].flatten(),
            e,
        });
        if t == steps {
            break;
        }
        let tau1 = estimate_first_target(&net, &trace, &y, 1.0)?;
        let targets = propagate_targets(&net, &trace, &tau1, &y)?;
        let grads = ftp_gradients(&net, &trace, &targets, GlobalLoss::SquaredError)?;
        for ((wi, gi), eta) in net.weights_mut().iter_mut().zip(&grads.grads).zip(inst.etas) {
            wi.axpy(-eta, gi)?;
        }
        let r = 1.0 - s3;
        let next = (
            s1 + eta1 * r * x2,
            s_w1 + eta1 * r,
            s_w2 + eta2 * s1 * r + eta2 * s1 * s_w2 * r * gy2,
            s_w3 + eta3 * s1 * r * (1.0 + s_w2 * gy2),
        );
        (s1, s_w1, s_w2, s_w3) = next;
    }
    Ok(out)
}

/// Angle in degrees between the lines spanned by `u` and `v`
/// (`0` for parallel or antiparallel vectors). Uses the half-angle form,
/// which stays accurate near zero.
pub fn collinearity_deg(u: &Tensor, v: &Tensor) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let (a, b) = (u.scale(1.0 / nu), v.scale(1.0 / nv));
    let diff = a.sub(&b)?.norm();
    let sum = a.add(&b)?.norm();
    let theta = 2.0 * math::atan2(diff, sum);
    Ok(theta.min(core::f64::consts::PI - theta).to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Check {
    /// `⟨Ge, W₂ᵀW₃ᵀe⟩`.
    pub first_layer: f64,
    /// `⟨W₂Ge, W₃ᵀe⟩`.
    pub second_layer: f64,
}

impl Theorem1Check {
    pub fn both_positive(&self) -> bool {
        self.first_layer > 0.0 && self.second_layer > 0.0
    }
}

/// `e` at or below `64·ε·‖y‖` is rounding noise of `y − h₃` and carries no
/// direction.
pub const ERROR_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Inner products between the FTP and BP update directions for `W₁` and
/// `W₂` at one state. `e = 0` (to within [`ERROR_FLOOR`]) is the vacuous
/// case and is reported as [`Error::Degenerate`].
pub fn theorem1_check(inst: &LemmaInstance, state: &LemmaOneState) -> Result<Theorem1Check> {
    if state.e.norm() <= ERROR_FLOOR * inst.y.norm() {
        return Err(Error::Degenerate("e = 0: both directions vanish".into()));
    }
    let [_, w2, w3] = &state.w;
    let ge = matvec(&inst.g, &state.e)?;
    let w3t_e = matvec(&w3.transpose()?, &state.e)?;
    let w2t_w3t_e = matvec(&w2.transpose()?, &w3t_e)?;
    let w2_ge = matvec(w2, &ge)?;
    Ok(Theorem1Check {
        first_layer: ge.dot(&w2t_w3t_e)?,
        second_layer: w2_ge.dot(&w3t_e)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Check {
    /// `‖s·Ge − (W₃W₂)⁺e‖` with `s = 1/(s′_{3,2}‖Gy‖²)`.
    pub residual: f64,
    /// `‖‖Gy‖⁻²(1−s₃)⁻¹Ge − s′_{3,2}(1−s₃)⁻¹(W₃W₂)⁺e‖`: both terms equal
    /// `‖Gy‖⁻²Gy` when the theorem holds.
    pub normalized_residual: f64,
    pub s: f64,
    pub s32_prime: f64,
    /// Largest violation of the Moore–Penrose conditions by the computed
    /// pseudoinverse.
    pub penrose: f64,
    pub orthonormal: bool,
}

/// Compares `Ge` with the Gauss–Newton direction `(W₃W₂)⁺e` at one state.
pub fn theorem2_check(inst: &LemmaInstance, state: &LemmaOneState) -> Result<Theorem2Check> {
    let d = inst.dims();
    if d.d2 < d.d1 {
        return Err(Error::Config("orthonormal columns need d2 >= d1".into()));
    }
    let gy = inst.gy();
    let gy2 = gy.dot(&gy)?;
    if gy2 == 0.0 {
        return Err(Error::Degenerate("Gy = 0".into()));
    }
    let s_prime = state.s32_prime(inst);
    let r = 1.0 - state.s3;
    if s_prime == 0.0 || r == 0.0 {
        return Err(Error::Degenerate("W3 W2 = 0 or e = 0 at this step".into()));
    }
    let [_, w2, w3] = &state.w;
    let product = matmul(w3, w2)?;
    let p = pinv(&product)?;
    let gn = matvec(&p, &state.e)?;
    let ge = matvec(&inst.g, &state.e)?;
    let s = 1.0 / (s_prime * gy2);
    let residual = ge.scale(s).sub(&gn)?.norm();
    let lhs = ge.scale(1.0 / (gy2 * r));
    let rhs = gn.scale(s_prime / r);
    Ok(Theorem2Check {
        residual,
        normalized_residual: lhs.sub(&rhs)?.norm(),
        s,
        s32_prime: s_prime,
        penrose: penrose_residual(&product, &p)?,
        orthonormal: inst.has_orthonormal_a(),
    })
}
