//! Batch verification of the linear two-hidden-layer analysis over many
//! random instances.

use ftp_core::theory::{collinearity_deg, lemma1_simulate, theorem1_check, theorem2_check, LemmaDims, LemmaInstance};
use ftp_core::Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

pub const DIMS: LemmaDims = LemmaDims::new(4, 3, 5, 2);
pub const RECURSION_TOL: f64 = 1e-8;
pub const COLLINEAR_TOL_DEG: f64 = 1e-6;
pub const GAUSS_NEWTON_TOL: f64 = 1e-6;
/// Instance `i` of the 90° and recursion checks uses `Rng::new(SEED_BASE + i)`.
pub const SEED_BASE: u64 = 10_000;
/// Instance `i` of the Gauss–Newton check uses `Rng::new(GN_SEED_BASE + i)`.
pub const GN_SEED_BASE: u64 = 50_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub instances: usize,
    pub gauss_newton_instances: usize,
    pub steps: usize,
    pub eta: f64,
    /// Largest gap between simulated matrices and the scalar closed form.
    pub max_recursion_deviation: f64,
    /// Largest angle between `e` and `y` over steps `t ≥ 1`.
    pub max_error_angle_deg: f64,
    /// Smallest of the two inner products over steps `t ≥ 2`.
    pub min_inner_product: f64,
    /// Steps `t ≥ 2` where an inner product was not strictly positive.
    pub inner_product_violations: usize,
    /// Steps skipped because `e` fell to rounding level.
    pub vacuous_steps: usize,
    pub max_gauss_newton_residual: f64,
    pub max_gauss_newton_normalized_residual: f64,
    pub recursion_ok: bool,
    pub ninety_degree_ok: bool,
    pub gauss_newton_ok: bool,
}

impl TheoryReport {
    pub fn all_ok(&self) -> bool {
        self.recursion_ok && self.ninety_degree_ok && self.gauss_newton_ok
    }
}

/// Instances alternate between orthonormal and Gaussian `A`. Step `t = 0`
/// and `t = 1` are excluded from the inner-product check because `W₃ = 0`
/// makes both products vanish.
pub fn verify_theory(cfg: &RunConfig) -> Result<TheoryReport> {
    let etas = [cfg.theory_eta; 3];
    let steps = cfg.theory_steps;
    let mut max_dev = 0.0f64;
    let mut max_angle = 0.0f64;
    let mut min_inner = f64::INFINITY;
    let mut violations = 0;
    let mut vacuous = 0;
    for i in 0..cfg.theory_instances {
        let inst = LemmaInstance::random(DIMS, i % 2 == 0, etas, &mut Rng::new(SEED_BASE + i as u64))?;
        for s in lemma1_simulate(&inst, steps)? {
            max_dev = max_dev.max(s.deviation(&inst));
            if s.t >= 1 {
                if let Ok(a) = collinearity_deg(&s.e, &inst.y) {
                    max_angle = max_angle.max(a);
                }
            }
            if s.t >= 2 {
                match theorem1_check(&inst, &s) {
                    Ok(c) => {
                        min_inner = min_inner.min(c.first_layer.min(c.second_layer));
                        if !c.both_positive() {
                            violations += 1;
                        }
                    }
                    Err(ftp_core::Error::Degenerate(_)) => vacuous += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    let mut max_res = 0.0f64;
    let mut max_norm = 0.0f64;
    for i in 0..cfg.theory_gn_instances {
        let inst = LemmaInstance::random(DIMS, true, etas, &mut Rng::new(GN_SEED_BASE + i as u64))?;
        for s in lemma1_simulate(&inst, steps)?.iter().skip(2) {
            let c = theorem2_check(&inst, s)?;
            max_res = max_res.max(c.residual);
            max_norm = max_norm.max(c.normalized_residual);
        }
    }
    Ok(TheoryReport {
        instances: cfg.theory_instances,
        gauss_newton_instances: cfg.theory_gn_instances,
        steps,
        eta: cfg.theory_eta,
        max_recursion_deviation: max_dev,
        max_error_angle_deg: max_angle,
        min_inner_product: min_inner,
        inner_product_violations: violations,
        vacuous_steps: vacuous,
        max_gauss_newton_residual: max_res,
        max_gauss_newton_normalized_residual: max_norm,
        recursion_ok: max_dev <= RECURSION_TOL && max_angle <= COLLINEAR_TOL_DEG,
        ninety_degree_ok: violations == 0 && vacuous == 0,
        gauss_newton_ok: max_res <= GAUSS_NEWTON_TOL && max_norm <= GAUSS_NEWTON_TOL,
    })
}
