//! Multiply-accumulate accounting per training example.
//!
//! A parametric layer costs `fan_in · fan_out` MACs per pass (for a
//! convolution, the lowered product: receptive field × channels ×
//! positions). Activation functions and optimizer arithmetic are not
//! counted.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::network::{build_stages, LayerSpec, Stage, StageOp};
use crate::rules::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MacReport {
    pub rule: Rule,
    pub forward: u64,
    /// BP: error transport through `W_2 .. W_L`. FTP: the two `G`
    /// projections. PEPITA: projecting the error onto the input.
    pub transport: u64,
    /// FTP target pass through `W_2 .. W_{L−1}`, or PEPITA's modulated pass.
    pub second_forward: u64,
    pub weight_grad: u64,
    pub total: u64,
}

impl MacReport {
    /// Total in millions rounded to two decimals.
    pub fn millions(&self) -> f64 {
        math::round(self.total as f64 / 1e4) / 100.0
    }
}

fn layer_macs(stage: &Stage) -> u64 {
    let [o, i] = stage.weight_shape();
    let positions = match &stage.op {
        StageOp::Dense { .. } => 1,
        StageOp::Conv(g) => g.positions(),
    };
    (o * i * positions) as u64
}

pub fn count_macs(arch: &[LayerSpec], rule: Rule) -> Result<MacReport> {
    let stages = build_stages(arch)?;
    let per: Vec<u64> = stages.iter().map(layer_macs).collect();
    let l = per.len();
    let all: u64 = per.iter().sum();
    let d1 = stages[0].out_dim() as u64;
    let dy = stages[l - 1].out_dim() as u64;
    let dx = stages[0].in_dim() as u64;
    let (transport, second_forward) = match rule {
        Rule::Bp => (per[1..].iter().sum(), 0),
        Rule::Ftp => {
            let inner: u64 = if l > 2 { per[1..l - 1].iter().sum() } else { 0 };
            if l == 1 {
                (0, 0)
            } else {
                (2 * d1 * dy, inner)
            }
        }
        Rule::Pepita => (dy * dx, all),
    };
    Ok(MacReport {
        rule,
        forward: all,
        transport,
        second_forward,
        weight_grad: all,
        total: all + transport + second_forward + all,
    })
}

/// `100 · (total − baseline) / baseline`.
pub fn mac_percent_delta(report: &MacReport, baseline: &MacReport) -> Result<f64> {
    if baseline.total == 0 {
        return Err(Error::Degenerate("zero-cost baseline".into()));
    }
    Ok(100.0 * (report.total as f64 - baseline.total as f64) / baseline.total as f64)
}

/// Percent change rounded to a whole number, as tabulated.
pub fn mac_percent_delta_rounded(report: &MacReport, baseline: &MacReport) -> Result<i64> {
    Ok(math::round(mac_percent_delta(report, baseline)?) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{cnn_arch, fc_arch};

    #[test]
    fn phases_sum_to_total() {
        for rule in Rule::ALL {
            let r = count_macs(&fc_arch(784, &[1024, 128], 10, 0.1), rule).unwrap();
            assert_eq!(r.total, r.forward + r.transport + r.second_forward + r.weight_grad);
        }
    }

    #[test]
    fn mnist_fc_exact_counts() {
        let arch = fc_arch(784, &[1024, 128], 10, 0.1);
        let bp = count_macs(&arch, Rule::Bp).unwrap();
        let ftp = count_macs(&arch, Rule::Ftp).unwrap();
        // forward 784·1024 + 1024·128 + 128·10 = 935168
        assert_eq!(bp.forward, 935_168);
        assert_eq!(bp.total, 2 * 935_168 + 131_072 + 1_280);
        assert_eq!(ftp.total, 2 * 935_168 + 2 * 1024 * 10 + 131_072);
        assert_eq!(mac_percent_delta(&bp, &bp).unwrap(), 0.0);
    }

    #[test]
    fn conv_layers_use_lowered_product() {
        let r = count_macs(&cnn_arch(1, 28, 28, 32, 10), Rule::Bp).unwrap();
        assert_eq!(r.forward, 32 * 25 * 576 + 4608 * 10);
    }

    #[test]
    fn zero_baseline_errors() {
        let z = MacReport {
            rule: Rule::Bp,
            forward: 0,
            transport: 0,
            second_forward: 0,
            weight_grad: 0,
            total: 0,
        };
        assert!(mac_percent_delta(&z, &z).is_err());
    }
}
