//! Output records and their CSV, JSON and text renderings.
//!
//! Column order of every CSV follows the field order of its row struct.

use std::path::Path;

use ftp_core::alignment::AlignmentRecord;
use ftp_core::cost::{mac_percent_delta, MacReport};
use ftp_core::metrics::mean_std;
use serde::Serialize;

use crate::error::{LabError, Result};

/// One split of one epoch. Classifier rows fill `accuracy`; forecaster
/// test rows fill `rrse` and `corr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub epoch: usize,
    pub split: &'static str,
    pub accuracy: Option<f64>,
    pub rrse: Option<f64>,
    pub corr: Option<f64>,
    pub loss: f64,
    /// Since the start of this seed's run.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentRow {
    pub epoch: usize,
    /// `1`-based layer index, or `structural`.
    pub layer: String,
    pub angle_deg: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl AlignmentRow {
    pub fn from_record(r: &AlignmentRecord) -> Vec<AlignmentRow> {
        let row = |layer: String, angle_deg| AlignmentRow {
            epoch: r.epoch,
            layer,
            angle_deg,
            gamma: r.gamma,
            seed: r.seed,
        };
        let mut rows: Vec<AlignmentRow> =
            r.layer_angles.iter().enumerate().map(|(i, &a)| row((i + 1).to_string(), a)).collect();
        rows.push(row("structural".into(), r.structural_angle));
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rule: String,
    pub bits: u32,
    pub alpha: f64,
    pub seed: u64,
    pub test_accuracy: f64,
    pub corrupted_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        let (mean, std) = mean_std(values).ok()?;
        Some(MeanStd {
            mean,
            std,
            n: values.len(),
        })
    }
}

/// Last-epoch test metrics of one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalMetrics {
    pub seed: u64,
    pub test_accuracy: Option<f64>,
    pub test_rrse: Option<f64>,
    pub test_corr: Option<f64>,
    pub test_loss: f64,
    pub wall_seconds: f64,
}

/// `summary.json`. Every key is always present; metrics that do not apply
/// to the task are `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algo: String,
    pub arch: String,
    pub dataset: String,
    pub epochs: usize,
    pub gamma: f64,
    pub lr: f64,
    pub seeds: Vec<u64>,
    pub finals: Vec<FinalMetrics>,
    pub test_accuracy: Option<MeanStd>,
    pub test_rrse: Option<MeanStd>,
    pub test_corr: Option<MeanStd>,
    pub test_loss: Option<MeanStd>,
    pub wall_seconds: f64,
}

impl Summary {
    /// Aggregates `finals` across seeds.
    pub fn aggregate(
        algo: &str,
        arch: &str,
        dataset: &str,
        epochs: usize,
        gamma: f64,
        lr: f64,
        finals: Vec<FinalMetrics>,
    ) -> Summary {
        let pick = |f: fn(&FinalMetrics) -> Option<f64>| -> Option<MeanStd> {
            let v: Option<Vec<f64>> = finals.iter().map(f).collect();
            v.and_then(|v| MeanStd::of(&v))
        };
        Summary {
            algo: algo.into(),
            arch: arch.into(),
            dataset: dataset.into(),
            epochs,
            gamma,
            lr,
            seeds: finals.iter().map(|f| f.seed).collect(),
            test_accuracy: pick(|f| f.test_accuracy),
            test_rrse: pick(|f| f.test_rrse),
            test_corr: pick(|f| f.test_corr),
            test_loss: pick(|f| Some(f.test_loss)),
            wall_seconds: finals.iter().map(|f| f.wall_seconds).sum(),
            finals,
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::io(path, io),
        other => LabError::parse(path, format!("{other:?}")),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report records always serialize");
    std::fs::write(path, text + "\n").map_err(|e| LabError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacRow {
    pub model: String,
    pub rule: String,
    pub forward: u64,
    pub transport: u64,
    pub second_forward: u64,
    pub weight_grad: u64,
    pub total: u64,
    pub millions: f64,
    /// Change relative to BP on the same model, in percent.
    pub delta_vs_bp: f64,
}

impl MacRow {
    pub fn new(model: &str, report: &MacReport, bp: &MacReport) -> Result<MacRow> {
        Ok(MacRow {
            model: model.into(),
            rule: report.rule.name().into(),
            forward: report.forward,
            transport: report.transport,
            second_forward: report.second_forward,
            weight_grad: report.weight_grad,
            total: report.total,
            millions: report.millions(),
            delta_vs_bp: mac_percent_delta(report, bp)?,
        })
    }
}

/// Right-aligned text table of the MAC rows.
pub fn mac_text_table(rows: &[MacRow]) -> String {
    let header = ["model", "rule", "forward", "transport", "2nd pass", "weight grad", "total", "M", "vs bp"];
    let cells: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                r.rule.clone(),
                r.forward.to_string(),
                r.transport.to_string(),
                r.second_forward.to_string(),
                r.weight_grad.to_string(),
                r.total.to_string(),
                format!("{:.2}", r.millions),
                format!("{:+.0}%", r.delta_vs_bp.round()),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[String]| {
        row.iter()
            .zip(width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(&header.map(String::from));
    out.push('\n');
    out.push_str(&width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
    for row in &cells {
        out.push('\n');
        out.push_str(&line(row));
    }
    out.push('\n');
    out
}
