//! Trained-model files. Parameters are stored as `{shape, data}` records
//! and rebuilt through the validating constructors on load.

use std::path::Path;

use ftp_core::network::RecurrentNet;
use ftp_core::{FeedbackMatrix, LayerSpec, Network, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone)]
pub enum Model {
    Feedforward(Network),
    Recurrent(RecurrentNet),
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TensorRecord {
    fn of(t: &Tensor) -> Self {
        TensorRecord {
            shape: t.shape().to_vec(),
            data: t.data().to_vec(),
        }
    }

    fn build(self) -> Result<Tensor> {
        Ok(Tensor::new(self.shape, self.data)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
enum ModelRecord {
    Feedforward {
        arch: Vec<LayerSpec>,
        weights: Vec<TensorRecord>,
        feedback: TensorRecord,
    },
    Recurrent {
        w_in: TensorRecord,
        w_rec: TensorRecord,
        w_out: TensorRecord,
        feedback: TensorRecord,
    },
}

impl Model {
    pub fn to_json(&self) -> String {
        let rec = match self {
            Model::Feedforward(n) => ModelRecord::Feedforward {
                arch: n.arch().to_vec(),
                weights: n.weights().iter().map(TensorRecord::of).collect(),
                feedback: TensorRecord::of(n.feedback().matrix()),
            },
            Model::Recurrent(r) => ModelRecord::Recurrent {
                w_in: TensorRecord::of(&r.w_in),
                w_rec: TensorRecord::of(&r.w_rec),
                w_out: TensorRecord::of(&r.w_out),
                feedback: TensorRecord::of(r.feedback().matrix()),
            },
        };
        serde_json::to_string(&rec).expect("model records always serialize")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let rec: ModelRecord = serde_json::from_str(text).map_err(|e| LabError::parse(origin, e.to_string()))?;
        Ok(match rec {
            ModelRecord::Feedforward {
                arch,
                weights,
                feedback,
            } => {
                let weights = weights.into_iter().map(TensorRecord::build).collect::<Result<Vec<_>>>()?;
                Model::Feedforward(Network::from_parts(&arch, weights, FeedbackMatrix::new(feedback.build()?)?)?)
            }
            ModelRecord::Recurrent {
                w_in,
                w_rec,
                w_out,
                feedback,
            } => Model::Recurrent(RecurrentNet::from_parts(
                w_in.build()?,
                w_rec.build()?,
                w_out.build()?,
                FeedbackMatrix::new(feedback.build()?)?,
            )?),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| LabError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text, path)
    }

    /// Evaluation-mode outputs for a batch.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        Ok(match self {
            Model::Feedforward(n) => n.predict(x)?,
            Model::Recurrent(r) => r.predict(x)?,
        })
    }
}
