//! Fitted forecasters and their JSON model files.

use clap::ValueEnum;
use recalib::forecasters::{fit_heteroscedastic, FeatureKind};
use recalib::linalg::Matrix;
use recalib::{
    fit_bayes_ridge, fit_point_distance, BayesRidgePosterior64, Dataset64, FeatureForecaster64, Forecast64, Forecaster,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Conjugate Bayesian ridge regression (Student-t forecasts).
    BayesRidge,
    /// Least-squares mean with a log-linear standard deviation (Gaussian forecasts).
    Heteroscedastic,
    /// Least-squares mean used as a point-distance score.
    PointDistance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub prior_scale: f64,
    pub a0: f64,
    pub b0: f64,
    pub sigma_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    BayesRidge(BayesRidgePosterior64),
    Feature(FeatureForecaster64),
}

impl Forecaster<f64> for Model {
    fn dim(&self) -> usize {
        match self {
            Model::BayesRidge(m) => m.dim(),
            Model::Feature(m) => m.dim(),
        }
    }

    fn forecast(&self, x: &[f64]) -> recalib::Result<Forecast64> {
        match self {
            Model::BayesRidge(m) => m.forecast(x),
            Model::Feature(m) => m.forecast(x),
        }
    }
}

pub fn fit_model(data: &Dataset64, p: &ModelParams) -> recalib::Result<Model> {
    Ok(match p.kind {
        ModelKind::BayesRidge => Model::BayesRidge(fit_bayes_ridge(data, p.prior_scale, p.a0, p.b0)?),
        ModelKind::Heteroscedastic => Model::Feature(fit_heteroscedastic(data, p.sigma_floor)?),
        ModelKind::PointDistance => Model::Feature(fit_point_distance(data)?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelSpec {
    BayesRidge {
        weight_mean: Vec<f64>,
        precision: Vec<Vec<f64>>,
        shape: f64,
        rate: f64,
        count: usize,
    },
    Heteroscedastic {
        mean_weights: Vec<f64>,
        log_scale_weights: Vec<f64>,
        sigma_floor: f64,
    },
    PointDistance {
        mean_weights: Vec<f64>,
        sigma_floor: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    format_version: u32,
    seed: u64,
    dim: usize,
    model: ModelSpec,
}

impl ModelDocument {
    pub fn new(model: &Model, seed: u64) -> Self {
        let spec = match model {
            Model::BayesRidge(m) => {
                let p = m.precision();
                ModelSpec::BayesRidge {
                    weight_mean: m.weight_mean().to_vec(),
                    precision: (0..p.rows()).map(|i| p.row(i).to_vec()).collect(),
                    shape: m.shape(),
                    rate: m.rate(),
                    count: m.count(),
                }
            }
            Model::Feature(m) => match m.kind() {
                FeatureKind::Heteroscedastic => ModelSpec::Heteroscedastic {
                    mean_weights: m.mean_weights().to_vec(),
                    log_scale_weights: m.log_scale_weights().unwrap_or_default().to_vec(),
                    sigma_floor: m.sigma_floor(),
                },
                FeatureKind::PointDistance => ModelSpec::PointDistance {
                    mean_weights: m.mean_weights().to_vec(),
                    sigma_floor: m.sigma_floor(),
                },
            },
        };
        Self {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            dim: model.dim(),
            model: spec,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| CliError::ingest(format!("bad model file: {e}")))?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(CliError::ingest(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    pub fn model(&self) -> CliResult<Model> {
        let model = match &self.model {
            ModelSpec::BayesRidge {
                weight_mean,
                precision,
                shape,
                rate,
                count,
            } => {
                let n = weight_mean.len();
                if precision.len() != n || precision.iter().any(|r| r.len() != n) {
                    return Err(CliError::ingest("precision matrix does not match the weight dimension"));
                }
                let m = Matrix::from_rows(n, n, precision.concat());
                Model::BayesRidge(BayesRidgePosterior64::from_parts(
                    weight_mean.clone(),
                    m,
                    *shape,
                    *rate,
                    *count,
                )?)
            }
            ModelSpec::Heteroscedastic {
                mean_weights,
                log_scale_weights,
                sigma_floor,
            } => Model::Feature(FeatureForecaster64::from_parts(
                FeatureKind::Heteroscedastic,
                mean_weights.clone(),
                Some(log_scale_weights.clone()),
                *sigma_floor,
            )?),
            ModelSpec::PointDistance {
                mean_weights,
                sigma_floor,
            } => Model::Feature(FeatureForecaster64::from_parts(
                FeatureKind::PointDistance,
                mean_weights.clone(),
                None,
                *sigma_floor,
            )?),
        };
        if model.dim() != self.dim {
            return Err(CliError::ingest(format!(
                "model file declares {} features but its weights imply {}",
                self.dim,
                model.dim()
            )));
        }
        Ok(model)
    }
}
