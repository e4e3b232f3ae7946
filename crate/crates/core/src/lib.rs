//! Recalibrated probabilistic forecasts and their use in a perishable
//! inventory decision problem.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The `*64`
//! and `*32` aliases below fix the scalar for the common cases.
//!
//! ```
//! use recalib::{Forecast64, Predictive, Recalibrator64};
//!
//! let forecasts: Vec<Forecast64> = (0..200).map(|_| Forecast64::gaussian(0.0, 1.0).unwrap()).collect();
//! let ys: Vec<f64> = (0..200).map(|i| (i as f64 - 99.5) / 25.0).collect();
//! let recal = Recalibrator64::fit(&forecasts, &ys).unwrap();
//! let p = recal.cdf(&forecasts[0], 1.0).unwrap();
//! assert!(p > 0.0 && p < 1.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
mod error;
pub mod forecast;
pub mod forecasters;
pub mod inventory;
pub mod linalg;
pub mod recalibration;
mod scalar;
pub mod special;

pub use diagnostics::{
    calibration_curve, calibration_error, interval_coverage, sharpness, CalibrationCurve, CalibrationReport, WeightMode,
};
pub use error::{Error, Result};
pub use forecast::{Dataset, Forecast, Predictive, QuantileGrid};
pub use forecasters::{
    fit_bayes_ridge, fit_heteroscedastic, fit_point_distance, BayesRidgePosterior, FeatureForecaster, Forecaster,
};
pub use inventory::{demand_pmf, dp_plan, DemandPmf, Episode, InventoryState, MdpConfig, Plan};
pub use recalibration::{
    fit_isotonic, kfold_recalibrate, recalibrate, CalibratedForecaster, RecalDataset, RecalibrationMap, Recalibrator,
};
pub use scalar::{stable_mean, stable_sum, CompensatedSum, Real};

pub type Forecast64 = Forecast<f64>;
pub type Forecast32 = Forecast<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type RecalibrationMap64 = RecalibrationMap<f64>;
pub type RecalibrationMap32 = RecalibrationMap<f32>;
pub type Recalibrator64 = Recalibrator<f64>;
pub type Recalibrator32 = Recalibrator<f32>;
pub type CalibrationReport64 = CalibrationReport<f64>;
pub type CalibrationReport32 = CalibrationReport<f32>;
pub type BayesRidgePosterior64 = BayesRidgePosterior<f64>;
pub type FeatureForecaster64 = FeatureForecaster<f64>;
pub type DemandPmf64 = DemandPmf<f64>;
pub type Plan64 = Plan<f64>;
pub type Episode64 = Episode<f64>;
