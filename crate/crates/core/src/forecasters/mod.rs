//! Reference forecasters: conjugate Bayesian ridge regression and the
//! least-squares feature forecasters usable as recalibration scores.

mod bayes_ridge;
mod features;

pub use bayes_ridge::{fit_bayes_ridge, predict_bayes_ridge, BayesRidgePosterior};
pub use features::{fit_heteroscedastic, fit_point_distance, FeatureForecaster, FeatureKind, DEFAULT_SIGMA_FLOOR};

use crate::error::{Error, Result};
use crate::forecast::{Dataset, Forecast};
use crate::scalar::{stable_mean, Real};

/// A fitted model that produces a forecast for each input row.
pub trait Forecaster<T: Real> {
    /// Feature dimension expected by [`Forecaster::forecast`].
    fn dim(&self) -> usize;

    fn forecast(&self, x: &[T]) -> Result<Forecast<T>>;

    fn forecast_all(&self, data: &Dataset<T>) -> Result<Vec<Forecast<T>>> {
        data.rows().map(|(x, _)| self.forecast(x)).collect()
    }
}

pub(crate) fn check_dim(expected: usize, x: &[impl Copy]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::input(format!(
            "input has {} features, model expects {expected}",
            x.len()
        )))
    }
}

/// Mean absolute percent error, as a fraction (0.1 = 10%).
pub fn mape<T: Real>(predicted: &[T], actual: &[T]) -> Result<T> {
    if predicted.len() != actual.len() {
        return Err(Error::input(format!(
            "{} predictions for {} outcomes",
            predicted.len(),
            actual.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::input("mape needs at least one value"));
    }
    if let Some(i) = actual.iter().position(|a| *a == T::zero()) {
        return Err(Error::DivisionDomain(format!("actual value at row {i} is zero")));
    }
    let terms = predicted.iter().zip(actual).map(|(&p, &a)| ((p - a) / a).abs());
    Ok(stable_mean(terms).expect("non-empty"))
}
