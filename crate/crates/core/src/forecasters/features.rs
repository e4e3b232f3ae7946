use crate::error::{Error, Result};
use crate::forecast::{Dataset, Forecast};
use crate::forecasters::{check_dim, Forecaster};
use crate::linalg::{augment, design_with_intercept, dot, least_squares};
use crate::scalar::{ensure_finite, Real};

/// Lower bound on fitted standard deviations, in target units.
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Score `y - mu(x)`.
    PointDistance,
    /// Gaussian with fitted mean and log-linear standard deviation.
    Heteroscedastic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureForecaster<T> {
    kind: FeatureKind,
    mean_weights: Vec<T>,
    log_scale_weights: Option<Vec<T>>,
    sigma_floor: T,
}

impl<T: Real> FeatureForecaster<T> {
    pub fn from_parts(
        kind: FeatureKind,
        mean_weights: Vec<T>,
        log_scale_weights: Option<Vec<T>>,
        sigma_floor: T,
    ) -> Result<Self> {
        if mean_weights.is_empty() {
            return Err(Error::input("mean weights must include the intercept"));
        }
        for w in mean_weights.iter().chain(log_scale_weights.iter().flatten()) {
            ensure_finite(*w, "weight")?;
        }
        if !(sigma_floor > T::zero()) {
            return Err(Error::input("sigma_floor must be > 0"));
        }
        match (kind, &log_scale_weights) {
            (FeatureKind::Heteroscedastic, Some(ls)) if ls.len() == mean_weights.len() => {}
            (FeatureKind::Heteroscedastic, _) => {
                return Err(Error::input(
                    "heteroscedastic model needs log-scale weights of matching length",
                ))
            }
            (FeatureKind::PointDistance, None) => {}
            (FeatureKind::PointDistance, Some(_)) => {
                return Err(Error::input("point-distance model has no log-scale weights"))
            }
        }
        Ok(Self {
            kind,
            mean_weights,
            log_scale_weights,
            sigma_floor,
        })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    /// Intercept first, then one weight per feature.
    pub fn mean_weights(&self) -> &[T] {
        &self.mean_weights
    }

    pub fn log_scale_weights(&self) -> Option<&[T]> {
        self.log_scale_weights.as_deref()
    }

    pub fn sigma_floor(&self) -> T {
        self.sigma_floor
    }

    pub fn mean(&self, x: &[T]) -> Result<T> {
        check_dim(self.mean_weights.len() - 1, x)?;
        Ok(dot(&self.mean_weights, &augment(x)))
    }

    /// Fitted standard deviation, clamped below by `sigma_floor`.
    pub fn sigma(&self, x: &[T]) -> Result<Option<T>> {
        check_dim(self.mean_weights.len() - 1, x)?;
        Ok(self.log_scale_weights.as_ref().map(|w| {
            let s = dot(w, &augment(x)).exp();
            if s.is_nan() {
                self.sigma_floor
            } else {
                s.max(self.sigma_floor)
            }
        }))
    }
}

impl<T: Real> Forecaster<T> for FeatureForecaster<T> {
    fn dim(&self) -> usize {
        self.mean_weights.len() - 1
    }

    fn forecast(&self, x: &[T]) -> Result<Forecast<T>> {
        let mu = self.mean(x)?;
        match self.sigma(x)? {
            Some(sigma) => Forecast::gaussian(mu, sigma),
            None => Forecast::point_distance(mu),
        }
    }
}

fn ols_with_intercept<T: Real>(data: &Dataset<T>) -> Result<Vec<T>> {
    if data.len() <= data.dim() + 1 {
        return Err(Error::input(format!(
            "need more than {} rows to fit {} features with intercept, got {}",
            data.dim() + 1,
            data.dim(),
            data.len()
        )));
    }
    let design = design_with_intercept(data.rows().map(|(x, _)| x), data.dim());
    least_squares(&design, data.targets())
}

/// Ordinary least squares mean; forecasts are point-distance scores.
pub fn fit_point_distance<T: Real>(data: &Dataset<T>) -> Result<FeatureForecaster<T>> {
    let w = ols_with_intercept(data)?;
    FeatureForecaster::from_parts(FeatureKind::PointDistance, w, None, T::lit(DEFAULT_SIGMA_FLOOR))
}

/// Two-stage fit: least-squares mean, then least squares of
/// `log(|residual| + sigma_floor)` on the same features.
pub fn fit_heteroscedastic<T: Real>(data: &Dataset<T>, sigma_floor: T) -> Result<FeatureForecaster<T>> {
    if !(sigma_floor > T::zero() && sigma_floor.is_finite()) {
        return Err(Error::input("sigma_floor must be a positive finite number"));
    }
    let mean_w = ols_with_intercept(data)?;
    let design = design_with_intercept(data.rows().map(|(x, _)| x), data.dim());
    let log_abs: Vec<T> = data
        .rows()
        .map(|(x, y)| {
            let r = y - dot(&mean_w, &augment(x));
            (r.abs() + sigma_floor).ln()
        })
        .collect();
    let scale_w = least_squares(&design, &log_abs)?;
    FeatureForecaster::from_parts(FeatureKind::Heteroscedastic, mean_w, Some(scale_w), sigma_floor)
}
