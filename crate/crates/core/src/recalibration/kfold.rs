use std::ops::Range;

use crate::error::{Error, Result};
use crate::forecast::{Dataset, Forecast, Predictive};
use crate::forecasters::Forecaster;
use crate::recalibration::{moments_from_quantiles, CalibratedForecaster, RecalibrationOptions, Recalibrator};
use crate::scalar::{stable_mean, Real};

/// Contiguous fold boundaries; sizes differ by at most one row.
pub fn fold_ranges(n: usize, k: usize) -> Result<Vec<Range<usize>>> {
    if k < 2 {
        return Err(Error::input(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::input(format!("{k} folds requested for {n} rows")));
    }
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    Ok((0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// K base models, each recalibrated on the fold it did not see. The
/// predictive CDF is the pointwise mean of the member CDFs.
#[derive(Debug, Clone)]
pub struct KFoldCalibrated<T, M> {
    members: Vec<CalibratedForecaster<T, M>>,
}

impl<T: Real, M: Forecaster<T>> KFoldCalibrated<T, M> {
    pub fn from_members(members: Vec<CalibratedForecaster<T, M>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::input("k-fold ensemble has no members"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[CalibratedForecaster<T, M>] {
        &self.members
    }

    /// The averaged forecast for input `x`.
    pub fn predict(&self, x: &[T]) -> Result<MixtureForecast<'_, T>> {
        let components = self
            .members
            .iter()
            .map(|m| Ok((m.base_forecast(x)?, m.recalibrator())))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureForecast { components })
    }

    pub fn cdf(&self, x: &[T], y: T) -> Result<T> {
        self.predict(x)?.cdf(y)
    }
}

/// Equal-weight mixture of recalibrated forecasts.
#[derive(Debug, Clone)]
pub struct MixtureForecast<'a, T> {
    components: Vec<(Forecast<T>, &'a Recalibrator<T>)>,
}

impl<T: Real> Predictive<T> for MixtureForecast<'_, T> {
    fn cdf(&self, y: T) -> Result<T> {
        let values = self
            .components
            .iter()
            .map(|(f, r)| r.cdf(f, y))
            .collect::<Result<Vec<T>>>()?;
        Ok(stable_mean(values).expect("non-empty mixture"))
    }

    /// Bisection on the averaged CDF, bracketed by the component quantiles.
    fn quantile(&self, p: T) -> Result<T> {
        let qs = self
            .components
            .iter()
            .map(|(f, r)| r.quantile(f, p))
            .collect::<Result<Vec<T>>>()?;
        let mut lo = qs.iter().copied().fold(T::infinity(), T::min);
        let mut hi = qs.iter().copied().fold(T::neg_infinity(), T::max);
        if self.cdf(lo)? >= p {
            return Ok(lo);
        }
        for _ in 0..200 {
            let mid = lo + (hi - lo) * T::half();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn variance(&self) -> Result<T> {
        moments_from_quantiles(|p| self.quantile(p))
    }
}

/// Trains `base_fit` on all folds but one and recalibrates on the held-out
/// fold, for each of the `k` contiguous folds of `data`.
pub fn kfold_recalibrate<T, M, F>(data: &Dataset<T>, k: usize, base_fit: F) -> Result<KFoldCalibrated<T, M>>
where
    T: Real,
    M: Forecaster<T>,
    F: FnMut(&Dataset<T>) -> Result<M>,
{
    kfold_recalibrate_with(data, k, &RecalibrationOptions::default(), base_fit)
}

/// [`kfold_recalibrate`] with explicit fitting options for every member map.
/// Per-row weights are not supported here since each fold sees other rows.
pub fn kfold_recalibrate_with<T, M, F>(
    data: &Dataset<T>,
    k: usize,
    opts: &RecalibrationOptions<T>,
    mut base_fit: F,
) -> Result<KFoldCalibrated<T, M>>
where
    T: Real,
    M: Forecaster<T>,
    F: FnMut(&Dataset<T>) -> Result<M>,
{
    if opts.weights.is_some() {
        return Err(Error::input("k-fold recalibration does not take per-row weights"));
    }
    let folds = fold_ranges(data.len(), k)?;
    let mut members = Vec::with_capacity(k);
    for held in &folds {
        let train_idx: Vec<usize> = (0..data.len()).filter(|i| !held.contains(i)).collect();
        let calib_idx: Vec<usize> = held.clone().collect();
        let model = base_fit(&data.select(&train_idx)?)?;
        let calib = data.select(&calib_idx)?;
        let forecasts = model.forecast_all(&calib)?;
        let recal = Recalibrator::fit_with(&forecasts, calib.targets(), opts)?;
        members.push(CalibratedForecaster::new(model, recal));
    }
    KFoldCalibrated::from_members(members)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_cover_rows_once() {
        let f = fold_ranges(10, 3).unwrap();
        assert_eq!(f, vec![0..4, 4..7, 7..10]);
        assert!(fold_ranges(3, 4).is_err());
        assert!(fold_ranges(3, 1).is_err());
    }
}
