//! Recalibration of forecast CDFs: build `(score, empirical frequency)`
//! pairs from a calibration set, fit a monotone map `R` by isotonic
//! regression, and serve `R ∘ F` as the calibrated forecast.

mod isotonic;
mod kfold;
mod map;

pub use isotonic::{fit_isotonic, fit_isotonic_with, pava, RecalDataset};
pub use kfold::{fold_ranges, kfold_recalibrate, kfold_recalibrate_with, KFoldCalibrated, MixtureForecast};
pub use map::{MapDocument, RecalibrationMap, MAP_FORMAT_VERSION};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forecast::{Forecast, Predictive};
use crate::forecasters::Forecaster;
use crate::scalar::{ensure_probability, stable_sum, Real};

/// Nodes of the midpoint rule used for moments of recalibrated forecasts.
pub const MOMENT_NODES: usize = 1024;

/// Fraction of `scores` at or below `p`.
pub fn empirical_cdf<T: Real>(scores: &[T], p: T) -> Result<T> {
    if scores.is_empty() {
        return Err(Error::input("empirical CDF of an empty score list"));
    }
    ensure_probability(p, "level")?;
    for s in scores {
        ensure_probability(*s, "score")?;
    }
    let count = scores.iter().filter(|s| **s <= p).count();
    Ok(T::from_count(count) / T::from_count(scores.len()))
}

/// `|{s <= x}| / n` over an ascending slice.
fn sorted_ecdf<T: Real>(sorted: &[T], x: T) -> T {
    T::from_count(sorted.partition_point(|s| *s <= x)) / T::from_count(sorted.len())
}

fn sorted_copy<T: Real>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    v
}

/// How raw forecast scores are mapped into [0, 1] before the map `R`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreTransform<T> {
    /// Scores are already probabilities (proper forecast CDFs).
    Identity,
    /// Feature scores, ranked through the empirical CDF of the calibration
    /// scores (kept sorted ascending).
    Empirical(Vec<T>),
}

impl<T: Real> ScoreTransform<T> {
    fn apply(&self, raw: T) -> T {
        match self {
            ScoreTransform::Identity => raw.max(T::zero()).min(T::one()),
            ScoreTransform::Empirical(sorted) => sorted_ecdf(sorted, raw),
        }
    }

    /// Smallest raw score whose rank reaches `q` (the first score for q = 0).
    fn inverse(&self, q: T) -> T {
        match self {
            ScoreTransform::Identity => q,
            ScoreTransform::Empirical(sorted) => {
                let n = sorted.len();
                let k = (q * T::from_count(n)).ceil().to_usize().unwrap_or(0);
                sorted[k.clamp(1, n) - 1]
            }
        }
    }
}

/// Raw scores `cdf_eval(F_t, y_t)` and the transform that puts them on [0, 1].
fn scores_of<T: Real>(forecasts: &[Forecast<T>], ys: &[T]) -> Result<(Vec<T>, ScoreTransform<T>)> {
    if forecasts.len() != ys.len() {
        return Err(Error::input(format!(
            "{} forecasts for {} outcomes",
            forecasts.len(),
            ys.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::input("calibration set is empty"));
    }
    let features = forecasts.iter().filter(|f| !f.is_proper()).count();
    if features != 0 && features != forecasts.len() {
        return Err(Error::input(
            "calibration set mixes point-distance scores with proper distributions",
        ));
    }
    let raw = forecasts
        .iter()
        .zip(ys)
        .map(|(f, &y)| f.cdf_eval(y))
        .collect::<Result<Vec<T>>>()?;
    if features == 0 {
        Ok((raw, ScoreTransform::Identity))
    } else {
        let sorted = sorted_copy(&raw);
        let transform = ScoreTransform::Empirical(sorted);
        let ranked = raw.iter().map(|&r| transform.apply(r)).collect();
        Ok((ranked, transform))
    }
}

fn pairs_from_scores<T: Real>(scores: &[T]) -> Result<RecalDataset<T>> {
    let sorted = sorted_copy(scores);
    RecalDataset::new(scores.iter().map(|&p| (p, sorted_ecdf(&sorted, p))).collect())
}

/// Pairs each calibration score `p_t = F_t(y_t)` with the fraction of
/// scores at or below it.
pub fn build_recal_dataset<T: Real>(forecasts: &[Forecast<T>], ys: &[T]) -> Result<RecalDataset<T>> {
    let (scores, _) = scores_of(forecasts, ys)?;
    pairs_from_scores(&scores)
}

/// Recalibrated level-`p` quantile `F^-1(R^-1(p))`.
pub fn recalibrated_quantile<T: Real>(m: &RecalibrationMap<T>, f: &Forecast<T>, p: T) -> Result<T> {
    f.quantile(m.invert(p)?)
}

/// Options controlling how a recalibrator is fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct RecalibrationOptions<T> {
    /// Anchor the map through (0, 0) and (1, 1).
    pub anchored: bool,
    /// Per-row weights for the isotonic fit; unit weights when `None`.
    pub weights: Option<Vec<T>>,
}

impl<T> Default for RecalibrationOptions<T> {
    fn default() -> Self {
        Self {
            anchored: true,
            weights: None,
        }
    }
}

/// Fitted map `R` together with the score transform it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct Recalibrator<T> {
    map: RecalibrationMap<T>,
    transform: ScoreTransform<T>,
}

impl<T: Real> Recalibrator<T> {
    pub fn identity() -> Self {
        Self {
            map: RecalibrationMap::identity(),
            transform: ScoreTransform::Identity,
        }
    }

    pub fn from_map(map: RecalibrationMap<T>) -> Self {
        Self {
            map,
            transform: ScoreTransform::Identity,
        }
    }

    pub fn fit(forecasts: &[Forecast<T>], ys: &[T]) -> Result<Self> {
        Self::fit_with(forecasts, ys, &RecalibrationOptions::default())
    }

    pub fn fit_with(forecasts: &[Forecast<T>], ys: &[T], opts: &RecalibrationOptions<T>) -> Result<Self> {
        let (scores, transform) = scores_of(forecasts, ys)?;
        let data = pairs_from_scores(&scores)?;
        let weights = match &opts.weights {
            Some(w) => w.clone(),
            None => vec![T::one(); data.len()],
        };
        let map = fit_isotonic_with(&data, &weights, opts.anchored)?;
        Ok(Self { map, transform })
    }

    pub fn map(&self) -> &RecalibrationMap<T> {
        &self.map
    }

    pub fn transform(&self) -> &ScoreTransform<T> {
        &self.transform
    }

    /// `R(F(y))`.
    pub fn cdf(&self, f: &Forecast<T>, y: T) -> Result<T> {
        self.check_family(f)?;
        let score = self.transform.apply(f.cdf_eval(y)?);
        Ok(self.map.eval(score))
    }

    /// `F^-1(R^-1(p))`; for feature scores the inverse runs through the
    /// calibration scores, giving `mu + s` for the matching raw score `s`.
    pub fn quantile(&self, f: &Forecast<T>, p: T) -> Result<T> {
        self.check_family(f)?;
        let level = self.map.invert(p)?;
        match &self.transform {
            ScoreTransform::Identity => f.quantile(level),
            ScoreTransform::Empirical(_) => Ok(f.center() + self.transform.inverse(level)),
        }
    }

    fn check_family(&self, f: &Forecast<T>) -> Result<()> {
        let feature_map = matches!(self.transform, ScoreTransform::Empirical(_));
        if feature_map == f.is_proper() {
            return Err(Error::input(if feature_map {
                "recalibrator was fitted on point-distance scores but received a distribution"
            } else {
                "recalibrator was fitted on distributions but received a point-distance score"
            }));
        }
        Ok(())
    }

    /// Pairs this recalibrator with one forecast.
    pub fn attach<'a>(&'a self, forecast: &'a Forecast<T>) -> RecalibratedForecast<'a, T> {
        RecalibratedForecast { forecast, recal: self }
    }

    pub fn to_document(&self, seed: Option<u64>) -> MapDocument<T> {
        MapDocument {
            format_version: MAP_FORMAT_VERSION,
            seed,
            anchored: self.map.is_anchored(),
            knots: self.map.knots().iter().map(|&(u, v)| [u, v]).collect(),
            raw_scores: match &self.transform {
                ScoreTransform::Identity => None,
                ScoreTransform::Empirical(s) => Some(s.clone()),
            },
        }
    }

    pub fn from_document(doc: &MapDocument<T>) -> Result<Self>
    where
        T: Serialize + DeserializeOwned,
    {
        let map = doc.map()?;
        let transform = match &doc.raw_scores {
            None => ScoreTransform::Identity,
            Some(s) if s.is_empty() => return Err(Error::input("raw score list is empty")),
            Some(s) => {
                if s.iter().any(|x| !x.is_finite()) || s.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::input("raw scores must be finite and ascending"));
                }
                ScoreTransform::Empirical(s.clone())
            }
        };
        Ok(Self { map, transform })
    }
}

/// Mean and variance from the quantile function by the midpoint rule.
pub(crate) fn moments_from_quantiles<T: Real>(q: impl Fn(T) -> Result<T>) -> Result<T> {
    let n = T::from_count(MOMENT_NODES);
    let values = (0..MOMENT_NODES)
        .map(|i| q((T::from_count(i) + T::half()) / n))
        .collect::<Result<Vec<T>>>()?;
    let mean = stable_sum(values.iter().copied()) / n;
    let var = stable_sum(values.iter().map(|v| (*v - mean) * (*v - mean))) / n;
    Ok(var)
}

/// A forecast viewed through a recalibrator: CDF `R ∘ F`.
#[derive(Debug, Clone, Copy)]
pub struct RecalibratedForecast<'a, T> {
    forecast: &'a Forecast<T>,
    recal: &'a Recalibrator<T>,
}

impl<'a, T: Real> RecalibratedForecast<'a, T> {
    pub fn base(&self) -> &Forecast<T> {
        self.forecast
    }
}

impl<T: Real> Predictive<T> for RecalibratedForecast<'_, T> {
    fn cdf(&self, y: T) -> Result<T> {
        self.recal.cdf(self.forecast, y)
    }

    fn quantile(&self, p: T) -> Result<T> {
        self.recal.quantile(self.forecast, p)
    }

    /// Approximated by a [`MOMENT_NODES`]-point midpoint rule over the
    /// quantile function.
    fn variance(&self) -> Result<T> {
        moments_from_quantiles(|p| self.recal.quantile(self.forecast, p))
    }
}

/// A base forecaster composed with a fitted recalibrator.
#[derive(Debug, Clone)]
pub struct CalibratedForecaster<T, M> {
    base: M,
    recal: Recalibrator<T>,
}

impl<T: Real, M: Forecaster<T>> CalibratedForecaster<T, M> {
    pub fn new(base: M, recal: Recalibrator<T>) -> Self {
        Self { base, recal }
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn recalibrator(&self) -> &Recalibrator<T> {
        &self.recal
    }

    pub fn base_forecast(&self, x: &[T]) -> Result<Forecast<T>> {
        self.base.forecast(x)
    }

    /// Calibrated CDF at `y` for input `x`.
    pub fn cdf(&self, x: &[T], y: T) -> Result<T> {
        self.recal.cdf(&self.base.forecast(x)?, y)
    }

    pub fn quantile(&self, x: &[T], p: T) -> Result<T> {
        self.recal.quantile(&self.base.forecast(x)?, p)
    }
}

/// Fits `R` on the calibration forecasts and composes it with `base`.
pub fn recalibrate<T: Real, M: Forecaster<T>>(
    base: M,
    calib_forecasts: &[Forecast<T>],
    calib_ys: &[T],
) -> Result<CalibratedForecaster<T, M>> {
    Ok(CalibratedForecaster::new(
        base,
        Recalibrator::fit(calib_forecasts, calib_ys)?,
    ))
}
