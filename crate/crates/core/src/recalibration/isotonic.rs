use crate::error::{Error, Result};
use crate::recalibration::map::RecalibrationMap;
use crate::scalar::{ensure_probability, Real};

/// Calibration pairs `(score, target)`, both probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RecalDataset<T> {
    pairs: Vec<(T, T)>,
}

impl<T: Real> RecalDataset<T> {
    pub fn new(pairs: Vec<(T, T)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::input("recalibration dataset is empty"));
        }
        for &(p, t) in &pairs {
            ensure_probability(p, "recalibration score")?;
            ensure_probability(t, "recalibration target")?;
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(T, T)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Weighted least-squares projection of `values` onto non-decreasing
/// sequences (pool adjacent violators).
pub fn pava<T: Real>(values: &[T], weights: &[T]) -> Result<Vec<T>> {
    if values.len() != weights.len() {
        return Err(Error::input("values and weights differ in length"));
    }
    if values.is_empty() {
        return Err(Error::input("isotonic regression of an empty sequence"));
    }
    check_weights(weights)?;

    // blocks of (weighted mean, total weight, length)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        if !v.is_finite() {
            return Err(Error::input("isotonic regression value is not finite"));
        }
        let mut cur = (v, w, 1usize);
        while let Some(&(pm, pw, pn)) = blocks.last() {
            if pm <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = pw + cur.1;
            cur = ((pm * pw + cur.0 * cur.1) / tw, tw, pn + cur.2);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, n) in blocks {
        out.extend(std::iter::repeat_n(m, n));
    }
    Ok(out)
}

fn check_weights<T: Real>(weights: &[T]) -> Result<()> {
    match weights.iter().position(|w| !(*w > T::zero() && w.is_finite())) {
        Some(i) => Err(Error::input(format!("weight {i} must be positive and finite"))),
        None => Ok(()),
    }
}

/// Sorts by score and merges tied scores into one point carrying the
/// summed weight and the weighted-mean target.
pub(crate) fn merge_ties<T: Real>(pairs: &[(T, T)], weights: &[T]) -> Vec<(T, T, T)> {
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.sort_by(|&a, &b| pairs[a].0.partial_cmp(&pairs[b].0).expect("finite scores"));
    let mut merged: Vec<(T, T, T)> = Vec::with_capacity(pairs.len());
    for i in idx {
        let (u, t) = pairs[i];
        let w = weights[i];
        match merged.last_mut() {
            Some(last) if last.0 == u => {
                let tw = last.2 + w;
                last.1 = (last.1 * last.2 + t * w) / tw;
                last.2 = tw;
            }
            _ => merged.push((u, t, w)),
        }
    }
    merged
}

/// Fits an isotonic recalibration map through the calibration pairs.
pub fn fit_isotonic<T: Real>(points: &RecalDataset<T>, weights: &[T]) -> Result<RecalibrationMap<T>> {
    fit_isotonic_with(points, weights, true)
}

/// [`fit_isotonic`] with an explicit boundary convention.
pub fn fit_isotonic_with<T: Real>(
    points: &RecalDataset<T>,
    weights: &[T],
    anchored: bool,
) -> Result<RecalibrationMap<T>> {
    if weights.len() != points.len() {
        return Err(Error::input(format!(
            "{} weights for {} calibration points",
            weights.len(),
            points.len()
        )));
    }
    check_weights(weights)?;
    let merged = merge_ties(points.pairs(), weights);
    let targets: Vec<T> = merged.iter().map(|m| m.1).collect();
    let ws: Vec<T> = merged.iter().map(|m| m.2).collect();
    let fitted = pava(&targets, &ws)?;
    let knots = merged
        .iter()
        .zip(fitted)
        .map(|(m, v)| (m.0, v.max(T::zero()).min(T::one())))
        .collect::<Vec<_>>();
    // rounding in pooled means can break monotonicity by an ulp
    let mut knots = knots;
    for i in 1..knots.len() {
        if knots[i].1 < knots[i - 1].1 {
            knots[i].1 = knots[i - 1].1;
        }
    }
    RecalibrationMap::new(knots, anchored)
}
