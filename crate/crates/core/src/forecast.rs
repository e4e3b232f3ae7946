//! Per-row predictive distributions and the labelled dataset type.

use crate::error::{Error, Result};
use crate::scalar::{ensure_finite, ensure_probability, Real};
use crate::special;

/// Multiple of the scale used as the finite stand-in for the 0 and 1
/// quantiles of unbounded families. Past 38 standard deviations the normal
/// CDF is 0 or 1 in double precision.
pub const TAIL_SENTINEL_SCALES: f64 = 38.0;

/// Anything that behaves like a predictive CDF for a single row.
pub trait Predictive<T: Real> {
    /// Value of the CDF (or raw score, for feature-only forecasts) at `y`.
    fn cdf(&self, y: T) -> Result<T>;

    /// Generalized inverse `inf { y : p <= F(y) }`.
    fn quantile(&self, p: T) -> Result<T>;

    /// Variance of the random variable whose CDF this is.
    fn variance(&self) -> Result<T>;
}

/// A single predictive distribution.
///
/// Variants can only be built through the validating constructors
/// ([`Forecast::gaussian`], [`Forecast::student_t`], ...), so every value
/// satisfies its family's parameter constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Forecast<T> {
    #[non_exhaustive]
    Gaussian {
        mu: T,
        sigma: T,
    },
    #[non_exhaustive]
    StudentT {
        loc: T,
        scale: T,
        dof: T,
    },
    QuantileGrid(QuantileGrid<T>),
    /// Feature-only forecast: the "CDF" is the raw score `y - mu`.
    #[non_exhaustive]
    PointDistance {
        mu: T,
    },
}

/// Piecewise-linear CDF given by `(p, y)` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid<T> {
    knots: Vec<(T, T)>,
}

impl<T: Real> QuantileGrid<T> {
    /// Knots are `(p, y)` with `p` strictly increasing in [0, 1] and `y`
    /// non-decreasing.
    pub fn new(knots: Vec<(T, T)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::input("quantile grid needs at least 2 knots"));
        }
        for (i, &(p, y)) in knots.iter().enumerate() {
            ensure_probability(p, "quantile grid level")?;
            ensure_finite(y, "quantile grid value")?;
            if i > 0 {
                let (pp, py) = knots[i - 1];
                if p <= pp {
                    return Err(Error::input(format!(
                        "quantile grid levels must be strictly increasing (knot {i})"
                    )));
                }
                if y < py {
                    return Err(Error::input(format!(
                        "quantile grid values must be non-decreasing (knot {i})"
                    )));
                }
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    fn cdf(&self, y: T) -> T {
        let k = &self.knots;
        // last knot with value <= y
        let idx = k.partition_point(|&(_, ky)| ky <= y);
        if idx == 0 {
            return k[0].0;
        }
        if idx == k.len() {
            return k[k.len() - 1].0;
        }
        let (p0, y0) = k[idx - 1];
        let (p1, y1) = k[idx];
        p0 + (p1 - p0) * (y - y0) / (y1 - y0)
    }

    fn quantile(&self, p: T) -> T {
        let k = &self.knots;
        // first knot with level >= p
        let idx = k.partition_point(|&(kp, _)| kp < p);
        if idx == 0 {
            return k[0].1;
        }
        if idx == k.len() {
            return k[k.len() - 1].1;
        }
        let (p0, y0) = k[idx - 1];
        let (p1, y1) = k[idx];
        y0 + (y1 - y0) * (p - p0) / (p1 - p0)
    }

    /// Variance of the distribution sampled by `quantile(U)`, `U ~ U(0,1)`:
    /// uniform mass on every segment plus point masses at the end knots for
    /// the levels outside `[p_first, p_last]`.
    fn variance(&self) -> T {
        let k = &self.knots;
        let (p_first, y_first) = k[0];
        let (p_last, y_last) = k[k.len() - 1];
        let tail = T::one() - p_last;
        let three = T::lit(3.0);

        let mut mean = p_first * y_first + tail * y_last;
        for w in k.windows(2) {
            let ((pa, a), (pb, b)) = (w[0], w[1]);
            mean = mean + (pb - pa) * (a + b) * T::half();
        }
        let mut var = p_first * (y_first - mean).powi(2) + tail * (y_last - mean).powi(2);
        for w in k.windows(2) {
            let ((pa, a), (pb, b)) = (w[0], w[1]);
            let (da, db) = (a - mean, b - mean);
            var = var + (pb - pa) * (da * da + da * db + db * db) / three;
        }
        var.max(T::zero())
    }
}

impl<T: Real> Forecast<T> {
    pub fn gaussian(mu: T, sigma: T) -> Result<Self> {
        ensure_finite(mu, "gaussian mean")?;
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::input(format!("gaussian sigma must be > 0, got {sigma}")));
        }
        Ok(Forecast::Gaussian { mu, sigma })
    }

    pub fn student_t(loc: T, scale: T, dof: T) -> Result<Self> {
        ensure_finite(loc, "student-t location")?;
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(Error::input(format!("student-t scale must be > 0, got {scale}")));
        }
        if !(dof > T::zero() && dof.is_finite()) {
            return Err(Error::input(format!("student-t dof must be > 0, got {dof}")));
        }
        Ok(Forecast::StudentT { loc, scale, dof })
    }

    pub fn quantile_grid(knots: Vec<(T, T)>) -> Result<Self> {
        QuantileGrid::new(knots).map(Forecast::QuantileGrid)
    }

    pub fn point_distance(mu: T) -> Result<Self> {
        ensure_finite(mu, "point estimate")?;
        Ok(Forecast::PointDistance { mu })
    }

    /// Whether this is a probability distribution (everything except the
    /// point-distance feature).
    pub fn is_proper(&self) -> bool {
        !matches!(self, Forecast::PointDistance { .. })
    }

    /// Evaluates the CDF at `y`. For [`Forecast::PointDistance`] this is the
    /// raw score `y - mu`, which is not confined to [0, 1].
    pub fn cdf_eval(&self, y: T) -> Result<T> {
        ensure_finite(y, "outcome")?;
        Ok(match self {
            Forecast::Gaussian { mu, sigma } => special::norm_cdf((y - *mu) / *sigma),
            Forecast::StudentT { loc, scale, dof } => special::student_t_cdf((y - *loc) / *scale, *dof),
            Forecast::QuantileGrid(grid) => grid.cdf(y),
            Forecast::PointDistance { mu } => y - *mu,
        })
    }

    /// Left-continuous quantile. Unbounded families map `p = 0` and `p = 1`
    /// to `loc -/+ 38 scale`.
    pub fn quantile(&self, p: T) -> Result<T> {
        ensure_probability(p, "quantile level")?;
        let sentinel = T::lit(TAIL_SENTINEL_SCALES);
        Ok(match self {
            Forecast::Gaussian { mu, sigma } => {
                if p == T::zero() {
                    *mu - sentinel * *sigma
                } else if p == T::one() {
                    *mu + sentinel * *sigma
                } else {
                    *mu + *sigma * special::norm_quantile(p)
                }
            }
            Forecast::StudentT { loc, scale, dof } => {
                if p == T::zero() {
                    *loc - sentinel * *scale
                } else if p == T::one() {
                    *loc + sentinel * *scale
                } else {
                    *loc + *scale * special::student_t_quantile(p, *dof)
                }
            }
            Forecast::QuantileGrid(grid) => grid.quantile(p),
            Forecast::PointDistance { .. } => {
                return Err(Error::input(
                    "point-distance forecasts are scores, not distributions; quantile is undefined",
                ))
            }
        })
    }

    pub fn variance(&self) -> Result<T> {
        match self {
            Forecast::Gaussian { sigma, .. } => Ok(*sigma * *sigma),
            Forecast::StudentT { scale, dof, .. } => {
                if *dof <= T::two() {
                    Err(Error::UndefinedVariance { rows: vec![0] })
                } else {
                    Ok(*scale * *scale * *dof / (*dof - T::two()))
                }
            }
            Forecast::QuantileGrid(grid) => Ok(grid.variance()),
            Forecast::PointDistance { .. } => Err(Error::input("point-distance forecasts have no variance")),
        }
    }

    /// Location parameter (mean or median) of the family.
    pub fn center(&self) -> T {
        match self {
            Forecast::Gaussian { mu, .. } => *mu,
            Forecast::StudentT { loc, .. } => *loc,
            Forecast::QuantileGrid(grid) => grid.quantile(T::half()),
            Forecast::PointDistance { mu } => *mu,
        }
    }
}

impl<T: Real> Predictive<T> for Forecast<T> {
    fn cdf(&self, y: T) -> Result<T> {
        self.cdf_eval(y)
    }

    fn quantile(&self, p: T) -> Result<T> {
        Forecast::quantile(self, p)
    }

    fn variance(&self) -> Result<T> {
        Forecast::variance(self)
    }
}

/// Rows of `(x, y)` with a shared feature dimension. Features are stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    features: Vec<T>,
    targets: Vec<T>,
    dim: usize,
}

impl<T: Real> Dataset<T> {
    pub fn new(rows: Vec<Vec<T>>, targets: Vec<T>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::input(format!(
                "{} feature rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::input(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            features.extend(row);
        }
        Self::from_flat(features, targets, dim)
    }

    /// Builds from row-major features.
    pub fn from_flat(features: Vec<T>, targets: Vec<T>, dim: usize) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::input("dataset must contain at least one row"));
        }
        if features.len() != targets.len() * dim {
            return Err(Error::input("feature buffer does not match row count and dimension"));
        }
        for (i, x) in features.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::input(format!(
                    "non-finite feature at row {}, column {}",
                    i / dim.max(1),
                    i % dim.max(1)
                )));
            }
        }
        for (i, y) in targets.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::input(format!("non-finite target at row {i}")));
            }
        }
        Ok(Self { features, targets, dim })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> T {
        self.targets[i]
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[T], T)> + '_ {
        (0..self.len()).map(move |i| (self.x(i), self.y(i)))
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::input(format!("row index {i} out of range")));
            }
            features.extend_from_slice(self.x(i));
            targets.push(self.y(i));
        }
        Self::from_flat(features, targets, self.dim)
    }

    /// Appends the rows of `other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::input("cannot concatenate datasets of different dimension"));
        }
        let mut features = self.features.clone();
        features.extend_from_slice(&other.features);
        let mut targets = self.targets.clone();
        targets.extend_from_slice(&other.targets);
        Self::from_flat(features, targets, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_median_and_symmetry() {
        let f = Forecast::gaussian(0.0, 1.0).unwrap();
        assert_eq!(f.cdf_eval(0.0).unwrap(), 0.5);
        let g = Forecast::gaussian(5.0, 2.0).unwrap();
        assert!(f64::abs(g.quantile(0.5).unwrap() - 5.0) < 1e-12);
    }

    #[test]
    fn grid_midpoint_and_knot_lookup() {
        let f = Forecast::quantile_grid(vec![(0.1, -1.0), (0.9, 1.0)]).unwrap();
        assert_eq!(f.cdf_eval(0.0).unwrap(), 0.5);
        assert_eq!(f.quantile(0.1).unwrap(), -1.0);
        // clamped outside the knots
        assert_eq!(f.cdf_eval(-5.0).unwrap(), 0.1);
        assert_eq!(f.cdf_eval(5.0).unwrap(), 0.9);
        assert_eq!(f.quantile(0.0).unwrap(), -1.0);
        assert_eq!(f.quantile(1.0).unwrap(), 1.0);
    }

    #[test]
    fn grid_with_vertical_jump() {
        // point mass of 0.4 at y = 1
        let f = Forecast::quantile_grid(vec![(0.0, 0.0), (0.3, 1.0), (0.7, 1.0), (1.0, 2.0)]).unwrap();
        assert!(f64::abs(f.cdf_eval(1.0).unwrap() - 0.7) < 1e-15);
        assert!(f64::abs(f.cdf_eval(0.999_999).unwrap() - 0.3) < 1e-5);
        assert_eq!(f.quantile(0.5).unwrap(), 1.0);
        assert!(f.cdf_eval(f.quantile(0.5).unwrap()).unwrap() >= 0.5);
    }

    #[test]
    fn sentinel_quantiles() {
        let f = Forecast::gaussian(1.0, 2.0).unwrap();
        assert_eq!(f.quantile(0.0).unwrap(), 1.0 - 76.0);
        assert_eq!(f.quantile(1.0).unwrap(), 1.0 + 76.0);
        assert_eq!(f.cdf_eval(f.quantile(1.0).unwrap()).unwrap(), 1.0);
        let t = Forecast::student_t(0.0, 0.5, 3.0).unwrap();
        assert_eq!(t.quantile(0.0).unwrap(), -19.0);
    }

    #[test]
    fn variances() {
        assert_eq!(Forecast::gaussian(0.0, 2.0).unwrap().variance().unwrap(), 4.0);
        assert_eq!(Forecast::student_t(0.0, 1.0, 4.0).unwrap().variance().unwrap(), 2.0);
        let err = Forecast::student_t(0.0, 1.0, 2.0).unwrap().variance().unwrap_err();
        assert!(matches!(err, Error::UndefinedVariance { .. }));
        let v = Forecast::quantile_grid(vec![(0.0, 0.0), (1.0, 1.0)])
            .unwrap()
            .variance()
            .unwrap();
        assert!(f64::abs(v - 1.0 / 12.0) < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Forecast::gaussian(0.0, 0.0).is_err());
        assert!(Forecast::gaussian(f64::NAN, 1.0).is_err());
        assert!(Forecast::student_t(0.0, 1.0, 0.0).is_err());
        assert!(Forecast::quantile_grid(vec![(0.5, 1.0)]).is_err());
        assert!(Forecast::quantile_grid(vec![(0.5, 1.0), (0.5, 2.0)]).is_err());
        assert!(Forecast::quantile_grid(vec![(0.2, 1.0), (0.5, 0.0)]).is_err());
        assert!(Forecast::quantile_grid(vec![(0.2, 1.0), (1.5, 2.0)]).is_err());
    }

    #[test]
    fn non_finite_outcome_is_input_error() {
        let f = Forecast::gaussian(0.0, 1.0).unwrap();
        assert!(f.cdf_eval(f64::NAN).unwrap_err().is_input());
        assert!(f.quantile(1.5).unwrap_err().is_input());
    }

    #[test]
    fn point_distance_is_a_raw_score() {
        let f = Forecast::point_distance(2.0).unwrap();
        assert_eq!(f.cdf_eval(5.5).unwrap(), 3.5);
        assert!(f.quantile(0.5).is_err());
        assert!(f.variance().is_err());
        assert!(!f.is_proper());
    }

    #[test]
    fn dataset_shape_checks() {
        let d = Dataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.0, 1.0]).unwrap();
        assert_eq!((d.len(), d.dim()), (2, 2));
        assert_eq!(d.x(1), &[3.0, 4.0]);
        assert!(Dataset::new(vec![vec![1.0], vec![3.0, 4.0]], vec![0.0, 1.0]).is_err());
        assert!(Dataset::<f64>::new(vec![], vec![]).is_err());
        let marginal = Dataset::new(vec![vec![], vec![]], vec![1.0, 2.0]).unwrap();
        assert_eq!(marginal.dim(), 0);
        assert_eq!(marginal.x(1), &[] as &[f64]);
    }
}
