use crate::error::{Error, Result};
use crate::forecast::{Dataset, Forecast};
use crate::forecasters::{check_dim, Forecaster};
use crate::linalg::{augment, dot, Cholesky, Matrix};
use crate::scalar::{ensure_finite, Real};

/// Normal–Gamma posterior over intercept-augmented weights `w` and noise
/// precision `tau`:
///
/// `w | tau ~ N(mean, (tau * precision)^-1)`, `tau ~ Gamma(shape, rate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesRidgePosterior<T> {
    weight_mean: Vec<T>,
    precision: Matrix<T>,
    factor: Cholesky<T>,
    shape: T,
    rate: T,
    count: usize,
}

impl<T: Real> BayesRidgePosterior<T> {
    /// Spherical prior: zero mean, precision `prior_scale * I` over the
    /// `dim + 1` weights (intercept included).
    pub fn prior(dim: usize, prior_scale: T, a0: T, b0: T) -> Result<Self> {
        for (v, name) in [(prior_scale, "prior_scale"), (a0, "a0"), (b0, "b0")] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::input(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        let mut precision = Matrix::identity(dim + 1);
        for i in 0..=dim {
            precision[(i, i)] = prior_scale;
        }
        Self::from_parts(vec![T::zero(); dim + 1], precision, a0, b0, 0)
    }

    /// Reassembles a posterior from stored parameters, re-validating them.
    pub fn from_parts(weight_mean: Vec<T>, precision: Matrix<T>, shape: T, rate: T, count: usize) -> Result<Self> {
        if precision.rows() != weight_mean.len() || precision.cols() != weight_mean.len() {
            return Err(Error::input("precision matrix does not match weight dimension"));
        }
        for v in weight_mean.iter().chain(precision.as_slice()) {
            ensure_finite(*v, "posterior parameter")?;
        }
        let n = weight_mean.len();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (precision[(i, j)], precision[(j, i)]);
                if (a - b).abs() > T::epsilon() * T::lit(64.0) * (a.abs() + b.abs()) {
                    return Err(Error::input("precision matrix is not symmetric"));
                }
            }
        }
        if !(shape > T::zero() && rate > T::zero()) {
            return Err(Error::input("gamma shape and rate must be positive"));
        }
        let factor = Cholesky::new(&precision)?;
        Ok(Self {
            weight_mean,
            precision,
            factor,
            shape,
            rate,
            count,
        })
    }

    /// Conjugate update with the rows of `data`. An empty update is the
    /// identity, so this can be applied repeatedly.
    pub fn update(&self, data: &Dataset<T>) -> Result<Self> {
        let p = self.weight_mean.len();
        if data.dim() + 1 != p {
            return Err(Error::input(format!(
                "dataset has {} features, posterior expects {}",
                data.dim(),
                p - 1
            )));
        }
        let mut precision = self.precision.clone();
        let mut rhs = self.precision.mul_vec(&self.weight_mean);
        for (x, y) in data.rows() {
            let xt = augment(x);
            for i in 0..p {
                rhs[i] = rhs[i] + xt[i] * y;
                for j in 0..p {
                    precision[(i, j)] = precision[(i, j)] + xt[i] * xt[j];
                }
            }
        }
        let factor = Cholesky::new(&precision)?;
        let mean = factor.solve(&rhs);

        // rate update in the residual form, which avoids cancellation
        let sse: T = data
            .rows()
            .map(|(x, y)| {
                let r = y - dot(&augment(x), &mean);
                r * r
            })
            .sum();
        let shift: Vec<T> = mean.iter().zip(&self.weight_mean).map(|(&a, &b)| a - b).collect();
        let rate = self.rate + T::half() * (sse + self.precision.quad_form(&shift));
        let shape = self.shape + T::half() * T::from_count(data.len());
        if !rate.is_finite() || !mean.iter().all(|m| m.is_finite()) {
            return Err(Error::conditioning("posterior update produced non-finite parameters"));
        }
        Ok(Self {
            weight_mean: mean,
            precision,
            factor,
            shape,
            rate,
            count: self.count + data.len(),
        })
    }

    pub fn weight_mean(&self) -> &[T] {
        &self.weight_mean
    }

    pub fn precision(&self) -> &Matrix<T> {
        &self.precision
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    /// Number of training rows absorbed.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Posterior predictive Student-t at `x`.
    pub fn predict(&self, x: &[T]) -> Result<Forecast<T>> {
        check_dim(self.weight_mean.len() - 1, x)?;
        for v in x {
            ensure_finite(*v, "feature")?;
        }
        let xt = augment(x);
        let loc = dot(&self.weight_mean, &xt);
        let leverage = self.factor.inv_quad_form(&xt);
        let scale = (self.rate / self.shape * (T::one() + leverage)).sqrt();
        Forecast::student_t(loc, scale, T::two() * self.shape)
    }
}

impl<T: Real> Forecaster<T> for BayesRidgePosterior<T> {
    fn dim(&self) -> usize {
        self.weight_mean.len() - 1
    }

    fn forecast(&self, x: &[T]) -> Result<Forecast<T>> {
        self.predict(x)
    }
}

/// Fits the conjugate posterior from the spherical prior
/// `N(0, (tau * prior_scale * I)^-1) x Gamma(a0, b0)`.
pub fn fit_bayes_ridge<T: Real>(data: &Dataset<T>, prior_scale: T, a0: T, b0: T) -> Result<BayesRidgePosterior<T>> {
    BayesRidgePosterior::prior(data.dim(), prior_scale, a0, b0)?.update(data)
}

pub fn predict_bayes_ridge<T: Real>(post: &BayesRidgePosterior<T>, x: &[T]) -> Result<Forecast<T>> {
    post.predict(x)
}
