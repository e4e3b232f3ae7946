use crate::error::{Error, Result};
use crate::forecast::{Forecast, Predictive};
use crate::recalibration::RecalibrationMap;
use crate::scalar::{stable_sum, Real};

/// Distribution over integer demand `0..=Dmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandPmf<T> {
    probs: Vec<T>,
}

impl<T: Real> DemandPmf<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::input("demand distribution is empty"));
        }
        if probs.iter().any(|p| !(*p >= T::zero() && p.is_finite())) {
            return Err(Error::input("demand probabilities must be finite and non-negative"));
        }
        let total = stable_sum(probs.iter().copied());
        if (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::input(format!("demand probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// All mass on `demand`.
    pub fn point_mass(demand: u32, dmax: u32) -> Result<Self> {
        if demand > dmax {
            return Err(Error::input("point mass beyond the demand cap"));
        }
        let mut probs = vec![T::zero(); dmax as usize + 1];
        probs[demand as usize] = T::one();
        Ok(Self { probs })
    }

    /// Half-integer binning of a predictive CDF `G`:
    /// `P(0) = G(0.5)`, `P(k) = G(k + 0.5) - G(k - 0.5)`,
    /// `P(Dmax) = 1 - G(Dmax - 0.5)`.
    pub fn from_predictive<P: Predictive<T>>(dist: &P, dmax: u32) -> Result<Self> {
        let g = |x: T| -> Result<T> { Ok(dist.cdf(x)?.max(T::zero()).min(T::one())) };
        Self::from_cdf(g, dmax)
    }

    fn from_cdf(g: impl Fn(T) -> Result<T>, dmax: u32) -> Result<Self> {
        if dmax == 0 {
            return Ok(Self { probs: vec![T::one()] });
        }
        let mut edges = Vec::with_capacity(dmax as usize);
        for k in 0..dmax {
            edges.push(g(T::from_u32(k).expect("u32 fits") + T::half())?);
        }
        // enforce monotone edges before differencing
        for i in 1..edges.len() {
            if edges[i] < edges[i - 1] {
                edges[i] = edges[i - 1];
            }
        }
        let mut probs = Vec::with_capacity(dmax as usize + 1);
        probs.push(edges[0]);
        for w in edges.windows(2) {
            probs.push(w[1] - w[0]);
        }
        probs.push(T::one() - edges[edges.len() - 1]);
        let total = stable_sum(probs.iter().copied());
        if !(total > T::zero()) {
            return Err(Error::conditioning("demand distribution has no mass"));
        }
        for p in &mut probs {
            *p = (*p / total).max(T::zero());
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn dmax(&self) -> u32 {
        (self.probs.len() - 1) as u32
    }

    pub fn prob(&self, d: u32) -> T {
        self.probs.get(d as usize).copied().unwrap_or_else(T::zero)
    }

    pub fn mean(&self) -> T {
        stable_sum(self.probs.iter().enumerate().map(|(k, &p)| p * T::from_count(k)))
    }
}

/// Demand distribution induced by `R ∘ F` for a proper forecast `f`.
pub fn demand_pmf<T: Real>(f: &Forecast<T>, m: &RecalibrationMap<T>, dmax: u32) -> Result<DemandPmf<T>> {
    if !f.is_proper() {
        return Err(Error::input("demand distributions need a proper forecast"));
    }
    DemandPmf::from_cdf(
        |x| {
            let p = f.cdf_eval(x)?.max(T::zero()).min(T::one());
            m.apply(p)
        },
        dmax,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narrow_gaussian_is_a_point_mass() {
        let f = Forecast::gaussian(3.0, 1e-3).unwrap();
        let pmf = demand_pmf(&f, &RecalibrationMap::identity(), 6).unwrap();
        assert!(f64::abs(pmf.prob(3) - 1.0) < 1e-12);
        assert!(f64::abs(pmf.mean() - 3.0) < 1e-12);
    }

    #[test]
    fn sums_to_one() {
        for (mu, sigma) in [(-2.0, 0.5), (2.0, 1.0), (40.0, 3.0), (10.0, 30.0)] {
            let f = Forecast::gaussian(mu, sigma).unwrap();
            let pmf = demand_pmf(&f, &RecalibrationMap::identity(), 12).unwrap();
            let s: f64 = pmf.probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_cap_is_degenerate() {
        let f = Forecast::gaussian(2.0, 1.0).unwrap();
        assert_eq!(
            demand_pmf(&f, &RecalibrationMap::identity(), 0).unwrap().probs(),
            &[1.0]
        );
    }

    #[test]
    fn validation() {
        assert!(DemandPmf::new(vec![0.5, 0.4]).is_err());
        assert!(DemandPmf::new(vec![1.5, -0.5]).is_err());
        assert!(DemandPmf::<f64>::point_mass(4, 3).is_err());
        assert!(demand_pmf(
            &Forecast::point_distance(1.0).unwrap(),
            &RecalibrationMap::identity(),
            3
        )
        .is_err());
    }
}
