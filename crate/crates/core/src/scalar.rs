//! Scalar abstraction used by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the numerical core is generic over (`f32` and `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier-compensated accumulator; the result does not depend on the
/// order in which terms arrive beyond the last few ulps.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> Extend<T> for CompensatedSum<T> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum of an iterator.
pub fn stable_sum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

/// Compensated mean; `None` for an empty iterator.
pub fn stable_mean<T: Real, I: IntoIterator<Item = T>>(iter: I) -> Option<T> {
    let mut acc = CompensatedSum::new();
    let mut n = 0usize;
    for x in iter {
        acc.add(x);
        n += 1;
    }
    (n > 0).then(|| acc.value() / T::from_count(n))
}

pub(crate) fn ensure_finite<T: Real>(x: T, what: &str) -> crate::Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(crate::Error::input(format!("{what} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_probability<T: Real>(p: T, what: &str) -> crate::Result<T> {
    if p >= T::zero() && p <= T::one() {
        Ok(p)
    } else {
        Err(crate::Error::input(format!("{what} must lie in [0, 1], got {p}")))
    }
}
