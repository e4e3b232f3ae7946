use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ensure_probability, Real};

/// Current version of the serialized map document.
pub const MAP_FORMAT_VERSION: u32 = 1;

/// Monotone non-decreasing map `[0, 1] -> [0, 1]` given by knots `(u, v)`
/// with linear interpolation between them.
///
/// An anchored map passes through `(0, 0)` and `(1, 1)`, which take
/// precedence over knots placed at 0 or 1. An unanchored map holds the
/// first/last knot value constant outside the knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct RecalibrationMap<T> {
    knots: Vec<(T, T)>,
    anchored: bool,
}

impl<T: Real> RecalibrationMap<T> {
    pub fn new(knots: Vec<(T, T)>, anchored: bool) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::input("recalibration map needs at least one knot"));
        }
        for (i, &(u, v)) in knots.iter().enumerate() {
            ensure_probability(u, "map knot u")?;
            ensure_probability(v, "map knot v")?;
            if i > 0 {
                let (pu, pv) = knots[i - 1];
                if u <= pu {
                    return Err(Error::input(format!(
                        "map knot u must be strictly increasing (knot {i})"
                    )));
                }
                if v < pv {
                    return Err(Error::input(format!("map knot v must be non-decreasing (knot {i})")));
                }
            }
        }
        Ok(Self { knots, anchored })
    }

    pub fn identity() -> Self {
        Self {
            knots: vec![(T::zero(), T::zero()), (T::one(), T::one())],
            anchored: true,
        }
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn is_anchored(&self) -> bool {
        self.anchored
    }

    /// Knots strictly inside (0, 1); under anchoring these are the only
    /// knots that shape the map, since the anchors fix `R(0)` and `R(1)`.
    fn interior(&self) -> &[(T, T)] {
        let k = &self.knots;
        let lo = usize::from(k[0].0 <= T::zero());
        let hi = if k[k.len() - 1].0 >= T::one() {
            k.len() - 1
        } else {
            k.len()
        };
        &k[lo.min(hi)..hi]
    }

    /// Number of vertices of the piecewise-linear graph of the map.
    fn vertex_count(&self) -> usize {
        if self.anchored {
            self.interior().len() + 2
        } else {
            self.knots.len()
        }
    }

    /// Vertex `i` of the graph: under anchoring `(0, 0)`, the interior knots,
    /// then `(1, 1)`.
    fn vertex(&self, i: usize) -> (T, T) {
        if !self.anchored {
            return self.knots[i];
        }
        let k = self.interior();
        if i == 0 {
            (T::zero(), T::zero())
        } else if i > k.len() {
            (T::one(), T::one())
        } else {
            k[i - 1]
        }
    }

    /// `R(p)`; exact at knots.
    pub fn apply(&self, p: T) -> Result<T> {
        ensure_probability(p, "map argument")?;
        Ok(self.eval(p))
    }

    pub(crate) fn eval(&self, p: T) -> T {
        let v = if self.anchored {
            if p <= T::zero() {
                return T::zero();
            }
            if p >= T::one() {
                return T::one();
            }
            let k = self.interior();
            let idx = k.partition_point(|&(u, _)| u <= p);
            let (u0, v0) = if idx == 0 { (T::zero(), T::zero()) } else { k[idx - 1] };
            let (u1, v1) = if idx == k.len() { (T::one(), T::one()) } else { k[idx] };
            if p == u0 {
                v0
            } else {
                v0 + (v1 - v0) * (p - u0) / (u1 - u0)
            }
        } else {
            let k = &self.knots;
            let idx = k.partition_point(|&(u, _)| u <= p);
            if idx == 0 {
                k[0].1
            } else if idx == k.len() {
                k[k.len() - 1].1
            } else {
                let (u0, v0) = k[idx - 1];
                if p == u0 {
                    v0
                } else {
                    let (u1, v1) = k[idx];
                    v0 + (v1 - v0) * (p - u0) / (u1 - u0)
                }
            }
        };
        v.max(T::zero()).min(T::one())
    }

    /// Generalized inverse `inf { p : R(p) >= q }`. Flat stretches resolve
    /// to their left end; levels above the map's range return 1.
    pub fn invert(&self, q: T) -> Result<T> {
        ensure_probability(q, "map level")?;
        Ok(self.eval_inverse(q))
    }

    pub(crate) fn eval_inverse(&self, q: T) -> T {
        // first vertex at or above q; vertex values are non-decreasing
        let (mut lo, mut hi) = (0, self.vertex_count());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.vertex(mid).1 >= q {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo == self.vertex_count() {
            return T::one();
        }
        if lo == 0 {
            return T::zero();
        }
        let (u, v) = self.vertex(lo);
        let (pu, pv) = self.vertex(lo - 1);
        if v == pv {
            u
        } else {
            let p = pu + (u - pu) * (q - pv) / (v - pv);
            p.max(pu).min(u)
        }
    }
}

impl<T: Real> Default for RecalibrationMap<T> {
    fn default() -> Self {
        Self::identity()
    }
}

/// Serialized form of a fitted recalibrator: map knots, the boundary
/// convention, and for feature scores the calibration scores defining their
/// rank transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument<T> {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub anchored: bool,
    pub knots: Vec<[T; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_scores: Option<Vec<T>>,
}

impl<T: Real + Serialize + DeserializeOwned> MapDocument<T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::input(format!("bad map document: {e}")))?;
        if doc.format_version != MAP_FORMAT_VERSION {
            return Err(Error::input(format!(
                "unsupported map format version {} (expected {MAP_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    pub fn map(&self) -> Result<RecalibrationMap<T>> {
        RecalibrationMap::new(self.knots.iter().map(|k| (k[0], k[1])).collect(), self.anchored)
    }
}
