//! Calibration curve, calibration error, sharpness and interval coverage.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::Predictive;
use crate::scalar::{ensure_probability, stable_mean, stable_sum, CompensatedSum, Real};

/// Number of levels used when none are given.
pub const DEFAULT_LEVEL_COUNT: usize = 10;

/// `{1/m, 2/m, ..., 1}`.
pub fn uniform_levels<T: Real>(m: usize) -> Result<Vec<T>> {
    if m == 0 {
        return Err(Error::input("need at least one level"));
    }
    Ok((1..=m).map(|j| T::from_count(j) / T::from_count(m)).collect())
}

fn check_levels<T: Real>(levels: &[T]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::input("need at least one level"));
    }
    for (j, &p) in levels.iter().enumerate() {
        ensure_probability(p, "level")?;
        if j > 0 && p <= levels[j - 1] {
            return Err(Error::input("levels must be strictly increasing"));
        }
    }
    Ok(())
}

/// `F_t(y_t)` for every row.
pub fn pit_values<T: Real, P: Predictive<T>>(forecasts: &[P], ys: &[T]) -> Result<Vec<T>> {
    if forecasts.len() != ys.len() {
        return Err(Error::input(format!(
            "{} forecasts for {} outcomes",
            forecasts.len(),
            ys.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::input("no forecasts to evaluate"));
    }
    forecasts.iter().zip(ys).map(|(f, &y)| f.cdf(y)).collect()
}

/// Nominal levels against observed frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCurve<T> {
    pub levels: Vec<T>,
    pub empirical: Vec<T>,
    /// Rows with PIT at or below each level.
    pub counts: Vec<usize>,
    pub sample_count: usize,
}

pub fn calibration_curve_from_pit<T: Real>(pit: &[T], levels: &[T]) -> Result<CalibrationCurve<T>> {
    if pit.is_empty() {
        return Err(Error::input("no PIT values"));
    }
    check_levels(levels)?;
    let mut sorted = pit.to_vec();
    if sorted.iter().any(|v| v.is_nan()) {
        return Err(Error::input("PIT value is NaN"));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let counts: Vec<usize> = levels.iter().map(|&p| sorted.partition_point(|v| *v <= p)).collect();
    let n = T::from_count(pit.len());
    Ok(CalibrationCurve {
        levels: levels.to_vec(),
        empirical: counts.iter().map(|&c| T::from_count(c) / n).collect(),
        counts,
        sample_count: pit.len(),
    })
}

/// Empirical frequency `|{t : F_t(y_t) <= p_j}| / T` at each level.
pub fn calibration_curve<T: Real, P: Predictive<T>>(
    forecasts: &[P],
    ys: &[T],
    levels: &[T],
) -> Result<CalibrationCurve<T>> {
    calibration_curve_from_pit(&pit_values(forecasts, ys)?, levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Uniform,
    /// Proportional to the number of rows at or below each level, scaled to
    /// sum to the number of levels.
    Count,
}

pub fn curve_weights<T: Real>(curve: &CalibrationCurve<T>, mode: WeightMode) -> Result<Vec<T>> {
    let m = curve.levels.len();
    match mode {
        WeightMode::Uniform => Ok(vec![T::one(); m]),
        WeightMode::Count => {
            let total: usize = curve.counts.iter().sum();
            if total == 0 {
                return Err(Error::input(
                    "count weights are undefined: no PIT value is at or below any level",
                ));
            }
            let scale = T::from_count(m) / T::from_count(total);
            Ok(curve.counts.iter().map(|&c| T::from_count(c) * scale).collect())
        }
    }
}

/// `sum_j w_j (p_j - phat_j)^2`.
pub fn calibration_error<T: Real>(curve: &CalibrationCurve<T>, weights: &[T]) -> Result<T> {
    weighted_sq_error(&curve.levels, &curve.empirical, weights)
}

fn weighted_sq_error<T: Real>(levels: &[T], empirical: &[T], weights: &[T]) -> Result<T> {
    if levels.len() != empirical.len() || weights.len() != levels.len() {
        return Err(Error::input("levels, frequencies and weights differ in length"));
    }
    if let Some(j) = weights.iter().position(|w| !(*w >= T::zero() && w.is_finite())) {
        return Err(Error::input(format!("weight {j} must be non-negative and finite")));
    }
    Ok(stable_sum(
        levels
            .iter()
            .zip(empirical)
            .zip(weights)
            .map(|((&p, &ph), &w)| w * (p - ph) * (p - ph)),
    ))
}

/// Mean predictive variance.
pub fn sharpness<T: Real, P: Predictive<T>>(forecasts: &[P]) -> Result<T> {
    if forecasts.is_empty() {
        return Err(Error::input("no forecasts"));
    }
    let mut acc = CompensatedSum::new();
    let mut bad = Vec::new();
    for (i, f) in forecasts.iter().enumerate() {
        match f.variance() {
            Ok(v) if v.is_finite() => acc.add(v),
            Ok(_) | Err(Error::UndefinedVariance { .. }) => bad.push(i),
            Err(e) => return Err(e),
        }
    }
    if !bad.is_empty() {
        return Err(Error::UndefinedVariance { rows: bad });
    }
    Ok(acc.value() / T::from_count(forecasts.len()))
}

/// Fraction of rows with `q_t(p1) <= y_t <= q_t(p2)`.
pub fn interval_coverage<T: Real, P: Predictive<T>>(forecasts: &[P], ys: &[T], p1: T, p2: T) -> Result<T> {
    ensure_probability(p1, "lower level")?;
    ensure_probability(p2, "upper level")?;
    if p1 > p2 {
        return Err(Error::input("lower level exceeds upper level"));
    }
    if forecasts.len() != ys.len() || forecasts.is_empty() {
        return Err(Error::input(
            "forecasts and outcomes must be non-empty and of equal length",
        ));
    }
    let mut hits = 0usize;
    for (f, &y) in forecasts.iter().zip(ys) {
        let lo = f.quantile(p1)?;
        let hi = f.quantile(p2)?;
        if lo <= y && y <= hi {
            hits += 1;
        }
    }
    Ok(T::from_count(hits) / T::from_count(ys.len()))
}

/// Summary of calibration and sharpness on a diagnostic set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport<T> {
    pub levels: Vec<T>,
    pub empirical: Vec<T>,
    pub weights: Vec<T>,
    pub calibration_error: T,
    pub sharpness: T,
    pub sample_count: usize,
}

impl<T: Real> CalibrationReport<T> {
    pub fn build<P: Predictive<T>>(forecasts: &[P], ys: &[T], levels: &[T], mode: WeightMode) -> Result<Self> {
        let curve = calibration_curve(forecasts, ys, levels)?;
        let weights = curve_weights(&curve, mode)?;
        let calibration_error = calibration_error(&curve, &weights)?;
        Ok(Self {
            levels: curve.levels,
            empirical: curve.empirical,
            weights,
            calibration_error,
            sharpness: sharpness(forecasts)?,
            sample_count: curve.sample_count,
        })
    }

    /// Checks the structural invariants, including that the stored error
    /// matches the stored levels, frequencies and weights.
    pub fn validate(&self) -> Result<()> {
        let m = self.levels.len();
        if m == 0 || self.empirical.len() != m || self.weights.len() != m {
            return Err(Error::input("report lists must be non-empty and of equal length"));
        }
        check_levels(&self.levels)?;
        if self.empirical.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::input("empirical frequencies must be non-decreasing"));
        }
        let recomputed = weighted_sq_error(&self.levels, &self.empirical, &self.weights)?;
        if (recomputed - self.calibration_error).abs() > T::lit(1e-12) {
            return Err(Error::input(format!(
                "stored calibration error {} disagrees with recomputed {recomputed}",
                self.calibration_error
            )));
        }
        if self.sharpness < T::zero() || !self.sharpness.is_finite() {
            return Err(Error::input("sharpness must be finite and non-negative"));
        }
        Ok(())
    }

    /// Two-column delimited plot data `(p_j, phat_j)` with a header.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("p,p_hat\n");
        for (p, ph) in self.levels.iter().zip(&self.empirical) {
            let _ = writeln!(out, "{p},{ph}");
        }
        out
    }
}

/// Stable 64-bit fingerprint (FNV-1a) of a numeric sequence, used to detect
/// a diagnostic set that duplicates the calibration set.
pub fn fingerprint<T: Real>(values: &[T]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        let bits = v.to_f64().unwrap_or(f64::NAN).to_bits();
        for b in bits.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Self-contained SVG reliability diagram: the diagonal plus one polyline
/// per labelled curve.
pub fn reliability_svg<T: Real>(curves: &[(&str, &CalibrationReport<T>)]) -> String {
    const SIZE: f64 = 360.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];
    let to_x = |p: f64| PAD + p * SIZE;
    let to_y = |p: f64| PAD + (1.0 - p) * SIZE;
    let total = SIZE + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#,
        to_x(0.0),
        to_y(0.0),
        to_x(1.0),
        to_y(1.0)
    );
    for (i, (label, report)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut points = format!("{},{}", to_x(0.0), to_y(0.0));
        for (p, ph) in report.levels.iter().zip(&report.empirical) {
            let (p, ph) = (p.to_f64().unwrap_or(0.0), ph.to_f64().unwrap_or(0.0));
            let _ = write!(points, " {:.3},{:.3}", to_x(p), to_y(ph));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{label}</text>"#,
            PAD + 8.0,
            PAD + 16.0 + 14.0 * i as f64
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">expected confidence level</text>"#,
        PAD + SIZE / 2.0,
        total - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">observed frequency</text>"#,
        PAD + SIZE / 2.0,
        PAD + SIZE / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Mean of a slice, for callers that need the same compensated reduction.
pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    stable_mean(xs.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::Forecast;

    #[test]
    fn curve_from_pit_counts() {
        let c = calibration_curve_from_pit(&[0.2, 0.6], &[0.5, 1.0]).unwrap();
        assert_eq!(c.empirical, vec![0.5, 1.0]);
        let c = calibration_curve_from_pit(&[0.3, 0.99], &[1.0]).unwrap();
        assert_eq!(c.empirical, vec![1.0]);
    }

    #[test]
    fn error_formula() {
        let c = CalibrationCurve {
            levels: vec![0.5],
            empirical: vec![0.6],
            counts: vec![6],
            sample_count: 10,
        };
        assert!(f64::abs(calibration_error(&c, &[1.0]).unwrap() - 0.01) < 1e-15);
        let perfect = CalibrationCurve {
            levels: vec![0.25, 0.5],
            empirical: vec![0.25, 0.5],
            counts: vec![1, 2],
            sample_count: 4,
        };
        assert_eq!(calibration_error(&perfect, &[1.0, 1.0]).unwrap(), 0.0);
        assert!(calibration_error(&perfect, &[1.0]).is_err());
    }

    #[test]
    fn count_weights_sum_to_level_count() {
        let c = calibration_curve_from_pit(&[0.1, 0.4, 0.45, 0.9], &[0.25, 0.5, 1.0]).unwrap();
        let w = curve_weights(&c, WeightMode::Count).unwrap();
        assert_eq!(c.counts, vec![1, 3, 4]);
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-15);
        assert!((w[0] - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn sharpness_examples() {
        let two: Vec<_> = (0..3).map(|_| Forecast::gaussian(0.0, 2.0).unwrap()).collect();
        assert_eq!(sharpness(&two).unwrap(), 4.0);
        let mixed = vec![
            Forecast::gaussian(0.0, 1.0).unwrap(),
            Forecast::gaussian(5.0, 2.0).unwrap(),
        ];
        assert_eq!(sharpness(&mixed).unwrap(), 2.5);
        let narrow = vec![Forecast::gaussian(0.0, 1e-3).unwrap()];
        assert!(f64::abs(sharpness(&narrow).unwrap() - 1e-6) < 1e-18);
    }

    #[test]
    fn sharpness_lists_offending_rows() {
        let fs = vec![
            Forecast::student_t(0.0, 1.0, 5.0).unwrap(),
            Forecast::student_t(0.0, 1.0, 1.5).unwrap(),
            Forecast::gaussian(0.0, 1.0).unwrap(),
            Forecast::student_t(0.0, 1.0, 2.0).unwrap(),
        ];
        assert_eq!(
            sharpness(&fs).unwrap_err(),
            Error::UndefinedVariance { rows: vec![1, 3] }
        );
    }

    #[test]
    fn coverage_edge_levels() {
        let fs: Vec<_> = (0..4).map(|_| Forecast::gaussian(0.0, 1.0).unwrap()).collect();
        let ys = [-2.0, -0.1, 0.3, 1.7];
        assert_eq!(interval_coverage(&fs, &ys, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(interval_coverage(&fs, &ys, 0.5, 0.5).unwrap(), 0.0);
        assert!(interval_coverage(&fs, &ys, 0.6, 0.5).is_err());
        // median hit counts under the closed interval
        assert_eq!(interval_coverage(&fs, &[0.0, 0.0, 1.0, 1.0], 0.5, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn report_validates_and_renders() {
        let fs: Vec<_> = (0..4).map(|_| Forecast::gaussian(0.0, 1.0).unwrap()).collect();
        let ys = [-2.0, -0.1, 0.3, 1.7];
        let levels = uniform_levels(4).unwrap();
        let r = CalibrationReport::build(&fs, &ys, &levels, WeightMode::Uniform).unwrap();
        r.validate().unwrap();
        assert_eq!(r.sample_count, 4);
        assert!(r.plot_data().starts_with("p,p_hat\n0.25,"));
        let mut broken = r.clone();
        broken.calibration_error += 1e-9;
        assert!(broken.validate().is_err());
        let svg = reliability_svg(&[("before", &r)]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn level_validation() {
        assert!(calibration_curve_from_pit(&[0.5], &[0.5, 0.4]).is_err());
        assert!(calibration_curve_from_pit(&[0.5], &[]).is_err());
        assert!(calibration_curve_from_pit::<f64>(&[], &[0.5]).is_err());
        assert_eq!(uniform_levels::<f64>(10).unwrap()[9], 1.0);
    }

    #[test]
    fn fingerprint_distinguishes_sequences() {
        assert_eq!(fingerprint(&[1.0, 2.0]), fingerprint(&[1.0, 2.0]));
        assert_ne!(fingerprint(&[1.0, 2.0]), fingerprint(&[2.0, 1.0]));
    }
}
