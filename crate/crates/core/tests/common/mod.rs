//! Independent reference computations used to check the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn std_normal_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF by composite Simpson integration of the density.
pub fn phi_quad(z: f64) -> f64 {
    let a = z.abs();
    let n = 2 * ((a * 4000.0).ceil() as usize).max(2);
    let h = a / n as f64;
    let mut s = std_normal_density(0.0) + std_normal_density(a);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * std_normal_density(i as f64 * h);
    }
    let half_mass = s * h / 3.0;
    if z >= 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

/// Standard normal CDF from the positive-term series
/// `erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`.
pub fn phi_series(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    if x == 0.0 {
        return 0.5;
    }
    if x > 9.0 {
        return if z > 0.0 { 1.0 } else { 0.0 };
    }
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x * x / (2.0 * n + 1.0);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    let erf = 2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum;
    if z >= 0.0 {
        0.5 + 0.5 * erf
    } else {
        0.5 - 0.5 * erf
    }
}

/// Inverse of [`phi_series`] by bisection.
pub fn phi_inv(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_series(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Population calibration error of N(0, s^2) forecasts for N(0, 1) data:
/// the empirical level at `p` is `Phi(s * Phi^-1(p))`.
pub fn scaled_normal_calibration_error(s: f64, levels: &[f64]) -> f64 {
    levels
        .iter()
        .map(|&p| {
            let ph = if p >= 1.0 { 1.0 } else { phi_series(s * phi_inv(p)) };
            (p - ph).powi(2)
        })
        .sum()
}

fn sq_loss(values: &[f64], weights: &[f64], fit: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .zip(fit)
        .map(|((v, w), f)| w * (v - f).powi(2))
        .sum()
}

/// Monotone weighted least squares by enumerating every partition into
/// contiguous blocks and keeping the best one whose block means ascend.
pub fn brute_isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fit = Vec::with_capacity(n);
        let mut means = Vec::new();
        let mut start = 0;
        for end in 1..=n {
            if end == n || mask & (1 << (end - 1)) != 0 {
                let w: f64 = weights[start..end].iter().sum();
                let m: f64 = values[start..end]
                    .iter()
                    .zip(&weights[start..end])
                    .map(|(v, w)| v * w)
                    .sum::<f64>()
                    / w;
                means.push(m);
                fit.extend(std::iter::repeat_n(m, end - start));
                start = end;
            }
        }
        if means.windows(2).any(|w| w[1] < w[0]) {
            continue;
        }
        let loss = sq_loss(values, weights, &fit);
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, fit));
        }
    }
    best.expect("the single-block partition is always monotone").1
}

/// Posterior predictive CDF of conjugate Bayesian linear regression with one
/// feature plus intercept, prior `w | tau ~ N(0, (prior_scale tau)^-1 I)`,
/// `tau ~ Gamma(a0, b0)`. The weights are integrated analytically given
/// `tau`; `tau` is integrated numerically on a log grid.
pub fn normal_gamma_predictive_cdf(
    xs: &[f64],
    ys: &[f64],
    prior_scale: f64,
    a0: f64,
    b0: f64,
    x_new: f64,
    y_new: f64,
) -> f64 {
    // Lambda_n = prior_scale I + X^T X for rows (1, x)
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let (l00, l01, l11) = (prior_scale + n, sx, prior_scale + sxx);
    let det = l00 * l11 - l01 * l01;
    let (i00, i01, i11) = (l11 / det, -l01 / det, l00 / det);
    let m0 = i00 * sy + i01 * sxy;
    let m1 = i01 * sy + i11 * sxy;
    let an = a0 + n / 2.0;
    // b_n = b0 + (y'y - m' Lambda_n m) / 2 with a zero prior mean
    let quad = m0 * (l00 * m0 + l01 * m1) + m1 * (l01 * m0 + l11 * m1);
    let bn = b0 + 0.5 * (syy - quad);
    let loc = m0 + m1 * x_new;
    let c = 1.0 + i00 + 2.0 * i01 * x_new + i11 * x_new * x_new;

    let center = (an / bn).ln();
    let nodes = 6000;
    let (lo, hi) = (center - 20.0, center + 8.0);
    let h = (hi - lo) / nodes as f64;
    let log_peak = an * center - bn * center.exp();
    let (mut mass, mut acc) = (0.0, 0.0);
    for i in 0..=nodes {
        let s = lo + i as f64 * h;
        let tau = s.exp();
        let w = (an * s - bn * tau - log_peak).exp() * if i == 0 || i == nodes { 0.5 } else { 1.0 };
        mass += w;
        acc += w * phi_series((y_new - loc) * (tau / c).sqrt());
    }
    acc / mass
}

/// Item-level FIFO day: returns (remaining item lives, sold, spoiled).
pub fn item_step(items: &[u32], demand: u32, arriving: u32, shelf_life: u32) -> (Vec<u32>, u32, u32) {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let sold = (demand as usize).min(sorted.len());
    let rest = &sorted[sold..];
    let spoiled = rest.iter().filter(|&&l| l <= 1).count() as u32;
    let mut next: Vec<u32> = rest.iter().filter(|&&l| l > 1).map(|l| l - 1).collect();
    next.extend(std::iter::repeat_n(shelf_life, arriving as usize));
    (next, sold as u32, spoiled)
}

/// Small planning instance for the enumeration oracle.
#[derive(Debug, Clone)]
pub struct TinyMdp {
    pub price: f64,
    pub cost: f64,
    pub pack: u32,
    pub order_days: Vec<bool>,
    pub lead: u32,
    pub shelf_life: u32,
    pub max_packs: u32,
    pub pmfs: Vec<Vec<f64>>,
}

/// Best expected profit over all (history-dependent) policies, by full
/// expectimax over the decision tree.
pub fn enumerate_best_value(m: &TinyMdp, items: &[u32], pipeline: &[u32], day: usize) -> f64 {
    if day == m.pmfs.len() {
        return 0.0;
    }
    let max = if m.order_days[day] { m.max_packs } else { 0 };
    let mut best = f64::NEG_INFINITY;
    for packs in 0..=max {
        let ordered = packs * m.pack;
        let mut pipe = pipeline.to_vec();
        pipe.push(ordered);
        let arriving = pipe.remove(0);
        let mut value = -(ordered as f64) * m.cost;
        for (d, &p) in m.pmfs[day].iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (next, sold, _) = item_step(items, d as u32, arriving, m.shelf_life);
            value += p * (sold as f64 * m.price + enumerate_best_value(m, &next, &pipe, day + 1));
        }
        best = best.max(value);
    }
    best
}

/// Random probability vector of the given length with some exact zeros.
pub fn random_pmf(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|_| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        return v;
    }
    raw.iter().map(|p| p / total).collect()
}
