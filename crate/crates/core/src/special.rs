//! Special functions backing the continuous forecast families: the error
//! function pair, log-gamma, the regularized incomplete beta function and the
//! normal / Student-t distribution functions built on them.
//!
//! The erf/erfc rational approximations are the FreeBSD `s_erf.c`
//! coefficients (Sun Microsystems, freely redistributable), with absolute
//! error well below 1e-15 in double precision.

#![allow(clippy::excessive_precision)]

use crate::scalar::Real;

// erf on [0, 0.84375]
const EFX: f64 = 1.28379167095512586316e-01;
const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

// erf on [0.84375, 1.25]
const ERX: f64 = 8.45062911510467529297e-01;
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

// erfc on [1.25, 1/0.35]
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

// erfc on [1/0.35, 28]
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// Horner evaluation of `c[0] + c[1] z + ...`.
fn poly<T: Real>(z: T, coeffs: &[f64]) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * z + T::lit(c))
}

/// `1 + c[0] z + c[1] z^2 + ...`
fn poly1<T: Real>(z: T, coeffs: &[f64]) -> T {
    T::one() + z * poly(z, coeffs)
}

/// erfc(x) for x >= 1.25 via the asymptotic rational form.
fn erfc_tail<T: Real>(x: T) -> T {
    if x >= T::lit(28.0) {
        return T::zero();
    }
    let s = T::one() / (x * x);
    let (r, q) = if x < T::lit(1.0 / 0.35) {
        (poly(s, &RA), poly1(s, &SA))
    } else {
        (poly(s, &RB), poly1(s, &SB))
    };
    (-x * x - T::lit(0.5625) + r / q).exp() / x
}

pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let v = if ax < T::lit(0.84375) {
        if ax < T::lit(3.7252902984619140625e-9) {
            ax + T::lit(EFX) * ax
        } else {
            let z = ax * ax;
            ax + ax * (poly(z, &PP) / poly1(z, &QQ))
        }
    } else if ax < T::lit(1.25) {
        let s = ax - T::one();
        T::lit(ERX) + poly(s, &PA) / poly1(s, &QA)
    } else if ax >= T::lit(6.0) {
        T::one()
    } else {
        T::one() - erfc_tail(ax)
    };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    if ax < T::lit(0.84375) {
        let z = ax * ax;
        let y = x * (poly(z, &PP) / poly1(z, &QQ));
        if x < T::lit(0.25) {
            return T::one() - (x + y);
        }
        return T::half() - ((x - T::half()) + y);
    }
    if ax < T::lit(1.25) {
        let s = ax - T::one();
        let pq = poly(s, &PA) / poly1(s, &QA);
        return if x > T::zero() {
            T::one() - T::lit(ERX) - pq
        } else {
            T::one() + T::lit(ERX) + pq
        };
    }
    let tail = erfc_tail(ax);
    if x > T::zero() {
        tail
    } else {
        T::two() - tail
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::half() {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::half() * (T::two() * T::PI()).ln() + (x + T::half()) * t.ln() - t + acc.ln()
}

pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::lit(1e-300).max(T::min_positive_value());
    let eps = T::epsilon();
    let qab = a + b;
    let qap = a + T::one();
    let qam = a - T::one();
    let mut c = T::one();
    let mut d = T::one() - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = d.recip();
    let mut h = d;
    for m in 1..=10_000usize {
        let m = T::from_count(m);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = T::one() + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = T::one() + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        h = h * d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = T::one() + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = T::one() + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`.
pub fn inc_beta<T: Real>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let ln_front = a * x.ln() + b * (T::one() - x).ln() - ln_beta(a, b);
    if x < (a + T::one()) / (a + b + T::two()) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        T::one() - ln_front.exp() * beta_cf(b, a, T::one() - x) / b
    }
}

/// Standard normal CDF.
pub fn norm_cdf<T: Real>(z: T) -> T {
    T::half() * erfc(-z / T::SQRT_2())
}

pub fn norm_pdf<T: Real>(z: T) -> T {
    (-T::half() * z * z).exp() / (T::two() * T::PI()).sqrt()
}

// Acklam's initial approximation to the normal quantile.
const ACK_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACK_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACK_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACK_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn horner_desc<T: Real>(z: T, coeffs: &[f64]) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * z + T::lit(c))
}

/// Standard normal quantile for `p` in the open interval (0, 1).
///
/// Returns `-inf` / `+inf` at the endpoints.
pub fn norm_quantile<T: Real>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    if p > T::half() {
        return -norm_quantile(T::one() - p);
    }
    let p_low = T::lit(0.02425);
    let mut x = if p < p_low {
        let q = (-T::two() * p.ln()).sqrt();
        horner_desc(q, &ACK_C) / (horner_desc(q, &ACK_D) * q + T::one())
    } else {
        let q = p - T::half();
        let r = q * q;
        horner_desc(r, &ACK_A) * q / (horner_desc(r, &ACK_B) * r + T::one())
    };
    // Halley refinement against the erfc-based CDF
    for _ in 0..2 {
        let e = norm_cdf(x) - p;
        let u = e * (T::two() * T::PI()).sqrt() * (x * x / T::two()).exp();
        if !u.is_finite() {
            break;
        }
        x = x - u / (T::one() + x * u / T::two());
    }
    x
}

/// Student-t CDF with `dof` degrees of freedom (standardized).
pub fn student_t_cdf<T: Real>(t: T, dof: T) -> T {
    if t.is_infinite() {
        return if t > T::zero() { T::one() } else { T::zero() };
    }
    let t2 = t * t;
    let half = T::half();
    if t2 < dof {
        // P(|T| < |t|) = I_{t²/(ν+t²)}(1/2, ν/2)
        let central = inc_beta(half, dof * half, t2 / (dof + t2));
        let v = half * central;
        if t < T::zero() {
            half - v
        } else {
            half + v
        }
    } else {
        let tail = half * inc_beta(dof * half, half, dof / (dof + t2));
        if t < T::zero() {
            tail
        } else {
            T::one() - tail
        }
    }
}

pub fn student_t_pdf<T: Real>(t: T, dof: T) -> T {
    let half = T::half();
    let ln_norm = ln_gamma((dof + T::one()) * half) - ln_gamma(dof * half) - half * (dof * T::PI()).ln();
    (ln_norm - (dof + T::one()) * half * (T::one() + t * t / dof).ln()).exp()
}

/// Student-t quantile for `p` in (0, 1) via bracketed Newton iteration.
pub fn student_t_quantile<T: Real>(p: T, dof: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    if p == T::half() {
        return T::zero();
    }
    if p > T::half() {
        return -student_t_quantile(T::one() - p, dof);
    }
    // lower half: the root is negative
    let mut hi = T::zero();
    let mut lo = norm_quantile(p).min(-T::one());
    while student_t_cdf(lo, dof) > p {
        hi = lo;
        lo = lo * T::two();
        if !lo.is_finite() {
            return lo;
        }
    }
    let mut x = lo;
    for _ in 0..200 {
        let f = student_t_cdf(x, dof) - p;
        if f > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let dens = student_t_pdf(x, dof);
        let mut next = x - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo + hi) * T::half();
        }
        let tol = T::epsilon() * T::lit(4.0) * (T::one() + next.abs());
        if (next - x).abs() <= tol || (hi - lo) <= tol {
            return next;
        }
        x = next;
    }
    x
}
