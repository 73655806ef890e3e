//! Standard normal CDF/survivor/quantile machinery, accurate into the deep tail.
//!
//! Everything here is expressed through `libm::erfc` plus an asymptotic
//! log-survivor branch, so survivor probabilities as small as `exp(-745)`
//! (Laplace levels around 700) are handled without underflow. The quantile
//! inverts the log-survivor with safeguarded Newton, which keeps full
//! precision where rational approximations of `Phi^{-1}` degrade.

use std::f64::consts::SQRT_2;

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn norm_pdf(v: f64) -> f64 {
    (-0.5 * v * v - LN_SQRT_2PI).exp()
}

#[inline]
pub fn norm_ln_pdf(v: f64) -> f64 {
    -0.5 * v * v - LN_SQRT_2PI
}

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(v: f64) -> f64 {
    0.5 * libm::erfc(-v / SQRT_2)
}

/// Standard normal survivor function `1 - Phi(v)`.
#[inline]
pub fn norm_sf(v: f64) -> f64 {
    0.5 * libm::erfc(v / SQRT_2)
}

/// `log(1 - Phi(v))`, valid for any `v` (no underflow up to `v ~ 1e7`).
pub fn norm_ln_sf(v: f64) -> f64 {
    if v <= 36.0 {
        // erfc keeps full relative accuracy down to ~1e-300 here
        norm_sf(v).ln()
    } else {
        // Mills-ratio asymptotic series; truncation < 1e-12 relative at v = 36
        let r = 1.0 / (v * v);
        let series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 - 945.0 * r))));
        -0.5 * v * v - v.ln() - LN_SQRT_2PI + series.ln()
    }
}

/// `log(Phi(v))`.
pub fn norm_ln_cdf(v: f64) -> f64 {
    if v < 0.0 {
        norm_ln_sf(-v)
    } else {
        (-norm_sf(v)).ln_1p()
    }
}

/// Hazard rate `phi(v) / (1 - Phi(v))`, stable at any depth.
#[inline]
fn norm_hazard(v: f64) -> f64 {
    (norm_ln_pdf(v) - norm_ln_sf(v)).exp()
}

/// Inverse survivor from log probability: the `v >= 0` with `log(1 - Phi(v)) = ln_p`.
///
/// Requires `ln_p <= log(1/2)`. Safeguarded Newton on the concave `norm_ln_sf`;
/// converges to machine precision for `ln_p` down to about `-745`.
pub fn norm_isf_ln(ln_p: f64) -> f64 {
    const LN_HALF: f64 = -std::f64::consts::LN_2;
    debug_assert!(ln_p <= LN_HALF + 1e-15);
    if ln_p >= LN_HALF {
        return 0.0;
    }
    let t = -ln_p;
    // asymptotic initial guess: v^2/2 + ln v + ln sqrt(2 pi) ~ t
    let mut v = (2.0 * t).sqrt();
    for _ in 0..2 {
        let inner = 2.0 * (t - v.ln() - LN_SQRT_2PI);
        if inner > 0.0 {
            v = inner.sqrt();
        } else {
            v *= 0.5;
        }
    }
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    if !(v > lo && v < hi) {
        v = 1.0;
    }
    for _ in 0..100 {
        let f = norm_ln_sf(v) - ln_p;
        if f > 0.0 {
            lo = v; // sf too large -> v too small
        } else {
            hi = v;
        }
        let step = f / norm_hazard(v); // f' = -hazard
        let mut next = v + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-16 * (1.0 + v.abs()) {
            v = next;
            break;
        }
        v = next;
    }
    v
}

/// Standard normal quantile `Phi^{-1}(p)`, `p` in (0, 1), accurate in both tails.
pub fn norm_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    if p == 0.5 {
        0.0
    } else if p < 0.5 {
        -norm_isf_ln(p.ln())
    } else {
        norm_isf_ln((-p).ln_1p())
    }
}

/// `log(1 + e^t)` without overflow.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `log(1 - e^{-a})` for `a > 0`.
#[inline]
pub(crate) fn ln_one_minus_exp_neg(a: f64) -> f64 {
    debug_assert!(a > 0.0);
    if a > std::f64::consts::LN_2 {
        (-(-a).exp()).ln_1p()
    } else {
        (-(-a).exp_m1()).ln()
    }
}
