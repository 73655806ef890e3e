//! Marginal transforms between uniform, standard Gaussian and standard Laplace
//! scales, plus return-period conversion.
//!
//! The Laplace scale is the working scale of the conditional tail model:
//! `Pr(X > x) = exp(-x)/2` for `x >= 0`. Every deep-tail conversion goes
//! through log-survivor forms so levels up to `|x| = 700` are representable.

use crate::error::{Error, Result};
use crate::special;

use std::f64::consts::LN_2;

/// Default number of observations per year for return-period conversion.
pub const DEFAULT_OBS_PER_YEAR: f64 = 365.25;

/// Standard Laplace CDF `F_L(x)`.
pub fn laplace_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("laplace_cdf: non-finite x = {x}")));
    }
    Ok(laplace_cdf_raw(x))
}

#[inline]
pub(crate) fn laplace_cdf_raw(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - 0.5 * (-x).exp()
    } else {
        0.5 * x.exp()
    }
}

/// Standard Laplace survivor `1 - F_L(x)`.
pub fn laplace_sf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("laplace_sf: non-finite x = {x}")));
    }
    Ok(if x >= 0.0 {
        0.5 * (-x).exp()
    } else {
        1.0 - 0.5 * x.exp()
    })
}

/// `log(1 - F_L(x))` for `x >= 0`: the underflow-free survivor form.
pub fn laplace_ln_sf(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!("laplace_ln_sf: need finite x >= 0, got {x}")));
    }
    Ok(-x - LN_2)
}

/// Standard Laplace quantile, exact inverse of [`laplace_cdf`].
///
/// ```
/// let x = penult::margins::laplace_quantile(0.99).unwrap();
/// assert!((x - 50f64.ln()).abs() < 1e-14);
/// ```
pub fn laplace_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("laplace_quantile: p = {p} outside (0,1)")));
    }
    Ok(if p < 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    })
}

/// Gaussian -> Laplace marginal transform (probability integral, tail-stable).
pub fn gauss_to_laplace(v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::domain(format!("gauss_to_laplace: non-finite v = {v}")));
    }
    Ok(gauss_to_laplace_raw(v))
}

#[inline]
pub(crate) fn gauss_to_laplace_raw(v: f64) -> f64 {
    if v > 0.0 {
        // x = -log(2 (1 - Phi(v)))
        -LN_2 - special::norm_ln_sf(v)
    } else {
        // x = log(2 Phi(v)) = log 2 + log(1 - Phi(-v))
        LN_2 + special::norm_ln_sf(-v)
    }
}

/// Laplace -> Gaussian marginal transform, inverse of [`gauss_to_laplace`].
pub fn laplace_to_gauss(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("laplace_to_gauss: non-finite x = {x}")));
    }
    Ok(laplace_to_gauss_raw(x))
}

#[inline]
pub(crate) fn laplace_to_gauss_raw(x: f64) -> f64 {
    if x > 0.0 {
        // 1 - Phi(v) = exp(-x)/2
        special::norm_isf_ln(-x - LN_2)
    } else {
        // Phi(v) = exp(x)/2
        -special::norm_isf_ln(x - LN_2)
    }
}

/// Return period in years of the upper-tail level `x >= 0`.
pub fn return_period_years(x: f64, n_per_year: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "return_period_years: defined for the upper tail only, got x = {x}"
        )));
    }
    if !(n_per_year > 0.0) {
        return Err(Error::domain(format!(
            "return_period_years: n_per_year = {n_per_year} must be positive"
        )));
    }
    // 1 / ((1 - F_L(x)) n_per_year) = exp(x + log 2) / n_per_year
    Ok((x + LN_2 - n_per_year.ln()).exp())
}

/// A return period on the upper Laplace tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnPeriod {
    pub years: f64,
    pub n_per_year: f64,
}

impl ReturnPeriod {
    pub fn new(years: f64, n_per_year: f64) -> Result<Self> {
        if !(years > 0.0) || !(n_per_year > 0.0) {
            return Err(Error::domain(format!(
                "ReturnPeriod: years = {years}, n_per_year = {n_per_year} must be positive"
            )));
        }
        Ok(ReturnPeriod { years, n_per_year })
    }

    /// The return period of level `x >= 0` with `n_per_year` observations per year.
    pub fn of_level(x: f64, n_per_year: f64) -> Result<Self> {
        Ok(ReturnPeriod {
            years: return_period_years(x, n_per_year)?,
            n_per_year,
        })
    }

    /// The Laplace level exceeded once per `years` on average.
    pub fn level(&self) -> f64 {
        (self.years * self.n_per_year / 2.0).ln()
    }

    /// The marginal quantile associated with this return period.
    pub fn quantile(&self) -> f64 {
        1.0 - 1.0 / (self.years * self.n_per_year)
    }
}

// ---------------------------------------------------------------------------
// Exponential-scale coordinates of the Laplace margin.
//
// The closed-form copula conditionals are naturally written in terms of
// t_upper = -log(1 - F_L(z)) and t_lower = -log F_L(z); these helpers keep
// both (and their logs) exact for |z| up to ~700.
// ---------------------------------------------------------------------------

/// `-log(1 - F_L(z))` for any real `z`.
#[inline]
pub(crate) fn exp_upper(z: f64) -> f64 {
    if z >= 0.0 {
        z + LN_2
    } else {
        -(-0.5 * z.exp()).ln_1p()
    }
}

/// `log(-log(1 - F_L(z)))`, stable for very negative `z`.
#[inline]
pub(crate) fn ln_exp_upper(z: f64) -> f64 {
    if z >= 0.0 {
        (z + LN_2).ln()
    } else if z > -30.0 {
        exp_upper(z).ln()
    } else {
        // -log1p(-t) = t (1 + t/2 + t^2/3 + ...) with t = exp(z)/2
        let t = 0.5 * z.exp();
        t.ln() + (0.5 * t + t * t / 3.0).ln_1p()
    }
}

/// `-log F_L(z)` for any real `z`.
#[inline]
pub(crate) fn exp_lower(z: f64) -> f64 {
    if z <= 0.0 {
        LN_2 - z
    } else {
        -(-0.5 * (-z).exp()).ln_1p()
    }
}

/// `log(-log F_L(z))`, stable for very positive `z`.
#[inline]
pub(crate) fn ln_exp_lower(z: f64) -> f64 {
    if z <= 0.0 {
        (LN_2 - z).ln()
    } else if z < 30.0 {
        exp_lower(z).ln()
    } else {
        let t = 0.5 * (-z).exp();
        t.ln() + (0.5 * t + t * t / 3.0).ln_1p()
    }
}

/// Laplace value from `t = -log u`, `u` the uniform coordinate.
#[inline]
pub(crate) fn laplace_from_neg_log_u(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t >= LN_2 {
        // u <= 1/2: x = log(2u)
        LN_2 - t
    } else {
        // x = -log(2(1-u)) with 1-u = -expm1(-t)
        -(LN_2 + special::ln_one_minus_exp_neg(t))
    }
}

/// Laplace value from `t = -log(1 - u)`: the survival-copula companion.
#[inline]
pub(crate) fn laplace_from_neg_log_sf(t: f64) -> f64 {
    -laplace_from_neg_log_u(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_examples() {
        // symmetry point
        assert_eq!(laplace_cdf(0.0).unwrap(), 0.5);
        // derived: invert 1 - e^{-x}/2 = 0.99 analytically -> x = log 50, and
        // confirm by numerical quadrature of the Laplace density below
        let x99 = (50.0f64).ln();
        assert_relative_eq!(laplace_cdf(x99).unwrap(), 0.99, max_relative = 1e-14);
        assert_relative_eq!(laplace_cdf(-x99).unwrap(), 0.01, max_relative = 1e-14);
        assert!(laplace_cdf(f64::NAN).is_err());
        assert!(laplace_cdf(f64::INFINITY).is_err());
    }

    /// Quadrature oracle: Simpson's rule on the Laplace density, split at the
    /// kink so the rule keeps its order.
    fn laplace_cdf_quadrature(x: f64) -> f64 {
        fn simpson(lo: f64, hi: f64) -> f64 {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let dens = |t: f64| 0.5 * (-t.abs()).exp();
            let mut s = dens(lo) + dens(hi);
            for i in 1..n {
                s += dens(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        }
        if x >= 0.0 {
            0.5 + simpson(0.0, x)
        } else {
            simpson(x - 60.0, x)
        }
    }

    #[test]
    fn cdf_matches_quadrature() {
        for &x in &[-3.0, -0.5, 1.0, (50.0f64).ln(), 6.0] {
            let q = laplace_cdf_quadrature(x);
            assert_relative_eq!(laplace_cdf(x).unwrap(), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(laplace_quantile(0.5).unwrap(), 0.0);
        // closed form -log(2(1-p)); cross-checked by bisection on laplace_cdf
        let bisect = |p: f64| {
            let (mut lo, mut hi) = (-800.0, 800.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if laplace_cdf_raw(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        for &(p, expect) in &[(0.99, 3.912023005428146), (0.975, 2.995732273553991)] {
            let q = laplace_quantile(p).unwrap();
            assert_relative_eq!(q, expect, max_relative = 1e-12);
            assert_relative_eq!(q, bisect(p), epsilon = 1e-9);
        }
        assert!(laplace_quantile(0.0).is_err());
        assert!(laplace_quantile(1.0).is_err());
        assert!(laplace_quantile(-0.1).is_err());
    }

    #[test]
    fn quantile_cdf_round_trip() {
        for k in 0..=60 {
            let p = 1e-12 + (1.0 - 2e-12) * k as f64 / 60.0;
            let x = laplace_quantile(p).unwrap();
            assert!((laplace_cdf(x).unwrap() - p).abs() <= 1e-14);
        }
    }

    #[test]
    fn gauss_laplace_round_trip() {
        // medians map to each other
        assert_eq!(gauss_to_laplace(0.0).unwrap(), 0.0);
        assert_eq!(laplace_to_gauss(0.0).unwrap(), 0.0);
        for k in -40..=40 {
            let x = k as f64;
            let v = laplace_to_gauss(x).unwrap();
            let back = gauss_to_laplace(v).unwrap();
            assert!(
                (back - x).abs() <= 1e-10 * x.abs().max(1.0),
                "x = {x}, back = {back}"
            );
        }
        let w = laplace_to_gauss(gauss_to_laplace(3.0).unwrap()).unwrap();
        assert!((w - 3.0).abs() <= 1e-10);
    }

    #[test]
    fn deep_tail_no_overflow() {
        for &x in &[100.0, 400.0, 700.0] {
            let v = laplace_to_gauss(x).unwrap();
            assert!(v.is_finite());
            assert_relative_eq!(gauss_to_laplace(v).unwrap(), x, max_relative = 1e-11);
            assert!(laplace_ln_sf(x).unwrap().is_finite());
        }
    }

    #[test]
    fn second_order_gaussian_expansion() {
        // v ~ sqrt(2x) + (2 log 2 - log(2x) - log(2 pi)) / (2 sqrt(2x));
        // the remainder is O((log x)^2 / x^{3/2})
        for &(x, tol) in &[(20.0, 5e-3), (100.0, 1e-3), (400.0, 2e-4)] {
            let v = laplace_to_gauss(x).unwrap();
            let s = (2.0 * x).sqrt();
            let approx_v = s + (2.0 * LN_2 - (2.0 * x).ln() - (2.0 * std::f64::consts::PI).ln()) / (2.0 * s);
            assert!(
                (v - approx_v).abs() < tol,
                "x = {x}: v = {v}, expansion = {approx_v}"
            );
            // and the remainder shrinks within the stated band
            assert!((v - approx_v).abs() < x.ln().powi(2) / x.powf(1.5));
        }
    }

    #[test]
    fn return_periods() {
        // 1 - F_L = 0.01 at x = log 50
        let x = (50.0f64).ln();
        assert_relative_eq!(
            return_period_years(x, 365.25).unwrap(),
            100.0 / 365.25,
            max_relative = 1e-12
        );
        // solve 1/((1-F_L) * 365.25) = 100 -> x = log(18262.5)
        let x100 = 18262.5f64.ln();
        assert_relative_eq!(return_period_years(x100, 365.25).unwrap(), 100.0, max_relative = 1e-12);
        assert_relative_eq!(x100, 9.812605056058955, max_relative = 1e-12);
        // median level
        assert_relative_eq!(
            return_period_years(0.0, 365.25).unwrap(),
            1.0 / (0.5 * 365.25),
            max_relative = 1e-14
        );
        assert!(return_period_years(-1.0, 365.25).is_err());

        let rp = ReturnPeriod::of_level(x100, 365.25).unwrap();
        assert_relative_eq!(rp.level(), x100, max_relative = 1e-12);
        assert_relative_eq!(rp.quantile(), 1.0 - 1.0 / 36525.0, max_relative = 1e-14);
    }

    #[test]
    fn exponential_coordinates_consistent() {
        for &z in &[-300.0, -5.0, -0.2, 0.0, 0.3, 8.0, 300.0] {
            let t_up = exp_upper(z);
            assert_relative_eq!(ln_exp_upper(z), t_up.ln(), max_relative = 1e-12);
            let t_lo = exp_lower(z);
            assert_relative_eq!(ln_exp_lower(z), t_lo.ln(), max_relative = 1e-12);
            // round trips through the sampler helpers
            assert_relative_eq!(laplace_from_neg_log_u(t_lo), z, max_relative = 1e-10, epsilon = 1e-10);
            assert_relative_eq!(laplace_from_neg_log_sf(t_up), z, max_relative = 1e-10, epsilon = 1e-10);
        }
    }
}
