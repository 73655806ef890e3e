//! Univariate penultimate machinery: reciprocal hazard, the subasymptotic
//! shape `xi_n = h'(b_n)`, and GEV approximation error comparisons.

use crate::error::{Error, Result};
use crate::special;

/// A univariate model with the smoothness needed for hazard differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnivariateModel {
    StdNormal,
    UnitExponential,
}

impl UnivariateModel {
    pub fn name(&self) -> &'static str {
        match self {
            UnivariateModel::StdNormal => "std_normal",
            UnivariateModel::UnitExponential => "unit_exponential",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            UnivariateModel::StdNormal => special::norm_cdf(x),
            UnivariateModel::UnitExponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
        }
    }

    pub fn ln_cdf(&self, x: f64) -> f64 {
        match self {
            UnivariateModel::StdNormal => special::norm_ln_cdf(x),
            UnivariateModel::UnitExponential => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    special::ln_one_minus_exp_neg(x)
                }
            }
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        match self {
            UnivariateModel::StdNormal => special::norm_sf(x),
            UnivariateModel::UnitExponential => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x).exp()
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            UnivariateModel::StdNormal => special::norm_pdf(x),
            UnivariateModel::UnitExponential => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
        }
    }

    /// Upper quantile `F^{-1}(1 - 1/n)`.
    pub fn upper_quantile(&self, n: f64) -> Result<f64> {
        if !(n > 1.0) {
            return Err(Error::range(format!("upper_quantile: n = {n} must exceed 1")));
        }
        Ok(match self {
            UnivariateModel::StdNormal => special::norm_isf_ln(-n.ln()),
            UnivariateModel::UnitExponential => n.ln(),
        })
    }
}

/// Reciprocal hazard `h(x) = (1 - F(x)) / f(x)`.
pub fn reciprocal_hazard(model: &UnivariateModel, x: f64) -> f64 {
    match model {
        // stable deep in the tail: exp(ln sf - ln pdf)
        UnivariateModel::StdNormal => (special::norm_ln_sf(x) - special::norm_ln_pdf(x)).exp(),
        UnivariateModel::UnitExponential => {
            if x < 0.0 {
                x.exp()
            } else {
                1.0
            }
        }
    }
}

/// Penultimate shape `xi_n = h'(b_n)` with `F(b_n) = 1 - 1/n`, by central
/// finite differences of the reciprocal hazard, Richardson-extrapolated once.
pub fn xi_n(model: &UnivariateModel, n: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::domain(format!("xi_n: n = {n} must be at least 2")));
    }
    let bn = model.upper_quantile(n)?;
    let h = (1e-6f64).max(1e-6 * bn.abs());
    let diff = |step: f64| {
        (reciprocal_hazard(model, bn + step) - reciprocal_hazard(model, bn - step)) / (2.0 * step)
    };
    Ok((4.0 * diff(0.5 * h) - diff(h)) / 3.0)
}

/// GEV CDF `G_xi(x) = exp(-(1 + xi x)_+^{-1/xi})`, Gumbel branch for
/// `|xi| < 1e-8` (avoids catastrophic cancellation in the exponent).
pub fn gev_cdf(x: f64, xi: f64) -> f64 {
    if xi.abs() < 1e-8 {
        return (-(-x).exp()).exp();
    }
    let t = 1.0 + xi * x;
    if t <= 0.0 {
        // outside the support: 0 below a lower endpoint (xi > 0),
        // 1 above an upper endpoint (xi < 0)
        return if xi > 0.0 { 0.0 } else { 1.0 };
    }
    (-(-(xi * x).ln_1p() / xi).exp()).exp()
}

/// Von Mises norming constants `(a_n, b_n)` with `b_n` the `1 - 1/n` quantile
/// and `a_n = h(b_n)`.
pub fn norming_constants(model: &UnivariateModel, n: f64) -> Result<(f64, f64)> {
    let bn = model.upper_quantile(n)?;
    Ok((reciprocal_hazard(model, bn), bn))
}

/// `(|F^n(a_n x + b_n) - G_xi(x)|, |F^n(a_n x + b_n) - G_{xi_n}(x)|)` with the
/// model's limit shape `xi` and its penultimate replacement `xi_n`.
pub fn penultimate_gev_error(model: &UnivariateModel, n: f64, x: f64) -> Result<(f64, f64)> {
    if !(n >= 2.0) {
        return Err(Error::domain(format!("penultimate_gev_error: n = {n} must be at least 2")));
    }
    let (an, bn) = norming_constants(model, n)?;
    let fn_val = (n * model.ln_cdf(an * x + bn)).exp();
    // both models here are in the Gumbel domain of attraction
    let xi_limit = 0.0;
    let shape_n = xi_n(model, n)?;
    Ok((
        (fn_val - gev_cdf(x, xi_limit)).abs(),
        (fn_val - gev_cdf(x, shape_n)).abs(),
    ))
}
