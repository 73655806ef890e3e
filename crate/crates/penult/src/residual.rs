//! The limit residual law `H` and the subasymptotic laws `H_x` for each
//! copula: CDF evaluation, support intervals, endpoint mass, and sup-distance
//! between laws.
//!
//! For the inverted logistic with `gamma < 2/3` the subasymptotic law has a
//! finite upper endpoint and carries a strictly positive deficiency
//! `1 - H_x(z_x^H)` there; evaluation beyond a finite endpoint returns the
//! clamped boundary value (with a flag in [`ResidualLaw::cdf_detailed`])
//! rather than an error, because diagnostics compare `H_x` to empirical CDFs
//! whose draws can exceed the first-order endpoint.

use crate::error::{Error, Result};
use crate::special;

use std::f64::consts::LN_2;

/// Where an `H_x` evaluation landed relative to its finite support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamp {
    Interior,
    BelowSupport,
    BeyondEndpoint,
}

/// A residual distribution: a limit `H`, a subasymptotic `H_x`, or an
/// empirical law from exact-conditional draws.
#[derive(Debug, Clone)]
pub enum ResidualLaw {
    GaussianH { rho: f64 },
    GaussianHx1 { rho: f64, x: f64 },
    GaussianHx2 { rho: f64, x: f64 },
    InvLogH { gamma: f64 },
    InvLogHx { gamma: f64, x: f64, refined: bool },
    Empirical { sorted: Vec<f64> },
}

impl ResidualLaw {
    pub fn gaussian_h(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(ResidualLaw::GaussianH { rho })
    }

    pub fn gaussian_hx1(rho: f64, x: f64) -> Result<Self> {
        check_rho(rho)?;
        check_level(x)?;
        Ok(ResidualLaw::GaussianHx1 { rho, x })
    }

    pub fn gaussian_hx2(rho: f64, x: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!(
                "gaussian_hx2: rho = {rho} outside (0,1); the log rho mean term needs rho > 0"
            )));
        }
        check_level(x)?;
        Ok(ResidualLaw::GaussianHx2 { rho, x })
    }

    pub fn invlog_h(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("invlog_h: gamma = {gamma} outside (0,1]")));
        }
        Ok(ResidualLaw::InvLogH { gamma })
    }

    pub fn invlog_hx(gamma: f64, x: f64) -> Result<Self> {
        check_invlog_hx(gamma, x)?;
        Ok(ResidualLaw::InvLogHx { gamma, x, refined: false })
    }

    /// Same law with the higher-order-corrected support endpoints.
    pub fn invlog_hx_refined(gamma: f64, x: f64) -> Result<Self> {
        check_invlog_hx(gamma, x)?;
        Ok(ResidualLaw::InvLogHx { gamma, x, refined: true })
    }

    pub fn empirical(mut draws: Vec<f64>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InsufficientData { count: 0, need: 1 });
        }
        draws.sort_unstable_by(|a, b| a.total_cmp(b));
        Ok(ResidualLaw::Empirical { sorted: draws })
    }

    /// CDF at `z` (clamped to the boundary values outside a finite support).
    pub fn cdf(&self, z: f64) -> f64 {
        self.cdf_detailed(z).0
    }

    /// CDF with the support flag.
    pub fn cdf_detailed(&self, z: f64) -> (f64, Clamp) {
        match *self {
            ResidualLaw::GaussianH { rho } => {
                (special::norm_cdf(z / gaussian_h_sd(rho)), Clamp::Interior)
            }
            ResidualLaw::GaussianHx1 { rho, x } => {
                (special::norm_cdf(z / gaussian_hx1_sd(rho, x)), Clamp::Interior)
            }
            ResidualLaw::GaussianHx2 { rho, x } => {
                let mean = -rho.ln() / (2.0 * rho * rho * x).sqrt();
                let sd = gaussian_hx2_sd(rho, x);
                (special::norm_cdf((z - mean) / sd), Clamp::Interior)
            }
            ResidualLaw::InvLogH { gamma } => {
                if z < 0.0 {
                    (0.0, Clamp::BelowSupport)
                } else {
                    (-(-gamma * z.powf(1.0 / gamma)).exp_m1(), Clamp::Interior)
                }
            }
            ResidualLaw::InvLogHx { gamma, x, refined } => invlog_hx_detailed(gamma, x, refined, z),
            ResidualLaw::Empirical { ref sorted } => {
                let k = sorted.partition_point(|&v| v <= z);
                (k as f64 / sorted.len() as f64, Clamp::Interior)
            }
        }
    }

    /// Support interval (infinite ends allowed).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ResidualLaw::GaussianH { .. }
            | ResidualLaw::GaussianHx1 { .. }
            | ResidualLaw::GaussianHx2 { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ResidualLaw::InvLogH { .. } => (0.0, f64::INFINITY),
            ResidualLaw::InvLogHx { gamma, x, refined } => {
                let (lo, hi) = if refined {
                    invlog_support_refined(gamma, x).expect("validated at construction")
                } else {
                    invlog_support(gamma, x).expect("validated at construction")
                };
                (lo, hi)
            }
            ResidualLaw::Empirical { ref sorted } => (sorted[0], *sorted.last().unwrap()),
        }
    }

    /// Quantile by closed form where available, otherwise monotone bisection.
    /// For laws with endpoint deficiency, probabilities above the attainable
    /// maximum return the upper endpoint.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile: p = {p} outside (0,1)")));
        }
        match *self {
            ResidualLaw::GaussianH { rho } => Ok(gaussian_h_sd(rho) * special::norm_quantile(p)),
            ResidualLaw::GaussianHx1 { rho, x } => {
                Ok(gaussian_hx1_sd(rho, x) * special::norm_quantile(p))
            }
            ResidualLaw::GaussianHx2 { rho, x } => {
                let mean = -rho.ln() / (2.0 * rho * rho * x).sqrt();
                Ok(mean + gaussian_hx2_sd(rho, x) * special::norm_quantile(p))
            }
            ResidualLaw::InvLogH { gamma } => Ok(((-(-p).ln_1p()) / gamma).powf(gamma)),
            ResidualLaw::InvLogHx { gamma, x, refined } => {
                let (lo, hi) = if refined {
                    invlog_support_refined(gamma, x)?
                } else {
                    invlog_support(gamma, x)?
                };
                let hi = if hi.is_finite() { hi } else { 1e6 };
                if self.cdf(hi) <= p {
                    return Ok(hi);
                }
                let (mut lo, mut hi) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
            ResidualLaw::Empirical { ref sorted } => {
                let n = sorted.len();
                let k = ((p * n as f64).ceil() as usize).clamp(1, n);
                Ok(sorted[k - 1])
            }
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > -1.0 && rho < 1.0) || rho == 0.0 {
        return Err(Error::domain(format!(
            "gaussian residual law: rho = {rho} outside (-1,1)\\{{0}} (variance 2 rho^2 (1-rho^2) degenerates at 0)"
        )));
    }
    Ok(())
}

fn check_level(x: f64) -> Result<()> {
    if !(x > 1.0) {
        return Err(Error::domain(format!("residual law: level x = {x} must exceed 1")));
    }
    Ok(())
}

fn check_invlog_hx(gamma: f64, x: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!(
            "invlog_hx: gamma = {gamma} outside (0,1); gamma = 1 is independence and has no H_x correction"
        )));
    }
    // the three-case exponent and its supports only need a positive level
    if !(x > 0.0) {
        return Err(Error::domain(format!("invlog_hx: level x = {x} must be positive")));
    }
    Ok(())
}

#[inline]
fn gaussian_h_sd(rho: f64) -> f64 {
    (2.0 * rho * rho * (1.0 - rho * rho)).sqrt()
}

#[inline]
fn gaussian_hx1_sd(rho: f64, x: f64) -> f64 {
    gaussian_h_sd(rho) * (1.0 + x.ln() / (2.0 * (2.0 * rho * rho * x).sqrt()))
}

#[inline]
fn gaussian_hx2_sd(rho: f64, x: f64) -> f64 {
    gaussian_h_sd(rho) * (1.0 + (x.ln() + 2.0 * rho.ln()) / (2.0 * (2.0 * rho * rho * x).sqrt()))
}

// ---------------------------------------------------------------------------
// Operation surface
// ---------------------------------------------------------------------------

/// Limit law `H` of the Gaussian copula: centred normal, variance
/// `2 rho^2 (1 - rho^2)`.
pub fn gaussian_h(rho: f64, z: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(special::norm_cdf(z / gaussian_h_sd(rho)))
}

/// Subasymptotic Gaussian law with the variance-inflation factor
/// `(1 + log x / (2 sqrt(2 rho^2 x)))^2`.
pub fn gaussian_hx1(rho: f64, x: f64, z: f64) -> Result<f64> {
    Ok(ResidualLaw::gaussian_hx1(rho, x)?.cdf(z))
}

/// Antepenultimate Gaussian law: mean `-log rho / sqrt(2 rho^2 x)` and
/// inflation `(1 + (log x + 2 log rho) / (2 sqrt(2 rho^2 x)))^2`; `rho > 0`.
pub fn gaussian_hx2(rho: f64, x: f64, z: f64) -> Result<f64> {
    Ok(ResidualLaw::gaussian_hx2(rho, x)?.cdf(z))
}

/// Weibull limit law of the inverted logistic: `1 - exp(-gamma z^{1/gamma})`.
pub fn invlog_h(gamma: f64, z: f64) -> Result<f64> {
    Ok(ResidualLaw::invlog_h(gamma)?.cdf(z))
}

/// Subasymptotic inverted-logistic law (three-case exponent), clamped to its
/// finite support.
pub fn invlog_hx(gamma: f64, x: f64, z: f64) -> Result<f64> {
    Ok(ResidualLaw::invlog_hx(gamma, x)?.cdf(z))
}

/// `-log of the survivor` of the inverted-logistic `H_x`, the displayed
/// three-case exponent (no support clamping).
pub fn invlog_hx_exponent(gamma: f64, x: f64, z: f64) -> f64 {
    let g = gamma;
    if g < 2.0 / 3.0 {
        g * z.powf(1.0 / g) + (1.0 - g) * (1.0 - LN_2) / x * z.powf(1.0 / g)
            - g * (1.0 - g) / (2.0 * x) * z.powf(2.0 / g)
    } else if g == 2.0 / 3.0 {
        2.0 / 3.0 * z.powf(1.5) + (1.0 - LN_2) / (3.0 * x) * z.powf(1.5) - z.powi(3) / (9.0 * x)
            - LN_2 * LN_2 / (8.0 * x) * (4.0 - 13.0 * LN_2 / 3.0) * z.powf(-1.5)
    } else {
        g * z.powf(1.0 / g)
            - LN_2 * LN_2 / (6.0 * g * g)
                * (1.0 - g)
                * (6.0 * g + (1.0 - 8.0 * g) * LN_2)
                * x.powf(3.0 * g - 3.0)
                * z.powf(1.0 / g - 3.0)
    }
}

fn invlog_hx_detailed(gamma: f64, x: f64, refined: bool, z: f64) -> (f64, Clamp) {
    let (lo, hi) = if refined {
        invlog_support_refined(gamma, x).expect("validated at construction")
    } else {
        invlog_support(gamma, x).expect("validated at construction")
    };
    if z < lo {
        return (0.0, Clamp::BelowSupport);
    }
    if z > hi {
        let at_end = -(-invlog_hx_exponent(gamma, x, hi)).exp_m1();
        return (at_end, Clamp::BeyondEndpoint);
    }
    (-(-invlog_hx_exponent(gamma, x, z)).exp_m1(), Clamp::Interior)
}

/// Support interval of the inverted-logistic `H_x` (first-order endpoints).
pub fn invlog_support(gamma: f64, x: f64) -> Result<(f64, f64)> {
    check_invlog_hx(gamma, x)?;
    let g = gamma;
    Ok(if g < 2.0 / 3.0 {
        (0.0, (x / (1.0 - g) + (1.0 - LN_2) / g).powf(g))
    } else if g == 2.0 / 3.0 {
        (
            (12.0 - 13.0 * LN_2).powf(1.0 / 3.0) * (LN_2 / 4.0).powf(2.0 / 3.0) * x.powf(-1.0 / 3.0),
            9.0f64.powf(1.0 / 3.0) * x.powf(2.0 / 3.0),
        )
    } else {
        (
            LN_2.powf(2.0 / 3.0) / g
                * ((1.0 - g) / 6.0 * (6.0 * g + (1.0 - 8.0 * g) * LN_2)).powf(1.0 / 3.0)
                * x.powf(g - 1.0),
            f64::INFINITY,
        )
    })
}

/// Support with the `O(x^{-2})` endpoint refinements for `gamma = 2/3`;
/// identical to [`invlog_support`] in the other branches, where the
/// first-order form is already exact or no refinement exists.
pub fn invlog_support_refined(gamma: f64, x: f64) -> Result<(f64, f64)> {
    check_invlog_hx(gamma, x)?;
    if gamma != 2.0 / 3.0 {
        return invlog_support(gamma, x);
    }
    let a = 3.0 * (1.0 - LN_2) / 2.0;
    let c = 3.0 * LN_2 * LN_2 * (12.0 - 13.0 * LN_2) / 16.0;
    let hi = (3.0 * x + a).powf(2.0 / 3.0);
    let w = (c / (3.0 * x + a)).sqrt() + c / (6.0 * x * (6.0 * x + 2.0 * a));
    Ok((w.powf(2.0 / 3.0), hi))
}

/// Asymptotic endpoint deficiency `1 - H_x(z_x^H)`: `exp(-gamma x / (2 - 2 gamma))`
/// for `gamma < 2/3`, `exp(-x)` at `gamma = 2/3`, and `0` for `gamma > 2/3`
/// (the support is unbounded above there).
pub fn invlog_endpoint_mass(gamma: f64, x: f64) -> Result<f64> {
    check_invlog_hx(gamma, x)?;
    Ok(if gamma < 2.0 / 3.0 {
        (-gamma * x / (2.0 - 2.0 * gamma)).exp()
    } else if gamma == 2.0 / 3.0 {
        (-x).exp()
    } else {
        0.0
    })
}

// ---------------------------------------------------------------------------
// Sup distance
// ---------------------------------------------------------------------------

/// Max over `grid` of the absolute CDF difference.
pub fn sup_distance(law_a: &ResidualLaw, law_b: &ResidualLaw, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::domain("sup_distance: empty grid".to_string()));
    }
    Ok(sup_on_grid(|z| law_a.cdf(z), |z| law_b.cdf(z), grid))
}

pub(crate) fn sup_on_grid(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    grid: &[f64],
) -> f64 {
    grid.iter().fold(0.0f64, |acc, &z| acc.max((f(z) - g(z)).abs()))
}

/// Sup distance on an automatically refined grid over the union support
/// truncated to the quantile range `[1e-6, 1 - 1e-6]`; the grid is doubled
/// until the result moves by less than `1e-4`.
pub fn sup_distance_adaptive(law_a: &ResidualLaw, law_b: &ResidualLaw) -> Result<f64> {
    let (lo_a, hi_a) = quantile_range(law_a)?;
    let (lo_b, hi_b) = quantile_range(law_b)?;
    let lo = lo_a.min(lo_b);
    let hi = hi_a.max(hi_b);
    let mut k = 256usize;
    let mut prev = sup_distance(law_a, law_b, &build_grid(lo, hi, k))?;
    while k < (1 << 20) {
        k *= 2;
        let cur = sup_distance(law_a, law_b, &build_grid(lo, hi, k))?;
        if (cur - prev).abs() < 1e-4 {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

fn quantile_range(law: &ResidualLaw) -> Result<(f64, f64)> {
    let (s_lo, s_hi) = law.support();
    let lo = if s_lo.is_finite() { s_lo } else { law.quantile(1e-6)? };
    let hi = if s_hi.is_finite() { s_hi } else { law.quantile(1.0 - 1e-6)? };
    Ok((lo, hi))
}

/// Evaluation grid on `[lo, hi]`: linear in the bulk with geometrically
/// clustered points near both endpoints (finite-support laws vary fastest
/// there).
pub fn build_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let k = k.max(8);
    let span = hi - lo;
    let bulk = (0..=k).map(|i| lo + span * i as f64 / k as f64);
    let edge = (1..=(k / 8).max(4)).flat_map(move |j| {
        let d = span * 0.5f64.powi(j as i32 + 2);
        [lo + d, hi - d]
    });
    let mut grid: Vec<f64> = bulk.chain(edge).collect();
    grid.sort_unstable_by(|a, b| a.total_cmp(b));
    grid.dedup();
    grid
}
