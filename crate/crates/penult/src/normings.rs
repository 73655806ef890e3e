//! Ultimate and penultimate norming functions `a(x)`, `b(x)` for each copula,
//! the second-order parameter curves `alpha_1(u)`, `beta_1(u)`, and the
//! extended parametric family with constants `delta_a`, `delta_b`.
//!
//! Evaluation domain is `x > 1` everywhere: the `beta`-form works through
//! `log b(x) / log x`, and all the asymptotics concern large `x`.

use crate::copula::{CopulaSpec, Family};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormingOrder {
    Ultimate,
    Penultimate,
    Parametric,
}

impl NormingOrder {
    pub fn name(&self) -> &'static str {
        match self {
            NormingOrder::Ultimate => "ultimate",
            NormingOrder::Penultimate => "penultimate",
            NormingOrder::Parametric => "parametric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    /// a = alpha x, b = x^beta.
    PowerLaw { alpha: f64, beta: f64 },
    /// a = sign(rho) rho^2 x + (1-rho^2)/2 log x, b = x^(1/2 - 1/(4x)).
    GaussianPenultimate { rho: f64 },
    /// The rho = 0 variant: b = 1 + rho x^(1/2) (resp. the penultimate
    /// exponent), which degenerates to the constant 1 at either order.
    GaussianUncorrelated,
    /// a = -log 2, b = x^(1-gamma).
    InvLogPenultimate { gamma: f64 },
    /// a = (alpha + delta_a / x^gamma_a) x, log b = (beta + delta_b / x^gamma_b) log x,
    /// defined for x above the threshold.
    Parametric {
        alpha: f64,
        beta: f64,
        delta_a: f64,
        delta_b: f64,
        gamma_a: f64,
        gamma_b: f64,
        threshold: f64,
    },
}

/// A location/scale norming pair with its order tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingPair {
    order: NormingOrder,
    form: Form,
}

impl NormingPair {
    pub fn order(&self) -> NormingOrder {
        self.order
    }

    /// The limiting location coefficient `alpha = lim a(x)/x`.
    pub fn alpha(&self) -> f64 {
        match self.form {
            Form::PowerLaw { alpha, .. } => alpha,
            Form::GaussianPenultimate { rho } => rho.signum() * rho * rho,
            Form::GaussianUncorrelated => 0.0,
            Form::InvLogPenultimate { .. } => 0.0,
            Form::Parametric { alpha, .. } => alpha,
        }
    }

    /// The limiting scale exponent `beta = lim log b(x) / log x`.
    pub fn beta(&self) -> f64 {
        match self.form {
            Form::PowerLaw { beta, .. } => beta,
            Form::GaussianPenultimate { .. } => 0.5,
            Form::GaussianUncorrelated => 0.0,
            Form::InvLogPenultimate { gamma } => 1.0 - gamma,
            Form::Parametric { beta, .. } => beta,
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x <= 1.0 {
            return Err(Error::domain(format!("norming: x = {x} must exceed 1")));
        }
        if let Form::Parametric { threshold, .. } = self.form {
            if x <= threshold {
                return Err(Error::domain(format!(
                    "parametric norming: x = {x} at or below threshold u = {threshold}"
                )));
            }
        }
        Ok(())
    }

    /// Location `a(x)`.
    pub fn a(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self.form {
            Form::PowerLaw { alpha, .. } => alpha * x,
            Form::GaussianPenultimate { rho } => {
                rho.signum() * rho * rho * x + 0.5 * (1.0 - rho * rho) * x.ln()
            }
            Form::GaussianUncorrelated => 0.0,
            Form::InvLogPenultimate { .. } => -LN_2,
            Form::Parametric { alpha, delta_a, gamma_a, .. } => {
                (alpha + delta_a / x.powf(gamma_a)) * x
            }
        })
    }

    /// Scale `b(x) > 0`.
    pub fn b(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self.form {
            Form::PowerLaw { beta, .. } => (beta * x.ln()).exp(),
            Form::GaussianPenultimate { .. } => ((0.5 - 0.25 / x) * x.ln()).exp(),
            // 1 + rho x^(...) with rho = 0: identically one
            Form::GaussianUncorrelated => 1.0,
            Form::InvLogPenultimate { gamma } => ((1.0 - gamma) * x.ln()).exp(),
            Form::Parametric { beta, delta_b, gamma_b, .. } => {
                ((beta + delta_b / x.powf(gamma_b)) * x.ln()).exp()
            }
        })
    }
}

/// First-order (ultimate) norming pair of a copula.
pub fn ultimate_norming(copula: &CopulaSpec) -> NormingPair {
    let form = match copula.family() {
        Family::Gaussian => {
            let rho = copula.param();
            if rho == 0.0 {
                Form::GaussianUncorrelated
            } else {
                Form::PowerLaw { alpha: rho.signum() * rho * rho, beta: 0.5 }
            }
        }
        Family::InvertedLogistic => Form::PowerLaw { alpha: 0.0, beta: 1.0 - copula.param() },
        Family::Logistic => Form::PowerLaw { alpha: 1.0, beta: 0.0 },
    };
    NormingPair { order: NormingOrder::Ultimate, form }
}

/// Second-order (penultimate) norming pair of a copula.
pub fn penultimate_norming(copula: &CopulaSpec) -> NormingPair {
    let form = match copula.family() {
        Family::Gaussian => {
            let rho = copula.param();
            if rho == 0.0 {
                Form::GaussianUncorrelated
            } else {
                Form::GaussianPenultimate { rho }
            }
        }
        Family::InvertedLogistic => Form::InvLogPenultimate { gamma: copula.param() },
        // no penultimate refinement exists for the logistic
        Family::Logistic => Form::PowerLaw { alpha: 1.0, beta: 0.0 },
    };
    NormingPair { order: NormingOrder::Penultimate, form }
}

/// Second-order location coefficient at threshold `u`:
/// `alpha_1 = sign(rho) rho^2 + (1 - rho^2) log u / (2u)`.
///
/// ```
/// let a1 = penult::normings::alpha1(0.5, 50f64.ln()).unwrap();
/// assert!((a1 - 0.3807560018495302).abs() < 1e-12);
/// assert!(a1 > 0.25); // second order sits above the limit coefficient
/// ```
pub fn alpha1(rho: f64, u: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) || rho == 0.0 {
        return Err(Error::domain(format!("alpha1: rho = {rho} outside (-1,1)\\{{0}}")));
    }
    if !(u > 1.0) {
        return Err(Error::domain(format!("alpha1: u = {u} must exceed 1")));
    }
    Ok(rho.signum() * rho * rho + (1.0 - rho * rho) * u.ln() / (2.0 * u))
}

/// Second-order scale exponent at threshold `u`: `beta_1 = 1/2 - 1/(4u)`.
pub fn beta1(u: f64) -> Result<f64> {
    if !(u > 1.0) {
        return Err(Error::domain(format!("beta1: u = {u} must exceed 1")));
    }
    Ok(0.5 - 0.25 / u)
}

/// The extended parametric family with slowly-varying parts frozen to the
/// constants `delta_a`, `delta_b` above threshold `u`.
pub fn parametric_norming(
    alpha: f64,
    beta: f64,
    delta_a: f64,
    delta_b: f64,
    gamma_a: f64,
    gamma_b: f64,
    u: f64,
) -> Result<NormingPair> {
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("parametric_norming: alpha = {alpha} outside [-1,1]")));
    }
    if !(beta < 1.0) {
        return Err(Error::domain(format!("parametric_norming: beta = {beta} must be < 1")));
    }
    if !(gamma_a > 0.0) || !(gamma_b >= 0.0) {
        return Err(Error::domain(format!(
            "parametric_norming: need gamma_a > 0 (got {gamma_a}) and gamma_b >= 0 (got {gamma_b})"
        )));
    }
    if !(u > 1.0) {
        return Err(Error::domain(format!("parametric_norming: u = {u} must exceed 1")));
    }
    Ok(NormingPair {
        order: NormingOrder::Parametric,
        form: Form::Parametric { alpha, beta, delta_a, delta_b, gamma_a, gamma_b, threshold: u },
    })
}
