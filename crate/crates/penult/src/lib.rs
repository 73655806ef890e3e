//! Conditional extremes tail modelling with second-order (penultimate)
//! norming functions.
//!
//! The crate implements, for bivariate Gaussian, inverted-logistic and
//! logistic dependence on standard Laplace margins:
//!
//! - tail-stable marginal transforms and return-period conversion
//!   ([`margins`]);
//! - exact samplers and exact conditional distributions `Y | X = x`
//!   ([`copula`]);
//! - first- and second-order norming functions `a(x)`, `b(x)`, the
//!   parameter curves `alpha_1(u)`, `beta_1(u)`, and the extended parametric
//!   family with constants `delta_a`, `delta_b` ([`normings`]);
//! - the limit residual law `H` and its subasymptotic counterparts `H_x`,
//!   including the finite supports and endpoint masses of the
//!   inverted-logistic case ([`residual`]);
//! - the univariate penultimate shape `xi_n = h'(b_n)` and GEV error
//!   comparisons ([`univariate`]);
//! - Monte Carlo and analytic convergence studies on the return-period
//!   scale ([`diagnostics`]);
//! - pseudo-likelihood estimation of the conditional tail model, classic
//!   and penultimate ([`fit`]).
//!
//! Sampling is deterministic given a seed: Monte Carlo work is split into
//! fixed-size chunks, each on its own counter-derived ChaCha stream, so
//! results do not depend on the number of worker threads.
//!
//! ```
//! use penult::{copula, normings, CopulaSpec};
//!
//! // exact draws of Y | X = x, normalized by the second-order norming
//! let c = CopulaSpec::gaussian(0.5).unwrap();
//! let pen = normings::penultimate_norming(&c);
//! let x = penult::margins::laplace_quantile(0.99).unwrap();
//! let y = copula::cond_quantile(&c, x, 0.5).unwrap();
//! let z = (y - pen.a(x).unwrap()) / pen.b(x).unwrap();
//! assert!(z.abs() < 0.1); // the normalized median sits near zero
//! ```

// `!(x > 0.0)`-style comparisons are deliberate throughout: they reject NaN
// together with the out-of-domain sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod margins;
pub mod normings;
pub mod residual;
pub mod special;
pub mod stats;
pub mod univariate;

pub use copula::{chi_and_chibar, cond_cdf, cond_quantile, sample, CopulaSpec, Family, LaplaceSample};
pub use error::{Error, Result};
pub use fit::{ht_fit, ht_fit_pairs, model_compare, residual_extract, FitConfig, FitModel, FitResult};
pub use normings::{alpha1, beta1, parametric_norming, penultimate_norming, ultimate_norming, NormingOrder, NormingPair};
pub use residual::ResidualLaw;
