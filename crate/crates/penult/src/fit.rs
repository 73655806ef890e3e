//! Pseudo-likelihood estimation of the conditional tail model: the classic
//! `(alpha, beta, mu, sigma)` fit and the extended penultimate fit with the
//! second-order constants `(delta_a, delta_b)` free.
//!
//! The working residual model is Gaussian: exceedances `x_i > u` contribute
//! `y_i = a(x_i) + b(x_i) (mu + sigma eps_i)`, `eps_i ~ N(0,1)`. Optimization
//! runs multi-start Nelder-Mead in an unconstrained reparametrization
//! (`alpha = tanh t1`, `beta = 1 - exp(t2)`, `sigma = exp(t3)`), then a few
//! damped Newton steps sharpen the optimum enough for observed-information
//! standard errors.

use crate::copula::LaplaceSample;
use crate::error::{Error, Result};
use crate::margins;
use crate::special;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Which norming family the fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Ultimate,
    Penultimate,
}

impl FitModel {
    pub fn n_params(&self) -> usize {
        match self {
            FitModel::Ultimate => 4,
            FitModel::Penultimate => 6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FitModel::Ultimate => "ultimate",
            FitModel::Penultimate => "penultimate",
        }
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
    /// Seed for restart jitter; fits are deterministic given it.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { max_iter: 2000, tol: 1e-8, restarts: 5, seed: 0 }
    }
}

/// Fit configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitConfig {
    pub threshold_quantile: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub model: FitModel,
    pub optimizer: OptimizerConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            threshold_quantile: 0.95,
            gamma_a: 1.0,
            gamma_b: 1.0,
            model: FitModel::Ultimate,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if !(self.threshold_quantile > 0.5 && self.threshold_quantile < 1.0) {
            return Err(Error::domain(format!(
                "FitConfig: threshold_quantile = {} outside (0.5, 1)",
                self.threshold_quantile
            )));
        }
        if !(self.gamma_a > 0.0) || !(self.gamma_b >= 0.0) {
            return Err(Error::domain(format!(
                "FitConfig: need gamma_a > 0, gamma_b >= 0 (got {}, {})",
                self.gamma_a, self.gamma_b
            )));
        }
        Ok(())
    }
}

/// Estimation result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub delta_a: Option<f64>,
    pub delta_b: Option<f64>,
    pub loglik: f64,
    pub n_exceed: usize,
    pub threshold: f64,
    pub converged: bool,
    /// Observed-information standard errors in the order
    /// `alpha, beta, mu, sigma[, delta_a, delta_b]`, when the information
    /// matrix is invertible at the optimum.
    pub stderr: Option<Vec<f64>>,
    /// Set when the penultimate scale correction runs with `gamma_b = 0`,
    /// which shifts `beta` by a constant instead of a vanishing term.
    pub degenerate_gamma_b: bool,
}

const MIN_EXCEEDANCES: usize = 50;

/// Fit the conditional tail model to a sample in Laplace margins.
pub fn ht_fit(sample: &LaplaceSample, config: &FitConfig) -> Result<FitResult> {
    ht_fit_pairs(&sample.pairs, config)
}

/// Fit from raw `(x, y)` pairs in Laplace margins.
pub fn ht_fit_pairs(pairs: &[(f64, f64)], config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let u = margins::laplace_quantile(config.threshold_quantile)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        pairs.iter().filter(|&&(x, _)| x > u).map(|&(x, y)| (x, y)).unzip();
    if xs.len() < MIN_EXCEEDANCES {
        return Err(Error::InsufficientData { count: xs.len(), need: MIN_EXCEEDANCES });
    }
    let lik = PseudoLik::new(&xs, &ys, config);

    let mut starts = vec![lik.initial_theta()];
    if config.model == FitModel::Penultimate {
        // warm start from the nested 4-parameter solution with zero corrections
        let cfg_u = FitConfig { model: FitModel::Ultimate, ..*config };
        let lik_u = PseudoLik::new(&xs, &ys, &cfg_u);
        let (mut theta_u, _, _) = optimize(&lik_u, &config.optimizer, vec![lik_u.initial_theta()]);
        theta_u.extend_from_slice(&[0.0, 0.0]);
        starts.insert(0, theta_u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.optimizer.seed);
    let base = lik.initial_theta();
    while starts.len() < config.optimizer.restarts.max(1) {
        let mut start = base.clone();
        for t in start.iter_mut() {
            let jitter: f64 = rng.sample(StandardNormal);
            *t += 0.5 * jitter;
        }
        starts.push(start);
    }
    let (theta, _, converged) = optimize(&lik, &config.optimizer, starts);
    // sharpen in the original parametrization with the exact gradient; the
    // open-domain guards in the likelihood reject any out-of-bounds trial
    let (params, neg_loglik) = newton_polish_exact(&lik, &lik.theta_to_params(&theta));
    let stderr = observed_information_stderr(&lik, &params);

    let (alpha, beta, mu, sigma) = (params[0], params[1], params[2], params[3]);
    Ok(FitResult {
        model: config.model,
        alpha,
        beta,
        mu,
        sigma,
        delta_a: (config.model == FitModel::Penultimate).then(|| params[4]),
        delta_b: (config.model == FitModel::Penultimate).then(|| params[5]),
        loglik: -neg_loglik,
        n_exceed: xs.len(),
        threshold: u,
        converged,
        stderr,
        degenerate_gamma_b: config.model == FitModel::Penultimate && config.gamma_b == 0.0,
    })
}

/// Pseudo-log-likelihood of the working Gaussian residual model.
pub(crate) struct PseudoLik<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    ln_xs: Vec<f64>,
    /// `x^{-gamma_a}` and `x^{-gamma_b}`, hoisted out of the optimizer loop.
    wa: Vec<f64>,
    wb: Vec<f64>,
    model: FitModel,
}

impl<'a> PseudoLik<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64], config: &FitConfig) -> Self {
        PseudoLik {
            xs,
            ys,
            ln_xs: xs.iter().map(|x| x.ln()).collect(),
            wa: xs.iter().map(|x| x.powf(-config.gamma_a)).collect(),
            wb: xs.iter().map(|x| x.powf(-config.gamma_b)).collect(),
            model: config.model,
        }
    }

    /// Original-scale parameters: `[alpha, beta, mu, sigma(, delta_a, delta_b)]`.
    pub(crate) fn loglik_params(&self, p: &[f64]) -> f64 {
        let (alpha, beta, mu, sigma) = (p[0], p[1], p[2], p[3]);
        let (da, db) = if self.model == FitModel::Penultimate { (p[4], p[5]) } else { (0.0, 0.0) };
        if !(sigma > 0.0) || !(-1.0..=1.0).contains(&alpha) || beta >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let ln_sigma = sigma.ln();
        let mut ll = 0.0;
        for i in 0..self.xs.len() {
            let x = self.xs[i];
            let (a, ln_b) = match self.model {
                FitModel::Ultimate => (alpha * x, beta * self.ln_xs[i]),
                FitModel::Penultimate => (
                    (alpha + da * self.wa[i]) * x,
                    (beta + db * self.wb[i]) * self.ln_xs[i],
                ),
            };
            let r = ((self.ys[i] - a) * (-ln_b).exp() - mu) / sigma;
            ll += -ln_b - ln_sigma - special::LN_SQRT_2PI - 0.5 * r * r;
        }
        ll
    }

    /// Unconstrained coordinates: `alpha = tanh(t0)`, `beta = 1 - exp(t1)`
    /// (kept at or below `1 - 1e-6`), `sigma = exp(t3)`.
    fn theta_to_params(&self, t: &[f64]) -> Vec<f64> {
        let mut p = vec![t[0].tanh(), 1.0 - t[1].exp().max(1e-6), t[2], t[3].exp()];
        if self.model == FitModel::Penultimate {
            p.push(t[4]);
            p.push(t[5]);
        }
        p
    }

    fn loglik_theta(&self, t: &[f64]) -> f64 {
        self.loglik_params(&self.theta_to_params(t))
    }

    /// Analytic gradient of [`Self::loglik_params`] (original parameters).
    pub(crate) fn loglik_grad_params(&self, p: &[f64]) -> Vec<f64> {
        let (alpha, beta, mu, sigma) = (p[0], p[1], p[2], p[3]);
        let pen = self.model == FitModel::Penultimate;
        let (da, db) = if pen { (p[4], p[5]) } else { (0.0, 0.0) };
        let k = if pen { 6 } else { 4 };
        let mut g = vec![0.0; k];
        for i in 0..self.xs.len() {
            let x = self.xs[i];
            let lnx = self.ln_xs[i];
            let (a, ln_b) = if pen {
                ((alpha + da * self.wa[i]) * x, (beta + db * self.wb[i]) * lnx)
            } else {
                (alpha * x, beta * lnx)
            };
            let inv_b = (-ln_b).exp();
            let e = (self.ys[i] - a) * inv_b;
            let r = (e - mu) / sigma;
            // d ll / d a = r / (b sigma); d ll / d ln b = r e / sigma - 1
            let dl_da = r * inv_b / sigma;
            let dl_dlnb = r * e / sigma - 1.0;
            g[0] += dl_da * x;
            g[1] += dl_dlnb * lnx;
            g[2] += r / sigma;
            g[3] += (r * r - 1.0) / sigma;
            if pen {
                g[4] += dl_da * x * self.wa[i];
                g[5] += dl_dlnb * lnx * self.wb[i];
            }
        }
        g
    }

    /// Moment-based starting point.
    fn initial_theta(&self) -> Vec<f64> {
        // crude slope through the origin for alpha, mild scale growth for beta
        let sxy: f64 = self.xs.iter().zip(self.ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = self.xs.iter().map(|x| x * x).sum();
        let alpha = (sxy / sxx).clamp(-0.99, 0.99);
        let beta = 0.1f64;
        let resid: Vec<f64> = self
            .xs
            .iter()
            .zip(self.ys)
            .map(|(&x, &y)| (y - alpha * x) / x.powf(beta))
            .collect();
        let mu = crate::stats::mean(&resid);
        let sigma = crate::stats::sample_sd(&resid).max(1e-3);
        let mut t = vec![atanh_clamped(alpha), (1.0 - beta).ln(), mu, sigma.ln()];
        if self.model == FitModel::Penultimate {
            t.push(0.0);
            t.push(0.0);
        }
        t
    }
}

fn atanh_clamped(a: f64) -> f64 {
    let a = a.clamp(-0.999_999, 0.999_999);
    0.5 * ((1.0 + a) / (1.0 - a)).ln()
}

/// Multi-start minimization of the negative pseudo-log-likelihood: for each
/// start, Nelder-Mead twice (the second run re-expands a possibly collapsed
/// simplex); the caller sharpens the winner with the exact-gradient polish.
fn optimize(
    lik: &PseudoLik<'_>,
    opt: &OptimizerConfig,
    starts: Vec<Vec<f64>>,
) -> (Vec<f64>, f64, bool) {
    let f = |t: &[f64]| -lik.loglik_theta(t);
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in starts {
        let (t1, _, c1) = nelder_mead(f, &start, opt.max_iter, opt.tol);
        let (t2, f2, c2) = nelder_mead(f, &t1, opt.max_iter, opt.tol);
        if best.as_ref().is_none_or(|(_, bf, _)| f2 < *bf) {
            best = Some((t2, f2, c1 || c2));
        }
    }
    best.expect("at least one start")
}

/// Standard Nelder-Mead on `f`; returns `(argmin, min, converged)`.
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if p[i].abs() > 1e-3 { 0.1 * p[i].abs() } else { 0.1 };
        let fp = f(&p);
        simplex.push((p, fp));
    }
    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        if (f_worst - f_best).abs() <= tol * (1.0 + f_best.abs()) {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> =
            (0..n).map(|j| centroid[j] + (centroid[j] - worst.0[j])).collect();
        let f_reflect = f(&reflect);
        if f_reflect < simplex[0].1 {
            // try expanding
            let expand: Vec<f64> =
                (0..n).map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j])).collect();
            let f_expand = f(&expand);
            simplex[n] = if f_expand < f_reflect { (expand, f_expand) } else { (reflect, f_reflect) };
        } else if f_reflect < simplex[n - 1].1 {
            simplex[n] = (reflect, f_reflect);
        } else {
            let contract: Vec<f64> =
                (0..n).map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j])).collect();
            let f_contract = f(&contract);
            if f_contract < worst.1 {
                simplex[n] = (contract, f_contract);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (vj, bj) in v.0.iter_mut().zip(&best) {
                        *vj = bj + 0.5 * (*vj - bj);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, fp) = simplex.swap_remove(0);
    (p, fp, converged)
}

/// Damped Newton refinement with the analytic gradient and a Hessian from
/// central differences of that gradient; converges on likelihood ridges where
/// value-based differencing drowns in roundoff.
fn newton_polish_exact(lik: &PseudoLik<'_>, start: &[f64]) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut x = start.to_vec();
    let mut fx = -lik.loglik_params(&x);
    let mut lambda = 0.0f64;
    for _ in 0..80 {
        let g: Vec<f64> = lik.loglik_grad_params(&x).iter().map(|v| -v).collect();
        if g.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-8 {
            break;
        }
        let h = hessian_from_gradient(lik, &x);
        let curb = (0..n).map(|i| h[i * n + i].abs()).sum::<f64>() / n as f64;
        let mut improved = false;
        let mut lam = lambda;
        for _ in 0..16 {
            let mut hd = h.clone();
            for i in 0..n {
                hd[i * n + i] += lam;
            }
            if let Some(d) = solve_symmetric(&hd, &g, n) {
                let mut scale = 1.0;
                for _ in 0..10 {
                    let cand: Vec<f64> =
                        x.iter().zip(&d).map(|(xi, di)| xi - scale * di).collect();
                    let fc = -lik.loglik_params(&cand);
                    if fc < fx {
                        x = cand;
                        fx = fc;
                        improved = true;
                        break;
                    }
                    scale *= 0.5;
                }
            }
            if improved {
                lambda = lam / 10.0;
                break;
            }
            lam = if lam == 0.0 { 1e-8 * curb.max(1e-8) } else { lam * 10.0 };
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Hessian of the NEGATIVE log-likelihood by central differences of the
/// analytic gradient, symmetrized.
fn hessian_from_gradient(lik: &PseudoLik<'_>, p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut h = vec![0.0; n * n];
    let mut xp = p.to_vec();
    for i in 0..n {
        let step = 1e-6 * (1.0 + p[i].abs());
        xp[i] = p[i] + step;
        let gp = lik.loglik_grad_params(&xp);
        xp[i] = p[i] - step;
        let gm = lik.loglik_grad_params(&xp);
        xp[i] = p[i];
        for j in 0..n {
            h[i * n + j] = -(gp[j] - gm[j]) / (2.0 * step);
        }
    }
    // symmetrize
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (h[i * n + j] + h[j * n + i]);
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    h
}

#[cfg(test)]
fn fd_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-5 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Gauss-Jordan solve of `A d = g` for small symmetric systems; `None` when
/// the pivot collapses.
fn solve_symmetric(a: &[f64], g: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = vec![0.0; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            m[i * (n + 1) + j] = a[i * n + j];
        }
        m[i * (n + 1) + n] = g[i];
    }
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r * (n + 1) + col].abs() > m[piv * (n + 1) + col].abs() {
                piv = r;
            }
        }
        if m[piv * (n + 1) + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for j in 0..=n {
                m.swap(col * (n + 1) + j, piv * (n + 1) + j);
            }
        }
        let p = m[col * (n + 1) + col];
        for j in col..=n {
            m[col * (n + 1) + j] /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = m[r * (n + 1) + col];
                for j in col..=n {
                    m[r * (n + 1) + j] -= factor * m[col * (n + 1) + j];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i * (n + 1) + n]).collect())
}

/// Inverse of the full matrix (via repeated solves); for the observed information.
fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve_symmetric(a, &e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Some(inv)
}

/// Standard errors from the observed information (negative Hessian of the
/// log-likelihood at the optimum, original parametrization).
fn observed_information_stderr(lik: &PseudoLik<'_>, params: &[f64]) -> Option<Vec<f64>> {
    let n = params.len();
    let h = hessian_from_gradient(lik, params);
    let inv = invert(&h, n)?;
    let mut se = Vec::with_capacity(n);
    for i in 0..n {
        let v = inv[i * n + i];
        if !(v > 0.0) {
            return None;
        }
        se.push(v.sqrt());
    }
    Some(se)
}

/// AIC comparison of an ultimate and a penultimate fit on the same data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelComparison {
    pub delta_loglik: f64,
    pub aic_ultimate: f64,
    pub aic_penultimate: f64,
    pub preferred: FitModel,
}

pub fn model_compare(fit_u: &FitResult, fit_p: &FitResult) -> Result<ModelComparison> {
    if fit_u.n_exceed != fit_p.n_exceed {
        return Err(Error::domain(format!(
            "model_compare: fits use different exceedance sets ({} vs {})",
            fit_u.n_exceed, fit_p.n_exceed
        )));
    }
    let aic_u = 2.0 * fit_u.model.n_params() as f64 - 2.0 * fit_u.loglik;
    let aic_p = 2.0 * fit_p.model.n_params() as f64 - 2.0 * fit_p.loglik;
    Ok(ModelComparison {
        delta_loglik: fit_p.loglik - fit_u.loglik,
        aic_ultimate: aic_u,
        aic_penultimate: aic_p,
        preferred: if aic_p < aic_u { FitModel::Penultimate } else { FitModel::Ultimate },
    })
}

/// Fitted residuals `z_i = (y_i - a(x_i)) / b(x_i)` over the exceedances:
/// the atoms of the nonparametric residual-law estimate.
pub fn residual_extract(
    pairs: &[(f64, f64)],
    fit: &FitResult,
    config: &FitConfig,
) -> Result<Vec<f64>> {
    if !fit.converged {
        return Err(Error::Fit("residual_extract: fit did not converge".to_string()));
    }
    let u = margins::laplace_quantile(config.threshold_quantile)?;
    let (da, db) = (fit.delta_a.unwrap_or(0.0), fit.delta_b.unwrap_or(0.0));
    let mut out = Vec::new();
    for &(x, y) in pairs.iter().filter(|&&(x, _)| x > u) {
        let (a, ln_b) = match fit.model {
            FitModel::Ultimate => (fit.alpha * x, fit.beta * x.ln()),
            FitModel::Penultimate => (
                (fit.alpha + da / x.powf(config.gamma_a)) * x,
                (fit.beta + db / x.powf(config.gamma_b)) * x.ln(),
            ),
        };
        out.push((y - a) * (-ln_b).exp());
    }
    if out.is_empty() {
        return Err(Error::InsufficientData { count: 0, need: 1 });
    }
    Ok(out)
}

/// Synthetic draws from the exact working model `y = alpha x + x^beta (mu + sigma eps)`
/// with `x` an exceedance of `u` (unit-exponential overshoot on the Laplace
/// upper tail). Used by the recovery studies.
pub fn working_model_sample(
    alpha: f64,
    beta: f64,
    mu: f64,
    sigma: f64,
    u: f64,
    n_exceed: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_exceed);
    for _ in 0..n_exceed {
        let e: f64 = rng.sample(rand_distr::Exp1);
        let x = u + e;
        let eps: f64 = rng.sample(StandardNormal);
        pairs.push((x, alpha * x + x.powf(beta) * (mu + sigma * eps)));
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_config(model: FitModel) -> FitConfig {
        FitConfig { model, ..FitConfig::default() }
    }

    #[test]
    fn recovers_working_model() {
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 4000, 42);
        let fit = ht_fit_pairs(&pairs, &exact_config(FitModel::Ultimate)).unwrap();
        assert!(fit.converged);
        let se = fit.stderr.as_ref().expect("information matrix should invert");
        let truth = [0.4, 0.3, 0.0, 1.0];
        let est = [fit.alpha, fit.beta, fit.mu, fit.sigma];
        for i in 0..4 {
            assert!(
                (est[i] - truth[i]).abs() <= 3.5 * se[i],
                "param {i}: est {} truth {} se {}",
                est[i],
                truth[i],
                se[i]
            );
        }
        assert!(fit.loglik.is_finite());
        assert_eq!(fit.n_exceed, 4000);
    }

    #[test]
    fn penultimate_recovers_zero_deltas() {
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 4000, 7);
        let fit = ht_fit_pairs(&pairs, &exact_config(FitModel::Penultimate)).unwrap();
        let se = fit.stderr.as_ref().expect("stderr");
        assert!(fit.delta_a.unwrap().abs() <= 3.0 * se[4], "delta_a = {:?}", fit.delta_a);
        assert!(fit.delta_b.unwrap().abs() <= 3.0 * se[5], "delta_b = {:?}", fit.delta_b);
        assert!(!fit.degenerate_gamma_b);
    }

    #[test]
    fn likelihood_scale_invariance() {
        // scaling b by c > 0 with sigma -> sigma/c, mu -> mu/c leaves the
        // pseudo-log-likelihood unchanged
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.1, 1.2, u, 500, 3);
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let cfg_u = exact_config(FitModel::Ultimate);
        let lik_u = PseudoLik::new(&xs, &ys, &cfg_u);
        let base = lik_u.loglik_params(&[0.4, 0.3, 0.1, 1.2]);
        // multiply b(x) by c and absorb it into mu -> mu/c, sigma -> sigma/c:
        // the maximized pseudo-log-likelihood value is unchanged
        let c = 3.7f64;
        let mut scaled = 0.0;
        for i in 0..xs.len() {
            let b = xs[i].powf(0.3) * c;
            let r = ((ys[i] - 0.4 * xs[i]) / b - 0.1 / c) / (1.2 / c);
            scaled += -b.ln() - (1.2f64 / c).ln() - special::LN_SQRT_2PI - 0.5 * r * r;
        }
        assert!((scaled - base).abs() < 1e-6 * (1.0 + base.abs()), "{scaled} vs {base}");
    }

    #[test]
    fn deterministic_given_seed() {
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 800, 11);
        let a = ht_fit_pairs(&pairs, &exact_config(FitModel::Ultimate)).unwrap();
        let b = ht_fit_pairs(&pairs, &exact_config(FitModel::Ultimate)).unwrap();
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.loglik, b.loglik);
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 2000, 5);
        let fit = ht_fit_pairs(&pairs, &exact_config(FitModel::Ultimate)).unwrap();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs
            .iter()
            .filter(|&&(x, _)| x > u)
            .copied()
            .unzip();
        let cfg = exact_config(FitModel::Ultimate);
        let lik = PseudoLik::new(&xs, &ys, &cfg);
        let p = [fit.alpha, fit.beta, fit.mu, fit.sigma];
        let g = fd_gradient(&|q: &[f64]| lik.loglik_params(q), &p);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 1e-4 * (1.0 + fit.loglik.abs()), "gradient norm {norm}");
    }

    #[test]
    fn insufficient_data_paths() {
        let pairs = vec![(0.0, 0.0); 100]; // no exceedances above u(0.95)
        match ht_fit_pairs(&pairs, &FitConfig::default()) {
            Err(Error::InsufficientData { .. }) => {}
            other => panic!("expected insufficient data, got {other:?}"),
        }
        // residual_extract on empty exceedance set
        let u = margins::laplace_quantile(0.95).unwrap();
        let good = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 200, 1);
        let fit = ht_fit_pairs(&good, &FitConfig::default()).unwrap();
        match residual_extract(&pairs, &fit, &FitConfig::default()) {
            Err(Error::InsufficientData { .. }) => {}
            other => panic!("expected insufficient data, got {other:?}"),
        }
    }

    #[test]
    fn residuals_standardized_under_exact_model() {
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 4000, 13);
        let cfg = exact_config(FitModel::Ultimate);
        let fit = ht_fit_pairs(&pairs, &cfg).unwrap();
        let z = residual_extract(&pairs, &fit, &cfg).unwrap();
        let band = 3.0 / (z.len() as f64).sqrt();
        assert!((crate::stats::mean(&z) - fit.mu).abs() < band * fit.sigma + 1e-9);
        assert!((crate::stats::sample_sd(&z) / fit.sigma - 1.0).abs() < 3.0 * band);
    }

    #[test]
    fn model_compare_basics() {
        let u = margins::laplace_quantile(0.95).unwrap();
        let pairs = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 1000, 2);
        let fu = ht_fit_pairs(&pairs, &exact_config(FitModel::Ultimate)).unwrap();
        let fp = ht_fit_pairs(&pairs, &exact_config(FitModel::Penultimate)).unwrap();
        let cmp = model_compare(&fu, &fp).unwrap();
        assert!(cmp.delta_loglik >= -1e-6, "nested model cannot lose likelihood");
        // identical fits: ultimate preferred on parameter count
        let cmp2 = model_compare(&fu, &FitResult { model: FitModel::Penultimate, ..fu.clone() }).unwrap();
        assert_eq!(cmp2.preferred, FitModel::Ultimate);
        assert!((cmp2.delta_loglik).abs() < 1e-12);
        // mismatched exceedance counts rejected
        let short = working_model_sample(0.4, 0.3, 0.0, 1.0, u, 900, 2);
        let fs = ht_fit_pairs(&short, &exact_config(FitModel::Penultimate)).unwrap();
        assert!(model_compare(&fu, &fs).is_err());
    }
}
