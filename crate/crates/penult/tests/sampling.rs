//! Monte Carlo validation of the samplers against closed forms: marginal
//! laws, joint laws, dependence measures, exchangeability, and consistency
//! between the exact-conditional quantile oracle and the conditional CDFs.

use penult::copula::{self, CopulaSpec};
use penult::margins;
use penult::stats;

fn laplace_cdf(x: f64) -> f64 {
    margins::laplace_cdf(x).unwrap()
}

#[test]
fn marginals_are_laplace() {
    // KS distance below the 1% critical value at n = 1e5 for each family
    let n = 100_000;
    for (i, c) in [
        CopulaSpec::gaussian(0.5).unwrap(),
        CopulaSpec::inverted_logistic(1.0 / 3.0).unwrap(),
        CopulaSpec::logistic(0.5).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let s = copula::sample(c, n, 1000 + i as u64).unwrap();
        let xs: Vec<f64> = s.pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = s.pairs.iter().map(|p| p.1).collect();
        let crit = stats::ks_critical(n, 0.01);
        let dx = stats::ks_statistic(&xs, laplace_cdf).unwrap();
        let dy = stats::ks_statistic(&ys, laplace_cdf).unwrap();
        assert!(dx < crit, "{c:?}: x-margin KS {dx} >= {crit}");
        assert!(dy < crit, "{c:?}: y-margin KS {dy} >= {crit}");
    }
}

#[test]
fn gaussian_sample_correlation() {
    // empirical Pearson correlation of the Gaussian-scale pairs within the
    // three-sigma Fisher band around rho
    let n = 1_000_000;
    let rho = 0.5;
    let c = CopulaSpec::gaussian(rho).unwrap();
    let s = copula::sample(&c, n, 2).unwrap();
    let vs: Vec<f64> = s.pairs.iter().map(|p| margins::laplace_to_gauss(p.0).unwrap()).collect();
    let ws: Vec<f64> = s.pairs.iter().map(|p| margins::laplace_to_gauss(p.1).unwrap()).collect();
    let r = stats::pearson(&vs, &ws).unwrap();
    assert!((r - rho).abs() < 0.003, "correlation {r}");
}

#[test]
fn inverted_logistic_gamma_one_is_independence() {
    let n = 200_000;
    let c = CopulaSpec::inverted_logistic(1.0).unwrap();
    let s = copula::sample(&c, n, 3).unwrap();
    let xs: Vec<f64> = s.pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = s.pairs.iter().map(|p| p.1).collect();
    let r = stats::pearson(&xs, &ys).unwrap();
    assert!(r.abs() < 3.0 / (n as f64).sqrt(), "correlation {r} under independence");
}

#[test]
fn invlog_joint_survival_consistency() {
    // Monte Carlo joint exceedance probabilities match the closed-form
    // survivor within three binomial standard errors at (x, y) in {1, 2}^2
    let n = 400_000;
    let gamma = 0.5;
    let c = CopulaSpec::inverted_logistic(gamma).unwrap();
    let s = copula::sample(&c, n, 4).unwrap();
    for &x in &[1.0, 2.0] {
        for &y in &[1.0, 2.0] {
            let p = copula::invlog_joint_sf(gamma, x, y).unwrap();
            let hits = s.pairs.iter().filter(|&&(a, b)| a > x && b > y).count();
            let emp = hits as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (emp - p).abs() <= 3.0 * se,
                "(x,y)=({x},{y}): emp {emp} vs closed {p} (se {se})"
            );
        }
    }
}

#[test]
fn logistic_joint_cdf_consistency() {
    let n = 400_000;
    let gamma = 0.5;
    let c = CopulaSpec::logistic(gamma).unwrap();
    let s = copula::sample(&c, n, 5).unwrap();
    for &x in &[0.5, 1.5] {
        for &y in &[0.5, 2.0] {
            let p = copula::logistic_joint_cdf(gamma, x, y).unwrap();
            let hits = s.pairs.iter().filter(|&&(a, b)| a <= x && b <= y).count();
            let emp = hits as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (emp - p).abs() <= 3.0 * se,
                "(x,y)=({x},{y}): emp {emp} vs closed {p} (se {se})"
            );
        }
    }
}

#[test]
fn exchangeability_of_max_stable_families() {
    // the logistic and inverted-logistic copulas are symmetric in (x, y):
    // Y-values conditioned on X in a slab match X-values conditioned on Y
    // in the same slab (two-sample KS at the 1% level)
    for (k, c) in [
        CopulaSpec::logistic(0.5).unwrap(),
        CopulaSpec::inverted_logistic(0.5).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let s = copula::sample(c, 1_000_000, 6 + k as u64).unwrap();
        let (lo, hi) = (2.0, 2.2);
        let via_x: Vec<f64> =
            s.pairs.iter().filter(|p| p.0 >= lo && p.0 < hi).map(|p| p.1).collect();
        let via_y: Vec<f64> =
            s.pairs.iter().filter(|p| p.1 >= lo && p.1 < hi).map(|p| p.0).collect();
        let d = stats::ks_two_sample(&via_x, &via_y).unwrap();
        let crit = stats::ks_two_sample_critical(via_x.len(), via_y.len(), 0.01);
        assert!(d < crit, "{c:?}: two-sample KS {d} >= {crit}");
    }
}

#[test]
fn conditional_draws_match_cond_cdf() {
    // empirical CDF of exact-conditional draws matches cond_cdf at the 1%
    // KS level for every family and x in {2, 4, 6}; the sup runs over the
    // y >= 0 region where the public conditional CDFs are defined
    use penult::diagnostics::exact_conditional_draws;
    let n = 100_000;
    for c in [
        CopulaSpec::gaussian(0.5).unwrap(),
        CopulaSpec::inverted_logistic(1.0 / 3.0).unwrap(),
        CopulaSpec::logistic(0.5).unwrap(),
    ] {
        for &x in &[2.0, 4.0, 6.0] {
            let mut draws = exact_conditional_draws(&c, x, n, 17, 1).unwrap();
            draws.sort_unstable_by(|a, b| a.total_cmp(b));
            let mut d = 0.0f64;
            for (i, &y) in draws.iter().enumerate() {
                if y < 0.0 {
                    continue;
                }
                let f = copula::cond_cdf(&c, x, y).unwrap();
                d = d.max(((i + 1) as f64 / n as f64 - f).abs());
                d = d.max((f - i as f64 / n as f64).abs());
            }
            let crit = stats::ks_critical(n, 0.01);
            assert!(d < crit, "{c:?} at x = {x}: KS {d} >= {crit}");
        }
    }
}

#[test]
fn logistic_chi_at_deep_quantile() {
    // chi-hat at p = 0.999 approaches 2 - 2^gamma (smoke-sized companion to
    // the acceptance run at n = 1e7)
    let n = 1_000_000;
    let gamma = 0.5;
    let c = CopulaSpec::logistic(gamma).unwrap();
    let s = copula::sample(&c, n, 8).unwrap();
    let q = margins::laplace_quantile(0.999).unwrap();
    let mut above_x = 0usize;
    let mut both = 0usize;
    for &(x, y) in &s.pairs {
        if x > q {
            above_x += 1;
            if y > q {
                both += 1;
            }
        }
    }
    let chi_hat = both as f64 / above_x as f64;
    let (chi, _) = copula::chi_and_chibar(&c);
    assert!((chi_hat - chi).abs() < 0.06, "chi_hat {chi_hat} vs {chi}");
}
