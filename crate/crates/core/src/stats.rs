//! Pooled-variance t-test for comparing the fold MAE distributions of two
//! hyperparameter settings.
//!
//! With equal fold counts `n` the pooled deviation is
//! `S_P = sqrt((n-1) Var1 / (2n-2) + (n-1) Var2 / (2n-2))` and the statistic
//! `T = (mean1 - mean2) / (S_P sqrt(2/n))` is compared against the upper
//! `alpha` quantile of Student's t with `2n - 2` degrees of freedom.

use alloc::format;

use crate::error::{Error, Result};

/// Rejection rule for [`compare_configs_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Tail {
    /// Reject when `T > t_alpha`.
    #[default]
    Upper,
    /// Reject when `|T| > t_{alpha/2}`.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TTestReport {
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
    pub n_oil: usize,
    pub s_p: f64,
    pub t_value: f64,
    pub dof: usize,
    pub alpha: f64,
    pub tail: Tail,
    pub t_critical: f64,
    pub reject_equal_means: bool,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Sample mean and unbiased (`n - 1`) variance.
pub fn mean_and_variance(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var))
}

pub fn pooled_sd(var1: f64, var2: f64, n_oil: usize) -> Result<f64> {
    if n_oil < 2 {
        return Err(Error::InsufficientSamples(format!(
            "pooled deviation needs n_oil >= 2, got {n_oil}"
        )));
    }
    if !(var1 >= 0.0) || !(var2 >= 0.0) {
        return Err(Error::Domain(format!(
            "variances must be nonnegative, got {var1} and {var2}"
        )));
    }
    let n = n_oil as f64;
    let denom = 2.0 * n - 2.0;
    Ok(libm::sqrt((n - 1.0) * var1 / denom + (n - 1.0) * var2 / denom))
}

/// Signed statistic, `mean1 - mean2` in the numerator.
pub fn t_statistic(mean1: f64, mean2: f64, s_p: f64, n_oil: usize) -> Result<f64> {
    if n_oil < 2 {
        return Err(Error::InsufficientSamples(format!(
            "t statistic needs n_oil >= 2, got {n_oil}"
        )));
    }
    if s_p == 0.0 {
        return if mean1 == mean2 {
            Ok(0.0)
        } else {
            Err(Error::DegenerateVariance)
        };
    }
    if !(s_p > 0.0) {
        return Err(Error::Domain(format!("pooled deviation must be >= 0, got {s_p}")));
    }
    Ok((mean1 - mean2) / (s_p * libm::sqrt(2.0 / n_oil as f64)))
}

const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`. `y` must equal `1 - x`; passing
/// it separately keeps precision when `x` is close to 1.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log(y);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

/// Upper tail `P(T >= t)` of Student's t with `dof` degrees of freedom.
pub fn student_t_sf(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let t2 = t * t;
    let x = dof / (dof + t2);
    let y = t2 / (dof + t2);
    let half_tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x, y);
    if t > 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

pub fn student_t_cdf(t: f64, dof: f64) -> f64 {
    1.0 - student_t_sf(t, dof)
}

/// Upper-tail quantile `t_alpha` with `P(T >= t_alpha) = alpha`, found by
/// bisection on the survival function.
pub fn t_critical(alpha: f64, dof: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    if dof < 1 {
        return Err(Error::Domain("degrees of freedom must be >= 1".into()));
    }
    let nu = dof as f64;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while student_t_sf(hi, nu) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_sf(mid, nu) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-sided comparison of per-fold MAE lists (upper tail).
pub fn compare_configs(maes1: &[f64], maes2: &[f64], alpha: f64) -> Result<TTestReport> {
    compare_configs_with(maes1, maes2, alpha, Tail::Upper)
}

pub fn compare_configs_with(maes1: &[f64], maes2: &[f64], alpha: f64, tail: Tail) -> Result<TTestReport> {
    if maes1.len() != maes2.len() {
        return Err(Error::Dimension {
            expected: maes1.len(),
            actual: maes2.len(),
        });
    }
    let n_oil = maes1.len();
    let (mean1, var1) = mean_and_variance(maes1)?;
    let (mean2, var2) = mean_and_variance(maes2)?;
    let s_p = pooled_sd(var1, var2, n_oil)?;
    let t_value = t_statistic(mean1, mean2, s_p, n_oil)?;
    let dof = 2 * n_oil - 2;
    let (t_crit, reject) = match tail {
        Tail::Upper => {
            let c = t_critical(alpha, dof)?;
            (c, t_value > c)
        }
        Tail::TwoSided => {
            let c = t_critical(0.5 * alpha, dof)?;
            (c, t_value.abs() > c)
        }
    };
    Ok(TTestReport {
        mean1,
        mean2,
        var1,
        var2,
        n_oil,
        s_p,
        t_value,
        dof,
        alpha,
        tail,
        t_critical: t_crit,
        reject_equal_means: reject,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand_distr::{Distribution, Normal};
    use statrs::distribution::{ContinuousCDF, StudentsT};

    /// Independent quantile oracle: Simpson integration of the t density
    /// from 0 to q, root found by bisection.
    fn simpson_quantile(alpha: f64, dof: f64) -> f64 {
        let ln_c =
            libm::lgamma(0.5 * (dof + 1.0)) - libm::lgamma(0.5 * dof) - 0.5 * libm::log(dof * core::f64::consts::PI);
        let pdf = |t: f64| libm::exp(ln_c - 0.5 * (dof + 1.0) * libm::log1p(t * t / dof));
        let upper_from_zero = |q: f64| {
            let n = 20_000;
            let h = q / n as f64;
            let mut s = pdf(0.0) + pdf(q);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * pdf(i as f64 * h);
            }
            s * h / 3.0
        };
        let target = 0.5 - alpha;
        let (mut lo, mut hi) = (0.0, 50.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if upper_from_zero(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn pooled_deviation_values() {
        assert!((pooled_sd(0.7, 0.7, 5).unwrap() - libm::sqrt(0.7)).abs() < 1e-12);
        assert_eq!(pooled_sd(0.0, 0.0, 9).unwrap(), 0.0);
        for n in [2, 3, 22, 1000] {
            assert!((pooled_sd(2.0, 4.0, n).unwrap() - libm::sqrt(3.0)).abs() < 1e-12);
        }
        assert!(matches!(pooled_sd(1.0, 1.0, 1), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn t_statistic_values() {
        assert_eq!(t_statistic(0.4, 0.4, 0.3, 10).unwrap(), 0.0);
        assert!((t_statistic(1.0, 0.5, 1.0, 8).unwrap() - 1.0).abs() < 1e-12);
        let a = t_statistic(1.3, 0.2, 0.7, 12).unwrap();
        let b = t_statistic(0.2, 1.3, 0.7, 12).unwrap();
        assert_eq!(a, -b);
        assert_eq!(t_statistic(1.0, 1.0, 0.0, 4).unwrap(), 0.0);
        assert_eq!(t_statistic(1.0, 2.0, 0.0, 4), Err(Error::DegenerateVariance));
    }

    #[test]
    fn critical_values() {
        assert!((t_critical(0.05, 42).unwrap() - 1.681952).abs() < 1e-4);
        let cauchy = libm::tan(core::f64::consts::PI * (0.5 - 0.05));
        assert!((t_critical(0.05, 1).unwrap() - cauchy).abs() < 1e-6);
        assert!((t_critical(0.05, 1).unwrap() - 6.3138).abs() < 1e-3);
        assert!((t_critical(0.05, 1_000_000).unwrap() - 1.644854).abs() < 1e-4);
    }

    #[test]
    fn critical_values_match_quadrature_and_statrs() {
        for &dof in &[1usize, 2, 3, 5, 10, 20, 42, 100] {
            for &alpha in &[0.005, 0.025, 0.05, 0.1, 0.25] {
                let ours = t_critical(alpha, dof).unwrap();
                let reference = StudentsT::new(0.0, 1.0, dof as f64).unwrap().inverse_cdf(1.0 - alpha);
                assert!(
                    (ours - reference).abs() < 1e-6,
                    "dof {dof} alpha {alpha}: {ours} vs {reference}"
                );
                if alpha >= 0.025 {
                    let simpson = simpson_quantile(alpha, dof as f64);
                    assert!(
                        (ours - simpson).abs() < 1e-6,
                        "dof {dof} alpha {alpha}: {ours} vs {simpson}"
                    );
                }
            }
        }
    }

    #[test]
    fn critical_value_is_monotone() {
        let mut prev = f64::INFINITY;
        for dof in 1..60 {
            let c = t_critical(0.05, dof).unwrap();
            assert!(c < prev);
            prev = c;
        }
        let mut prev = f64::INFINITY;
        for a in [0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4] {
            let c = t_critical(a, 10).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn critical_domain_errors() {
        assert!(t_critical(0.0, 5).is_err());
        assert!(t_critical(0.5, 5).is_err());
        assert!(t_critical(0.05, 0).is_err());
    }

    #[test]
    fn identical_lists_do_not_reject() {
        let l = [0.12, 0.3, 0.05, 0.2, 0.11];
        let r = compare_configs(&l, &l, DEFAULT_ALPHA).unwrap();
        assert_eq!(r.t_value, 0.0);
        assert!(!r.reject_equal_means);
        assert_eq!(r.dof, 8);
        assert_eq!(r.alpha, 0.05);
    }

    #[test]
    fn large_shift_rejects() {
        let l2 = [0.12, 0.3, 0.05, 0.2, 0.11, 0.17, 0.09];
        let (_, var) = mean_and_variance(&l2).unwrap();
        let shift = 10.0 * libm::sqrt(var);
        let l1: Vec<f64> = l2.iter().map(|v| v + shift).collect();
        let r = compare_configs(&l1, &l2, DEFAULT_ALPHA).unwrap();
        assert!(r.reject_equal_means);
        assert!(r.t_value > 10.0 * r.t_critical);
        // one-sided: the reverse order cannot reject
        let rev = compare_configs(&l2, &l1, DEFAULT_ALPHA).unwrap();
        assert!(!rev.reject_equal_means);
        assert_eq!(rev.t_value, -r.t_value);
        assert_eq!(rev.s_p, r.s_p);
        let two = compare_configs_with(&l2, &l1, DEFAULT_ALPHA, Tail::TwoSided).unwrap();
        assert!(two.reject_equal_means);
    }

    #[test]
    fn compare_rejects_mismatched_lengths() {
        assert!(matches!(
            compare_configs(&[1.0, 2.0], &[1.0], 0.05),
            Err(Error::Dimension { .. })
        ));
        assert!(compare_configs(&[1.0], &[1.0], 0.05).is_err());
    }

    #[test]
    fn null_rejection_rate() {
        let mut rng = crate::seed::rng(20);
        let dist = Normal::new(0.2, 0.05).unwrap();
        let trials = 10_000;
        let mut rejections = 0;
        let mut a = [0.0; 20];
        let mut b = [0.0; 20];
        for _ in 0..trials {
            for v in a.iter_mut().chain(b.iter_mut()) {
                *v = dist.sample(&mut rng);
            }
            if compare_configs(&a, &b, 0.05).unwrap().reject_equal_means {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / trials as f64;
        assert!((0.04..=0.06).contains(&rate), "{rate}");
    }
}
