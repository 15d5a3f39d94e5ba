//! CUSUM-type change tests for the dependence of a bivariate time series,
//! the change-point locator, and closed-form oracles for the change model.
//!
//! Each test turns a prefix path of correlation estimates `r_k` into the
//! weighted fluctuation process `(k / sqrt(n)) * |r_k - r_n|`, takes its
//! maximum, and studentizes by a long-run variance estimate. Under the null
//! of constant dependence the normalized statistic converges to
//! `sup |B(t)|` for a Brownian bridge, so p-values come from the Kolmogorov
//! distribution.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::corr::{kendall_path, pearson_path, spearman_s_path, CenteredMoments, CorrelationPath};
use crate::ecdf::psi_hat;
use crate::error::{invalid, Error, Result};
use crate::kolmogorov::kolmogorov_cdf;
use crate::lrv::{lrv_estimate, lrv_estimate_slice, LrvConfig, LrvEstimate};
use crate::rank::midranks;
use crate::series::BivariateSeries;

/// Minimum sample size for the change tests; below this the asymptotic
/// calibration is meaningless.
const MIN_TEST_LEN: usize = 20;

/// Which change test produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// CUSUM of sequential Kendall's tau.
    Kendall,
    /// CUSUM of sequential Pearson correlation.
    Pearson,
    /// CUSUM of the Spearman-type statistic with full-sample ranks.
    SpearmanCopula,
}

/// The weighted fluctuation process `(k / sqrt(n)) * |r_k - r_n|` and its
/// maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CusumProcess {
    /// Prefix length of the first entry.
    pub k_min: usize,
    /// Process values for `k = k_min ..= n`; undefined path entries (NaN
    /// markers) contribute 0.
    pub values: Vec<f64>,
    /// The maximum of `values`.
    pub t_n: f64,
    /// Smallest `k` attaining the maximum.
    pub argmax_k: usize,
}

impl CusumProcess {
    /// The full sample size `n` covered by the process.
    pub fn n(&self) -> usize {
        self.k_min + self.values.len() - 1
    }
}

/// Weighted fluctuation process of a prefix path over `n` observations.
///
/// # Errors
///
/// Invalid-input error when the path does not cover exactly `n`
/// observations.
pub fn cusum_process(path: &CorrelationPath, n: usize) -> Result<CusumProcess> {
    if path.n() != n {
        return Err(invalid(format!(
            "path covers {} observations, expected {n}",
            path.n()
        )));
    }
    let last = path.last();
    let scale = (n as f64).sqrt();
    let mut values = Vec::with_capacity(path.values.len());
    let mut t_n = f64::NEG_INFINITY;
    let mut argmax_k = path.k_min;
    for (i, &v) in path.values.iter().enumerate() {
        let k = path.k_min + i;
        let raw = k as f64 / scale * (v - last).abs();
        let w = if raw.is_finite() { raw } else { 0.0 };
        values.push(w);
        if w > t_n {
            t_n = w;
            argmax_k = k;
        }
    }
    Ok(CusumProcess {
        k_min: path.k_min,
        values,
        t_n,
        argmax_k,
    })
}

/// Outcome of one change test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Which test ran.
    pub statistic_kind: StatisticKind,
    /// Maximum of the weighted fluctuation process.
    pub t_n: f64,
    /// Long-run standard deviation used for studentization.
    pub d_hat: f64,
    /// Lag truncation the variance estimator actually used.
    pub bandwidth_used: usize,
    /// The studentized statistic compared against Kolmogorov quantiles.
    pub normalized: f64,
    /// `1 - K(normalized)` for the Kolmogorov CDF `K`.
    pub p_value: f64,
    /// Whether `p_value < level`.
    pub reject: bool,
    /// The full fluctuation process.
    pub process: CusumProcess,
    /// Smallest prefix length attaining the maximum.
    pub argmax_k: usize,
}

fn require_test_len(series: &BivariateSeries) -> Result<()> {
    if series.len() < MIN_TEST_LEN {
        return Err(invalid(format!(
            "change tests require at least {MIN_TEST_LEN} observations, got {}",
            series.len()
        )));
    }
    Ok(())
}

fn require_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!(
            "significance level must lie strictly in (0, 1), got {level}"
        )));
    }
    Ok(())
}

fn finish(
    statistic_kind: StatisticKind,
    process: CusumProcess,
    est: &LrvEstimate,
    denominator: f64,
    level: f64,
) -> TestResult {
    let normalized = process.t_n / denominator;
    let p_value = 1.0 - kolmogorov_cdf(normalized);
    TestResult {
        statistic_kind,
        t_n: process.t_n,
        d_hat: est.d,
        bandwidth_used: est.bandwidth_used,
        normalized,
        p_value,
        reject: p_value < level,
        argmax_k: process.argmax_k,
        process,
    }
}

/// Change test for Kendall's tau.
///
/// The sequential tau path is studentized as `T_n / (4 d)`, where `d^2` is
/// the long-run variance of the estimated influence values of the sample
/// tau. The factor 4 converts between the influence scale used here and the
/// scale of the limit theorem.
///
/// # Errors
///
/// Invalid-input error for `n < 20` or a level outside `(0, 1)`;
/// [`Error::DegenerateVariance`] when the influence values carry no
/// variance (for example, a monotone deterministic relation between the
/// coordinates).
pub fn kendall_change_test(
    series: &BivariateSeries,
    config: &LrvConfig,
    level: f64,
) -> Result<TestResult> {
    require_test_len(series)?;
    require_level(level)?;
    let path = kendall_path(series)?;
    let tau_hat = path.last();
    let psi = psi_hat(series, tau_hat, config.demean)?;
    let est = lrv_estimate(&psi, config)?;
    if est.d <= 0.0 {
        return Err(Error::DegenerateVariance(
            "influence values of the sample tau have zero long-run variance".into(),
        ));
    }
    let process = cusum_process(&path, series.len())?;
    Ok(finish(
        StatisticKind::Kendall,
        process,
        &est,
        4.0 * est.d,
        level,
    ))
}

/// Change test for the Pearson correlation.
///
/// The influence values are `v_i = x_i y_i - (rho / 2) (x_i^2 + y_i^2)` of
/// the full-sample standardized coordinates; the statistic is `T_n / d`.
///
/// # Errors
///
/// Invalid-input error for `n < 20` or a level outside `(0, 1)`;
/// [`Error::DegenerateVariance`] when a coordinate is constant.
pub fn pearson_change_test(
    series: &BivariateSeries,
    config: &LrvConfig,
    level: f64,
) -> Result<TestResult> {
    require_test_len(series)?;
    require_level(level)?;
    let moments = CenteredMoments::of(series);
    if moments.var_x <= 0.0 || moments.var_y <= 0.0 {
        return Err(Error::DegenerateVariance(
            "a coordinate of the series is constant".into(),
        ));
    }
    let sx = moments.var_x.sqrt();
    let sy = moments.var_y.sqrt();
    let rho = moments.cov / (sx * sy);
    let influence: Vec<f64> = series
        .xs()
        .iter()
        .zip(series.ys())
        .map(|(&x, &y)| {
            let u = (x - moments.mean_x) / sx;
            let v = (y - moments.mean_y) / sy;
            u * v - 0.5 * rho * (u * u + v * v)
        })
        .collect();
    let est = lrv_estimate_slice(&influence, config)?;
    if est.d <= 0.0 {
        return Err(Error::DegenerateVariance(
            "influence values of the sample correlation have zero long-run variance".into(),
        ));
    }
    let path = pearson_path(series)?;
    let process = cusum_process(&path, series.len())?;
    Ok(finish(StatisticKind::Pearson, process, &est, est.d, level))
}

/// Change test for the Spearman-type statistic with full-sample ranks.
///
/// The influence values are `g_i = 12 (R(x_i)/n) (R(y_i)/n) - 3 - 12/n -
/// s_n` with mid-ranks, whose partial sums reproduce `k (s_k - s_n)`
/// exactly; the statistic is `T_n / d`.
///
/// # Errors
///
/// Invalid-input error for `n < 20` or a level outside `(0, 1)`;
/// [`Error::DegenerateVariance`] when the influence values carry no
/// variance.
pub fn spearman_copula_change_test(
    series: &BivariateSeries,
    config: &LrvConfig,
    level: f64,
) -> Result<TestResult> {
    require_test_len(series)?;
    require_level(level)?;
    let n = series.len();
    let nf = n as f64;
    let path = spearman_s_path(series)?;
    let s_n = path.last();
    let rx = midranks(series.xs());
    let ry = midranks(series.ys());
    // The rank product is grouped on its own so that exchanging the
    // coordinates reproduces the values bit-for-bit.
    let influence: Vec<f64> = rx
        .iter()
        .zip(&ry)
        .map(|(&a, &b)| 12.0 * ((a / nf) * (b / nf)) - 3.0 - 12.0 / nf - s_n)
        .collect();
    let est = lrv_estimate_slice(&influence, config)?;
    if est.d <= 0.0 {
        return Err(Error::DegenerateVariance(
            "rank influence values have zero long-run variance".into(),
        ));
    }
    let process = cusum_process(&path, n)?;
    Ok(finish(
        StatisticKind::SpearmanCopula,
        process,
        &est,
        est.d,
        level,
    ))
}

/// Estimated location of a change in Kendall's tau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePointEstimate {
    /// Smallest prefix length maximizing the fluctuation process.
    pub k_hat: usize,
    /// `k_hat / n`, the estimated change fraction.
    pub lambda_hat: f64,
}

/// Location of the maximum of the Kendall fluctuation process.
///
/// Consistent for the change fraction when exactly one change satisfies the
/// identifiability condition (see [`identifiability_condition`]).
///
/// # Errors
///
/// Invalid-input error for `n < 4`.
pub fn locate_change(series: &BivariateSeries) -> Result<ChangePointEstimate> {
    let n = series.len();
    if n < 4 {
        return Err(invalid(format!(
            "change-point location requires at least 4 observations, got {n}"
        )));
    }
    let path = kendall_path(series)?;
    let process = cusum_process(&path, n)?;
    Ok(ChangePointEstimate {
        k_hat: process.argmax_k,
        lambda_hat: process.argmax_k as f64 / n as f64,
    })
}

/// Parameters of the one-change model: dependence `F` before the change at
/// fraction `lambda_star`, `G` after, with `tau_f`, `tau_g` the taus within
/// each regime and `tau_fg` the tau across regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeModelParams {
    /// Change fraction, strictly inside `(0, 1)`.
    pub lambda_star: f64,
    /// Kendall's tau of the pre-change regime.
    pub tau_f: f64,
    /// Kendall's tau of the post-change regime.
    pub tau_g: f64,
    /// Kendall's tau of one pre-change against one post-change observation.
    pub tau_fg: f64,
}

impl ChangeModelParams {
    /// Validated constructor.
    ///
    /// # Errors
    ///
    /// Invalid-input error when `lambda_star` is not strictly inside
    /// `(0, 1)` or a tau leaves `[-1, 1]`.
    pub fn new(lambda_star: f64, tau_f: f64, tau_g: f64, tau_fg: f64) -> Result<Self> {
        if !(lambda_star > 0.0 && lambda_star < 1.0) {
            return Err(invalid(format!(
                "change fraction must lie strictly in (0, 1), got {lambda_star}"
            )));
        }
        for (name, t) in [("tau_f", tau_f), ("tau_g", tau_g), ("tau_fg", tau_fg)] {
            if !(-1.0..=1.0).contains(&t) {
                return Err(invalid(format!("{name} must lie in [-1, 1], got {t}")));
            }
        }
        Ok(Self {
            lambda_star,
            tau_f,
            tau_g,
            tau_fg,
        })
    }

    /// Limiting full-sample tau `t(lambda)` of the prefix up to fraction
    /// `lambda`, mixing the regimes by pair counts.
    fn limit_tau(&self, lambda: f64) -> f64 {
        if lambda <= self.lambda_star {
            self.tau_f
        } else {
            let l = self.lambda_star;
            let after = lambda - l;
            (l * l * self.tau_f + after * after * self.tau_g + 2.0 * l * after * self.tau_fg)
                / (lambda * lambda)
        }
    }
}

/// Expected Kendall's tau of the first `k` of `n` observations under the
/// one-change model, by exact pair counting: with `m = floor(lambda_star *
/// n)` pre-change observations,
///
/// ```text
/// k <= m:  tau_f
/// k >  m:  [m(m-1) tau_f + (k-m)(k-m-1) tau_g + 2m(k-m) tau_fg] / (k(k-1))
/// ```
///
/// # Errors
///
/// Invalid-input error unless `2 <= k <= n`.
pub fn mean_tau_prefix(k: usize, n: usize, params: &ChangeModelParams) -> Result<f64> {
    if k < 2 || k > n {
        return Err(invalid(format!("prefix length must lie in 2..={n}, got {k}")));
    }
    let m = (params.lambda_star * n as f64).floor() as usize;
    if k <= m {
        return Ok(params.tau_f);
    }
    let mf = m as f64;
    let af = (k - m) as f64;
    let kf = k as f64;
    Ok((mf * (mf - 1.0) * params.tau_f
        + af * (af - 1.0) * params.tau_g
        + 2.0 * mf * af * params.tau_fg)
        / (kf * (kf - 1.0)))
}

/// Limiting drift `c(lambda) = lambda * (t(lambda) - t(1))` of the
/// fluctuation process under the one-change model; the locator converges to
/// the maximizer of `|c|`.
///
/// # Errors
///
/// Invalid-input error unless `lambda` lies in `[0, 1]`.
pub fn c_lambda(lambda: f64, params: &ChangeModelParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid(format!(
            "fraction must lie in [0, 1], got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda * (params.limit_tau(lambda) - params.limit_tau(1.0)))
}

/// Whether `|c|` is maximized exactly at the change fraction, which is the
/// condition for the locator to be consistent:
///
/// ```text
/// (1 - l)^2 / (2 ((1 - l)^2 + l)) <= (tau_fg - tau_f) / (tau_g - tau_f) < 1
/// ```
///
/// with `l = lambda_star`.
///
/// # Errors
///
/// Invalid-input error when `tau_f == tau_g` (no change in tau to locate).
pub fn identifiability_condition(params: &ChangeModelParams) -> Result<bool> {
    if params.tau_f == params.tau_g {
        return Err(invalid(
            "identifiability requires tau_f != tau_g".to_string(),
        ));
    }
    let ratio = (params.tau_fg - params.tau_f) / (params.tau_g - params.tau_f);
    let rem = 1.0 - params.lambda_star;
    let lower = rem * rem / (2.0 * (rem * rem + params.lambda_star));
    Ok(ratio >= lower && ratio < 1.0)
}

/// Asymptotic variance of the sample Pearson correlation for a bivariate
/// normal distribution with correlation `rho`: `(1 - rho^2)^2`.
///
/// # Errors
///
/// Invalid-input error unless `|rho| <= 1`.
pub fn asv_pearson_normal(rho: f64) -> Result<f64> {
    require_correlation(rho)?;
    let t = 1.0 - rho * rho;
    Ok(t * t)
}

/// Asymptotic variance of the tau-based correlation estimate
/// `sin(pi tau_hat / 2)` for a bivariate normal distribution:
/// `(1 - rho^2) (pi^2 / 9 - 4 asin^2(rho / 2))`.
///
/// # Errors
///
/// Invalid-input error unless `|rho| <= 1`.
pub fn asv_kendall_normal(rho: f64) -> Result<f64> {
    require_correlation(rho)?;
    let a = (0.5 * rho).asin();
    Ok((1.0 - rho * rho) * (PI * PI / 9.0 - 4.0 * a * a))
}

/// The correlation of a bivariate normal with Kendall's tau `tau`:
/// `sin(pi tau / 2)`.
///
/// # Errors
///
/// Invalid-input error unless `|tau| <= 1`.
pub fn rho_from_tau(tau: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [-1, 1], got {tau}")));
    }
    Ok((0.5 * PI * tau).sin())
}

/// Kendall's tau of a bivariate normal with correlation `rho`:
/// `(2 / pi) asin(rho)`.
///
/// # Errors
///
/// Invalid-input error unless `|rho| <= 1`.
pub fn tau_from_rho(rho: f64) -> Result<f64> {
    require_correlation(rho)?;
    Ok(2.0 / PI * rho.asin())
}

fn require_correlation(rho: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(invalid(format!(
            "correlation must lie in [-1, 1], got {rho}"
        )));
    }
    Ok(())
}
