//! The distribution of `sup |B(t)|` for a Brownian bridge `B` on `[0, 1]`
//! (the Kolmogorov distribution), which calibrates every change test in this
//! crate.

use crate::error::{invalid, Result};

/// Truncation threshold for the alternating series of [`kolmogorov_cdf`].
const SERIES_TOL: f64 = 1e-12;

/// Below this argument the distribution function underflows to zero in
/// double precision (the true value is smaller than `exp(-1500)`), so the
/// series is skipped.
const UNDERFLOW_CUTOFF: f64 = 0.025;

/// CDF of the Kolmogorov distribution,
/// `K(x) = 1 - 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
///
/// The series is truncated once a term drops below `1e-12`; the result is
/// clamped to `[0, 1]`. Non-positive arguments return 0.
///
/// # Example
///
/// ```
/// let p = rank_cusum::kolmogorov_cdf(1.3581);
/// assert!((p - 0.95).abs() < 1e-5);
/// ```
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x.is_nan() || x <= UNDERFLOW_CUTOFF {
        return 0.0;
    }
    let a = 2.0 * x * x;
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    let mut k = 1u64;
    loop {
        let term = (-a * (k * k) as f64).exp();
        sum += sign * term;
        if term < SERIES_TOL {
            break;
        }
        sign = -sign;
        k += 1;
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Quantile of the Kolmogorov distribution, by bisection of
/// [`kolmogorov_cdf`] on `[0, 5]` down to an interval of width `1e-12`.
///
/// # Errors
///
/// Invalid-input error unless `p` lies strictly inside `(0, 1)`.
///
/// # Example
///
/// ```
/// let q = rank_cusum::kolmogorov_quantile(0.95).unwrap();
/// assert!((q - 1.3581).abs() < 1e-4);
/// ```
pub fn kolmogorov_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!(
            "quantile level must lie strictly in (0, 1), got {p}"
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = 5.0f64;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_vanishes_at_and_below_zero() {
        assert_eq!(kolmogorov_cdf(0.0), 0.0);
        assert_eq!(kolmogorov_cdf(-1.0), 0.0);
        assert_eq!(kolmogorov_cdf(0.01), 0.0);
    }

    #[test]
    fn cdf_reference_values() {
        assert!((kolmogorov_cdf(1.3581) - 0.95).abs() < 1e-5);
        assert!((kolmogorov_cdf(0.82757) - 0.5).abs() < 1e-4);
        assert!((kolmogorov_cdf(1.6276) - 0.99).abs() < 1e-4);
        assert!(kolmogorov_cdf(5.0) > 1.0 - 1e-12);
    }

    #[test]
    fn cdf_is_monotone_up_to_series_truncation() {
        // Truncating the alternating series at 1e-12 leaves wiggles of that
        // order in the extreme lower tail.
        let grid: Vec<f64> = (1..100).map(|i| i as f64 * 0.05).collect();
        for w in grid.windows(2) {
            assert!(kolmogorov_cdf(w[0]) <= kolmogorov_cdf(w[1]) + 2e-12);
        }
    }

    #[test]
    fn quantile_reference_value() {
        let q = kolmogorov_quantile(0.95).unwrap();
        assert!((q - 1.35810).abs() < 1e-4);
    }

    #[test]
    fn quantile_round_trips_through_the_cdf() {
        for p in [0.05, 0.25, 0.5, 0.9, 0.95, 0.99, 0.999] {
            let q = kolmogorov_quantile(p).unwrap();
            assert!(
                (kolmogorov_cdf(q) - p).abs() < 1e-9,
                "round trip failed at p = {p}"
            );
        }
    }

    #[test]
    fn quantile_rejects_boundary_levels() {
        assert!(kolmogorov_quantile(0.0).is_err());
        assert!(kolmogorov_quantile(1.0).is_err());
        assert!(kolmogorov_quantile(-0.5).is_err());
        assert!(kolmogorov_quantile(f64::NAN).is_err());
    }
}
