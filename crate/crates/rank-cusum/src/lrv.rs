//! Kernel-weighted long-run variance (HAC) estimation.
//!
//! For values `v_1, ..., v_n` the estimate is
//!
//! ```text
//! d^2 = gamma(0) + 2 * sum_{j=1..b} kernel(j / b) * gamma(j)
//! gamma(j) = (1/n) * sum_{i=1..n-j} v_i * v_{i+j}
//! ```
//!
//! with the quartic kernel `(1 - x^2)^2` or the Bartlett kernel `1 - x` on
//! `[0, 1]` (zero beyond), and default bandwidth `floor(2 n^{1/3})`. Kernel
//! weighting cannot guarantee positivity; a non-positive raw estimate is
//! either clamped to the lag-0 term (flagged) or reported as an error,
//! depending on configuration.

use serde::{Deserialize, Serialize};

use crate::ecdf::PsiValues;
use crate::error::{invalid, Error, Result};

/// Kernel choice for the lag weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `(1 - x^2)^2` on `[0, 1]`.
    Quartic,
    /// `1 - x` on `[0, 1]`.
    Bartlett,
}

/// Quartic kernel `(1 - x^2)^2` for `x <= 1`, zero beyond.
///
/// # Errors
///
/// Invalid-input error when `x` is negative or NaN.
pub fn kernel_quartic(x: f64) -> Result<f64> {
    require_nonnegative(x)?;
    if x <= 1.0 {
        let t = 1.0 - x * x;
        Ok(t * t)
    } else {
        Ok(0.0)
    }
}

/// Bartlett kernel `1 - x` for `x <= 1`, zero beyond.
///
/// # Errors
///
/// Invalid-input error when `x` is negative or NaN.
pub fn kernel_bartlett(x: f64) -> Result<f64> {
    require_nonnegative(x)?;
    Ok((1.0 - x).max(0.0))
}

fn require_nonnegative(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(invalid(format!("kernel argument must be >= 0, got {x}")));
    }
    Ok(())
}

impl KernelKind {
    fn weight(self, x: f64) -> Result<f64> {
        match self {
            KernelKind::Quartic => kernel_quartic(x),
            KernelKind::Bartlett => kernel_bartlett(x),
        }
    }
}

/// Bandwidth selection for the kernel weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    /// `floor(2 n^{1/3})`, clamped to `n - 1`.
    Auto,
    /// User-supplied value, must satisfy `1 <= b <= n - 1`.
    Fixed(usize),
}

/// Handling of a non-positive raw estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeFallback {
    /// Replace the estimate with the lag-0 term and set the flag.
    ClampToLag0,
    /// Fail with [`Error::NegativeLrv`].
    Error,
}

/// Configuration for [`lrv_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LrvConfig {
    /// Lag-weight kernel.
    pub kernel: KernelKind,
    /// Bandwidth rule.
    pub bandwidth: Bandwidth,
    /// Subtract the sample mean before computing autocovariances.
    pub demean: bool,
    /// What to do when the raw estimate is non-positive.
    pub fallback: NegativeFallback,
}

impl Default for LrvConfig {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Quartic,
            bandwidth: Bandwidth::Auto,
            demean: true,
            fallback: NegativeFallback::ClampToLag0,
        }
    }
}

/// A long-run variance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvEstimate {
    /// The (possibly clamped) variance estimate.
    pub d_squared: f64,
    /// `sqrt(max(d_squared, 0))`.
    pub d: f64,
    /// True when the raw kernel-weighted sum was non-positive and the
    /// lag-0 clamp was applied.
    pub negative_flag: bool,
    /// The bandwidth actually used.
    pub bandwidth_used: usize,
}

/// Default bandwidth `floor(2 n^{1/3})`, computed as the integer cube root
/// of `8 n` so that perfect cubes are not lost to floating-point rounding.
///
/// # Errors
///
/// Invalid-input error for `n < 2`.
pub fn default_bandwidth(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(invalid(format!(
            "bandwidth selection requires at least 2 observations, got {n}"
        )));
    }
    Ok(icbrt(8 * n as u64).max(1) as usize)
}

fn icbrt(v: u64) -> u64 {
    let mut r = (v as f64).cbrt() as u64;
    while r.pow(3) > v {
        r -= 1;
    }
    while (r + 1).pow(3) <= v {
        r += 1;
    }
    r
}

/// Long-run variance of estimated influence values.
///
/// Skips re-demeaning when the values are already demeaned; otherwise
/// identical to [`lrv_estimate_slice`].
pub fn lrv_estimate(psi: &PsiValues, config: &LrvConfig) -> Result<LrvEstimate> {
    let effective = LrvConfig {
        demean: config.demean && !psi.demeaned,
        ..*config
    };
    lrv_estimate_slice(&psi.values, &effective)
}

/// Kernel-weighted long-run variance of a raw value sequence.
///
/// # Errors
///
/// Invalid-input error for `n < 2` or a fixed bandwidth outside
/// `1 ..= n - 1`; [`Error::NegativeLrv`] when the raw estimate is
/// non-positive and the fallback is [`NegativeFallback::Error`].
pub fn lrv_estimate_slice(values: &[f64], config: &LrvConfig) -> Result<LrvEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(invalid(format!(
            "long-run variance estimation requires at least 2 observations, got {n}"
        )));
    }
    let bandwidth = match config.bandwidth {
        Bandwidth::Auto => default_bandwidth(n)?.min(n - 1),
        Bandwidth::Fixed(b) => {
            if b == 0 || b > n - 1 {
                return Err(invalid(format!(
                    "bandwidth must lie in 1..={}, got {b}",
                    n - 1
                )));
            }
            b
        }
    };

    let centered: Vec<f64>;
    let v: &[f64] = if config.demean {
        let mean = values.iter().sum::<f64>() / n as f64;
        centered = values.iter().map(|x| x - mean).collect();
        &centered
    } else {
        values
    };

    let nf = n as f64;
    let gamma0 = v.iter().map(|x| x * x).sum::<f64>() / nf;
    let mut weighted = 0.0f64;
    for j in 1..=bandwidth {
        let w = config.kernel.weight(j as f64 / bandwidth as f64)?;
        if w == 0.0 {
            continue;
        }
        let cross: f64 = v[..n - j].iter().zip(&v[j..]).map(|(a, b)| a * b).sum();
        weighted += w * cross;
    }
    let raw = gamma0 + 2.0 * weighted / nf;

    let (d_squared, negative_flag) = if raw > 0.0 {
        (raw, false)
    } else {
        match config.fallback {
            NegativeFallback::ClampToLag0 => (gamma0, true),
            NegativeFallback::Error => {
                return Err(Error::NegativeLrv(format!(
                    "raw estimate {raw} with bandwidth {bandwidth}"
                )))
            }
        }
    };

    Ok(LrvEstimate {
        d_squared,
        d: d_squared.max(0.0).sqrt(),
        negative_flag,
        bandwidth_used: bandwidth,
    })
}
