//! Correlation estimators and their sequential prefix paths.
//!
//! The centerpiece is Kendall's tau: concordant/discordant pair counting in
//! exact integer arithmetic, with an `O(n log n)` algorithm (sort by x,
//! dominance counting over y-ranks in a Fenwick tree), a brute-force
//! `O(n^2)` oracle, and an incremental prefix path. Pearson and two Spearman
//! variants provide the same prefix-path shape for the competing tests.
//!
//! Tie handling: pairs tied in either coordinate count as neither concordant
//! nor discordant; rank-based statistics use mid-ranks.

use crate::error::{invalid, Result};
use crate::rank::{dense_ranks, midranks, sort_indices, Fenwick};
use crate::series::BivariateSeries;

/// Which correlation statistic a [`CorrelationPath`] tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Kendall's tau.
    Kendall,
    /// Pearson's moment correlation.
    Pearson,
    /// Spearman-type statistic normalized by full-sample ranks; its prefix
    /// values feed the copula-based change test.
    SpearmanS,
    /// Classical Spearman rank correlation.
    SpearmanR,
}

/// Exact pair counts behind Kendall's tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConcordanceCount {
    /// Pairs `(i, j)` with `(x_j - x_i)(y_j - y_i) > 0`.
    pub concordant: u64,
    /// Pairs with a negative product.
    pub discordant: u64,
    /// All pairs `n(n-1)/2`; ties contribute to neither count.
    pub pairs: u64,
}

impl ConcordanceCount {
    /// Kendall's tau `(concordant - discordant) / pairs`.
    ///
    /// Every tau in this module funnels through this one expression so that
    /// algorithms producing identical counts return bit-identical values.
    pub fn tau(&self) -> f64 {
        tau_value(self.concordant, self.discordant, self.pairs)
    }
}

fn tau_value(concordant: u64, discordant: u64, pairs: u64) -> f64 {
    (concordant as f64 - discordant as f64) / (pairs as f64)
}

/// Per-prefix estimates of one statistic, for `k = k_min ..= n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPath {
    /// The statistic the values estimate.
    pub statistic: Statistic,
    /// Smallest prefix length with a defined value (2, except 1 for
    /// [`Statistic::SpearmanS`] whose normalization uses the global `n`).
    pub k_min: usize,
    /// `values[i]` is the estimate over the first `k_min + i` observations.
    pub values: Vec<f64>,
}

impl CorrelationPath {
    /// The full sample size `n` covered by the path.
    pub fn n(&self) -> usize {
        self.k_min + self.values.len() - 1
    }

    /// Estimate over the first `k` observations (`k_min <= k <= n`).
    pub fn value_at(&self, k: usize) -> f64 {
        self.values[k - self.k_min]
    }

    /// The full-sample estimate (value at `k = n`).
    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }
}

fn require_len(series: &BivariateSeries, min: usize, what: &str) -> Result<()> {
    if series.len() < min {
        return Err(invalid(format!(
            "{what} requires at least {min} observations, got {}",
            series.len()
        )));
    }
    Ok(())
}

/// Concordant/discordant pair counts in `O(n log n)`.
///
/// Points are processed in x-order; a Fenwick tree over dense y-ranks counts,
/// for each point, how many earlier-x points lie strictly below (concordant)
/// or strictly above (discordant) in y. Points sharing an x value are queried
/// before any of them is inserted, so x-ties land in neither count; y-ties
/// are excluded by querying strict ranks.
pub fn concordance_counts(series: &BivariateSeries) -> Result<ConcordanceCount> {
    require_len(series, 2, "concordance counting")?;
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    let order = sort_indices(xs);
    let (yrank, y_distinct) = dense_ranks(ys);

    let mut fen = Fenwick::new(y_distinct);
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut inserted = 0u64;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            let r = yrank[i];
            let below = fen.prefix(r);
            let at_or_below = fen.prefix(r + 1);
            concordant += below;
            discordant += inserted - at_or_below;
        }
        for &i in &order[start..end] {
            fen.add(yrank[i]);
        }
        inserted += (end - start) as u64;
        start = end;
    }

    Ok(ConcordanceCount {
        concordant,
        discordant,
        pairs: n as u64 * (n as u64 - 1) / 2,
    })
}

/// Brute-force `O(n^2)` oracle for [`concordance_counts`]; identical exact
/// integer counts by direct enumeration of all pairs.
pub fn concordance_counts_naive(series: &BivariateSeries) -> Result<ConcordanceCount> {
    require_len(series, 2, "concordance counting")?;
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    for j in 1..n {
        for i in 0..j {
            let sx = (xs[j] > xs[i]) as i32 - (xs[j] < xs[i]) as i32;
            let sy = (ys[j] > ys[i]) as i32 - (ys[j] < ys[i]) as i32;
            match sx * sy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    Ok(ConcordanceCount {
        concordant,
        discordant,
        pairs: n as u64 * (n as u64 - 1) / 2,
    })
}

/// Sample Kendall's tau in `O(n log n)`.
///
/// # Errors
///
/// Invalid-input error for `n < 2`.
pub fn kendall_tau(series: &BivariateSeries) -> Result<f64> {
    Ok(concordance_counts(series)?.tau())
}

/// Brute-force oracle for [`kendall_tau`]; bit-identical because both share
/// the exact integer counts and the same final division.
pub fn kendall_tau_naive(series: &BivariateSeries) -> Result<f64> {
    Ok(concordance_counts_naive(series)?.tau())
}

/// Kendall's tau of every prefix, `k = 2 ..= n`.
///
/// Incremental: observation `k` is compared against all `k - 1` predecessors
/// (`O(n^2)` total), updating exact concordant/discordant counts. The final
/// entry is bit-equal to [`kendall_tau`] of the whole series.
pub fn kendall_path(series: &BivariateSeries) -> Result<CorrelationPath> {
    require_len(series, 2, "the Kendall prefix path")?;
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    let mut values = Vec::with_capacity(n - 1);
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    for k in 1..n {
        let (xk, yk) = (xs[k], ys[k]);
        for i in 0..k {
            let sx = (xk > xs[i]) as i32 - (xk < xs[i]) as i32;
            let sy = (yk > ys[i]) as i32 - (yk < ys[i]) as i32;
            match sx * sy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
        let pairs = (k as u64 + 1) * k as u64 / 2;
        values.push(tau_value(concordant, discordant, pairs));
    }
    Ok(CorrelationPath {
        statistic: Statistic::Kendall,
        k_min: 2,
        values,
    })
}

/// Pearson correlation of every prefix, `k = 2 ..= n`, in `O(n)`.
///
/// Uses numerically stable running centered moments (symmetric in x and y, so
/// exchanging the coordinates produces bit-identical values). Prefixes where
/// either coordinate is constant have no defined correlation and are reported
/// as NaN markers rather than aborting the path.
pub fn pearson_path(series: &BivariateSeries) -> Result<CorrelationPath> {
    require_len(series, 2, "the Pearson prefix path")?;
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    let mut values = Vec::with_capacity(n - 1);
    let mut mean_x = 0.0f64;
    let mut mean_y = 0.0f64;
    let mut m2x = 0.0f64;
    let mut m2y = 0.0f64;
    let mut cxy = 0.0f64;
    for k in 1..=n {
        let kf = k as f64;
        let dx = xs[k - 1] - mean_x;
        let dy = ys[k - 1] - mean_y;
        let w = (kf - 1.0) / kf;
        m2x += w * (dx * dx);
        m2y += w * (dy * dy);
        cxy += w * (dx * dy);
        mean_x += dx / kf;
        mean_y += dy / kf;
        if k >= 2 {
            let value = if m2x > 0.0 && m2y > 0.0 {
                cxy / (m2x * m2y).sqrt()
            } else {
                f64::NAN
            };
            values.push(value);
        }
    }
    Ok(CorrelationPath {
        statistic: Statistic::Pearson,
        k_min: 2,
        values,
    })
}

/// Full-sample Pearson correlation by a two-pass computation.
///
/// # Errors
///
/// Invalid-input error for `n < 2`; degenerate constant margins yield NaN
/// (mirroring the undefined markers of [`pearson_path`]).
pub fn pearson_corr(series: &BivariateSeries) -> Result<f64> {
    require_len(series, 2, "Pearson correlation")?;
    let moments = CenteredMoments::of(series);
    if moments.var_x > 0.0 && moments.var_y > 0.0 {
        Ok(moments.cov / (moments.var_x * moments.var_y).sqrt())
    } else {
        Ok(f64::NAN)
    }
}

/// Full-sample means, population variances, and covariance (two-pass).
pub(crate) struct CenteredMoments {
    pub(crate) mean_x: f64,
    pub(crate) mean_y: f64,
    pub(crate) var_x: f64,
    pub(crate) var_y: f64,
    pub(crate) cov: f64,
}

impl CenteredMoments {
    pub(crate) fn of(series: &BivariateSeries) -> Self {
        let n = series.len() as f64;
        let xs = series.xs();
        let ys = series.ys();
        let mean_x = xs.iter().sum::<f64>() / n;
        let mean_y = ys.iter().sum::<f64>() / n;
        let mut var_x = 0.0;
        let mut var_y = 0.0;
        let mut cov = 0.0;
        for (&x, &y) in xs.iter().zip(ys) {
            let dx = x - mean_x;
            let dy = y - mean_y;
            var_x += dx * dx;
            var_y += dy * dy;
            cov += dx * dy;
        }
        Self {
            mean_x,
            mean_y,
            var_x: var_x / n,
            var_y: var_y / n,
            cov: cov / n,
        }
    }
}

/// Spearman-type prefix statistic normalized by full-sample ranks,
/// `k = 1 ..= n`.
///
/// With `R(.)` the full-sample mid-ranks, the value at `k` is the prefix mean
///
/// ```text
/// s_k = 12 / (k n^2) * sum_{i<=k} R(x_i) R(y_i) - 3 - 12/n
/// ```
///
/// The normalization deliberately uses the global `n`, so early prefix values
/// may leave `[-1, 1]`; at `k = n` this is the full-sample statistic whose
/// small-sample bias term `-12/n` is inherent to the definition.
pub fn spearman_s_path(series: &BivariateSeries) -> Result<CorrelationPath> {
    let n = series.len();
    let nf = n as f64;
    let rx = midranks(series.xs());
    let ry = midranks(series.ys());
    let mut values = Vec::with_capacity(n);
    let mut sum = 0.0f64;
    for k in 1..=n {
        sum += rx[k - 1] * ry[k - 1];
        values.push(12.0 / (k as f64 * nf * nf) * sum - 3.0 - 12.0 / nf);
    }
    Ok(CorrelationPath {
        statistic: Statistic::SpearmanS,
        k_min: 1,
        values,
    })
}

/// Classical Spearman rank correlation with mid-ranks:
/// `12 / ((n-1) n (n+1)) * sum R(x_i) R(y_i) - 3 (n+1) / (n-1)`.
pub fn spearman_r(series: &BivariateSeries) -> Result<f64> {
    require_len(series, 2, "Spearman rank correlation")?;
    Ok(spearman_r_of(series.xs(), series.ys()))
}

fn spearman_r_of(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let rx = midranks(xs);
    let ry = midranks(ys);
    let sum: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
    12.0 / ((n - 1.0) * n * (n + 1.0)) * sum - 3.0 * (n + 1.0) / (n - 1.0)
}

/// [`spearman_r`] of every prefix, `k = 2 ..= n`.
///
/// Utility only: prefix ranks are recomputed per prefix (`O(n^2 log n)`), and
/// no change-test calibration is provided for this path.
pub fn spearman_r_path(series: &BivariateSeries) -> Result<CorrelationPath> {
    require_len(series, 2, "the Spearman prefix path")?;
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    let values = (2..=n)
        .map(|k| spearman_r_of(&xs[..k], &ys[..k]))
        .collect();
    Ok(CorrelationPath {
        statistic: Statistic::SpearmanR,
        k_min: 2,
        values,
    })
}
