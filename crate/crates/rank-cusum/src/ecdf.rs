//! Empirical distribution functions evaluated at the sample points, and the
//! influence values driving the Kendall change test's variance estimate.
//!
//! The joint ECDF at all sample points is computed in `O(n log n)` by
//! dominance counting (sort by x, Fenwick tree over y-ranks), with an exact
//! `O(n^2)` oracle alongside. Counts stay in integer arithmetic until the
//! final division, so both routes return bit-identical values.

use crate::error::Result;
use crate::rank::{dense_ranks, sort_indices, Fenwick};
use crate::series::BivariateSeries;

/// Joint ECDF `F_n(X_i, Y_i) = #{j : X_j <= X_i, Y_j <= Y_i} / n` for every
/// sample point, in original index order.
///
/// Points are inserted into a Fenwick tree over dense y-ranks one x-tie group
/// at a time; each group is inserted before it is queried, so points sharing
/// an x value count each other exactly when the y-coordinate is dominated.
pub fn joint_ecdf_at_sample(series: &BivariateSeries) -> Vec<f64> {
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    let order = sort_indices(xs);
    let (yrank, y_distinct) = dense_ranks(ys);

    let mut fen = Fenwick::new(y_distinct);
    let mut counts = vec![0u64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            fen.add(yrank[i]);
        }
        for &i in &order[start..end] {
            counts[i] = fen.prefix(yrank[i] + 1);
        }
        start = end;
    }
    counts.into_iter().map(|c| c as f64 / n as f64).collect()
}

/// Brute-force `O(n^2)` oracle for [`joint_ecdf_at_sample`].
pub fn joint_ecdf_at_sample_naive(series: &BivariateSeries) -> Vec<f64> {
    let n = series.len();
    let xs = series.xs();
    let ys = series.ys();
    (0..n)
        .map(|i| {
            let count = (0..n)
                .filter(|&j| xs[j] <= xs[i] && ys[j] <= ys[i])
                .count() as u64;
            count as f64 / n as f64
        })
        .collect()
}

/// Marginal ECDF `#{j : v_j <= v_i} / n` for every entry, in original order.
pub fn marginal_ecdf_at_sample(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    values
        .iter()
        .map(|&v| {
            let count = sorted.partition_point(|&s| s <= v) as u64;
            count as f64 / n as f64
        })
        .collect()
}

/// Estimated influence values for the sample Kendall's tau.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiValues {
    /// One value per observation, in original index order.
    pub values: Vec<f64>,
    /// Whether the sample mean has been subtracted.
    pub demeaned: bool,
    /// The full-sample tau estimate the values are centered around.
    pub tau_hat: f64,
}

/// Influence values `psi_i = 2 F_n(X_i, Y_i) - F_X(X_i) - F_Y(Y_i)
/// + (1 - tau_hat) / 2`, optionally demeaned.
///
/// Their partial sums approximate the fluctuation of the sequential tau
/// estimates, and their long-run variance calibrates the change test.
/// `tau_hat` should be the full-sample Kendall's tau of `series`.
pub fn psi_hat(series: &BivariateSeries, tau_hat: f64, demean: bool) -> Result<PsiValues> {
    let joint = joint_ecdf_at_sample(series);
    let fx = marginal_ecdf_at_sample(series.xs());
    let fy = marginal_ecdf_at_sample(series.ys());
    let shift = 0.5 * (1.0 - tau_hat);
    // The marginals are grouped before subtraction so that exchanging the
    // coordinates reproduces the values bit-for-bit.
    let mut values: Vec<f64> = joint
        .iter()
        .zip(fx.iter().zip(&fy))
        .map(|(&j, (&gx, &gy))| 2.0 * j - (gx + gy) + shift)
        .collect();
    if demean {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &mut values {
            *v -= mean;
        }
    }
    Ok(PsiValues {
        values,
        demeaned: demean,
        tau_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(xs: &[f64], ys: &[f64]) -> BivariateSeries {
        BivariateSeries::new(xs.to_vec(), ys.to_vec()).unwrap()
    }

    #[test]
    fn joint_ecdf_distinct_values() {
        let s = series(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]);
        let f = joint_ecdf_at_sample(&s);
        assert_eq!(f, vec![1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn joint_ecdf_with_ties() {
        let s = series(&[1.0, 1.0, 2.0], &[2.0, 1.0, 1.0]);
        let f = joint_ecdf_at_sample(&s);
        assert_eq!(f, vec![2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn joint_ecdf_fast_matches_naive_bitwise() {
        let xs = [0.3, -1.2, 0.3, 2.4, -0.7, 1.1, 0.0, 0.3, -1.2];
        let ys = [1.0, 0.2, -0.4, 2.2, 2.2, -1.5, 0.8, 0.1, 0.2];
        let s = series(&xs, &ys);
        let fast = joint_ecdf_at_sample(&s);
        let naive = joint_ecdf_at_sample_naive(&s);
        for (a, b) in fast.iter().zip(&naive) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn marginal_ecdf_counts_weak_dominance() {
        let f = marginal_ecdf_at_sample(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(f, vec![1.0, 0.25, 0.75, 0.75]);
    }

    #[test]
    fn psi_demeaned_has_zero_mean() {
        let xs = [0.3, -1.2, 0.3, 2.4, -0.7, 1.1, 0.0];
        let ys = [1.0, 0.2, -0.4, 2.2, 2.2, -1.5, 0.8];
        let s = series(&xs, &ys);
        let tau = crate::corr::kendall_tau(&s).unwrap();
        let psi = psi_hat(&s, tau, true).unwrap();
        let mean: f64 = psi.values.iter().sum::<f64>() / psi.values.len() as f64;
        assert!(mean.abs() < 1e-15);
        assert!(psi.demeaned);
    }

    #[test]
    fn psi_raw_values_are_bounded() {
        let xs = [0.3, -1.2, 0.3, 2.4, -0.7, 1.1, 0.0, 9.0, -4.0];
        let ys = [1.0, 0.2, -0.4, 2.2, 2.2, -1.5, 0.8, -3.0, 5.0];
        let s = series(&xs, &ys);
        let tau = crate::corr::kendall_tau(&s).unwrap();
        let psi = psi_hat(&s, tau, false).unwrap();
        for v in &psi.values {
            assert!(v.abs() <= 3.0, "influence value out of range: {v}");
        }
    }

    #[test]
    fn psi_symmetric_under_coordinate_swap() {
        let xs = [0.3, -1.2, 0.3, 2.4, -0.7, 1.1];
        let ys = [1.0, 0.2, -0.4, 2.2, 2.2, -1.5];
        let s = series(&xs, &ys);
        let tau = crate::corr::kendall_tau(&s).unwrap();
        let a = psi_hat(&s, tau, true).unwrap();
        let b = psi_hat(&s.swapped(), tau, true).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }
}
