//! Rank assignment and a Fenwick tree for order-statistics counting.
//!
//! These helpers back the `O(n log n)` concordance and empirical-CDF
//! algorithms. All counting is done in exact integer arithmetic so that fast
//! and brute-force implementations agree bit for bit after the final
//! division.

/// Indices `0..n` sorted by the corresponding value, ties by index.
///
/// Values must be finite (guaranteed by `BivariateSeries`); `total_cmp` keeps
/// the comparator total regardless.
pub(crate) fn sort_indices(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// Dense ranks: equal values share a rank, ranks run `0..distinct`.
///
/// Returns the rank vector and the number of distinct values.
pub(crate) fn dense_ranks(values: &[f64]) -> (Vec<usize>, usize) {
    let idx = sort_indices(values);
    let mut ranks = vec![0usize; values.len()];
    let mut rank = 0usize;
    for (pos, &i) in idx.iter().enumerate() {
        if pos > 0 && values[idx[pos - 1]] < values[i] {
            rank += 1;
        }
        ranks[i] = rank;
    }
    let distinct = if values.is_empty() { 0 } else { rank + 1 };
    (ranks, distinct)
}

/// Mid-ranks (1-based): tied values receive the average of the positions
/// they occupy, so e.g. `(10, 20, 20)` ranks as `(1, 2.5, 2.5)`.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let idx = sort_indices(values);
    let n = values.len();
    let mut ranks = vec![0.0f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // Positions start+1 ..= end averaged: (start + 1 + end) / 2.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Fenwick (binary indexed) tree over `0..n` holding integer counts.
pub(crate) struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    /// Adds one to position `i` (0-based).
    pub(crate) fn add(&mut self, i: usize) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += 1;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum of counts at positions `< bound` (0-based exclusive bound).
    pub(crate) fn prefix(&self, bound: usize) -> u64 {
        let mut j = bound.min(self.tree.len() - 1);
        let mut sum = 0;
        while j > 0 {
            sum += self.tree[j];
            j &= j - 1;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_ranks_handle_ties() {
        let (ranks, distinct) = dense_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(ranks, vec![2, 0, 2, 1]);
        assert_eq!(distinct, 3);
    }

    #[test]
    fn midranks_average_tie_positions() {
        assert_eq!(midranks(&[10.0, 20.0, 20.0]), vec![1.0, 2.5, 2.5]);
        assert_eq!(midranks(&[5.0, 5.0]), vec![1.5, 1.5]);
        assert_eq!(midranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn fenwick_counts_prefixes() {
        let mut f = Fenwick::new(5);
        f.add(0);
        f.add(3);
        f.add(3);
        assert_eq!(f.prefix(0), 0);
        assert_eq!(f.prefix(1), 1);
        assert_eq!(f.prefix(3), 1);
        assert_eq!(f.prefix(4), 3);
        assert_eq!(f.prefix(5), 3);
    }
}
