//! Normalization and ranking shared by the evaluation kernels.

use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Min-max normalization to `[0, 1]`.
///
/// A constant vector maps to all `0.5` (every sample carries equal risk), and
/// a warning is logged.
pub fn minmax_normalize<T: Scalar>(values: &[T]) -> Vec<T> {
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let (min, max) = values
        .iter()
        .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max > min {
        let span = max - min;
        values.iter().map(|&v| (v - min) / span).collect()
    } else {
        log::warn!("constant score vector of length {}; normalizing to 0.5", values.len());
        vec![T::lit(0.5); values.len()]
    }
}

/// Indices ordered by ascending score; ties keep their original index order.
pub fn rank_ascending<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // sort_by is stable, so equal scores stay in index order
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    order
}

/// Fractional (1-based) ranks with ties assigned their average rank.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let order = rank_ascending(values);
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold 1-based ranks start+1..=end
        let avg = T::from_count(start + 1 + end) / T::lit(2.0);
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}
