//! Spearman (average ranks for ties) and Kendall tau-b rank correlation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::average_ranks;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankCorrelation {
    Spearman,
    Kendall,
}

pub fn rank_correlation<T: Scalar>(x: &[T], y: &[T], kind: RankCorrelation) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Undefined("rank correlation needs at least 2 observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Undefined("rank correlation of NaN input".into()));
    }
    match kind {
        RankCorrelation::Spearman => spearman(x, y),
        RankCorrelation::Kendall => kendall_tau_b(x, y),
    }
}

fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let n = T::from_count(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let mut sab = T::zero();
    let mut saa = T::zero();
    let mut sbb = T::zero();
    for (&u, &v) in a.iter().zip(b) {
        let du = u - ma;
        let dv = v - mb;
        sab = sab + du * dv;
        saa = saa + du * du;
        sbb = sbb + dv * dv;
    }
    if saa == T::zero() || sbb == T::zero() {
        return Err(Error::Undefined("constant input has no rank correlation".into()));
    }
    Ok(sab / (saa * sbb).sqrt())
}

pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    pearson(&average_ranks(x), &average_ranks(y))
}

fn cmp<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Sum over tie groups of `t(t-1)/2` in an already sorted sequence.
fn tied_pairs<T: Scalar>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut last: Option<T> = None;
    for v in sorted {
        if last == Some(v) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        last = Some(v);
    }
    total + run * (run + 1) / 2
}

/// Knight's O(n log n) tau-b: sort by (x, y), count discordant pairs as merge
/// sort exchanges on y.
pub fn kendall_tau_b<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    let n = x.len() as u64;
    let total_pairs = n * (n - 1) / 2;

    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| cmp(x[i], x[j]).then(cmp(y[i], y[j])));

    let x_ties = tied_pairs(idx.iter().map(|&i| x[i]));
    // pairs tied in both x and y
    let mut joint_ties = 0u64;
    let mut run = 0u64;
    for w in idx.windows(2) {
        if x[w[0]] == x[w[1]] && y[w[0]] == y[w[1]] {
            run += 1;
        } else {
            joint_ties += run * (run + 1) / 2;
            run = 0;
        }
    }
    joint_ties += run * (run + 1) / 2;

    let mut ys: Vec<T> = idx.iter().map(|&i| y[i]).collect();
    let swaps = merge_count(&mut ys);
    let y_ties = tied_pairs(ys.iter().copied());

    let nx = total_pairs - x_ties;
    let ny = total_pairs - y_ties;
    if nx == 0 || ny == 0 {
        return Err(Error::Undefined("constant input has no rank correlation".into()));
    }
    // pairs untied in both: concordant + discordant
    let untied = total_pairs + joint_ties - x_ties - y_ties;
    let discordant = swaps;
    let concordant = untied - discordant;
    let num = T::from_f64(concordant as f64 - discordant as f64).unwrap_or_else(T::zero);
    let den = (T::from_count(nx as usize) * T::from_count(ny as usize)).sqrt();
    Ok(num / den)
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count<T: Scalar>(v: &mut [T]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid]) + merge_count(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    swaps
}

/// Rank correlation between the coordinates of two embedding vectors.
pub fn embedding_semantic_overlap<T: Scalar>(generated: &[T], reference: &[T], kind: RankCorrelation) -> Result<T> {
    if generated.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: generated.len(),
        });
    }
    rank_correlation(generated, reference, kind)
}
