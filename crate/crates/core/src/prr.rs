//! Prediction Rejection Ratio.
//!
//! Quality scores are min-max normalized and turned into a risk vector
//! `r = 1 - ŝ`. A ranking of the samples reorders the risk, and the PR value of
//! that ranking is the mean of the running (cumulative) risk sums. PRR compares
//! the PR of an uncertainty ranking with the PR of the oracle ranking (negated
//! quality) and the mean PR of random rankings:
//!
//! ```text
//! PRR = (PR_unc - PR_rand) / (PR_oracle - PR_rand)
//! ```
//!
//! Smaller PR is better, so the denominator is negative for non-constant risk
//! and PRR = 1 for an oracle-quality ranking, 0 for a random one.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{minmax_normalize, rank_ascending};
use crate::scalar::Scalar;
use crate::score::{ScoreKind, ScoreVector};

/// Number of random permutations averaged for the random baseline.
pub const DEFAULT_ALPHA: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;
/// `|PR_oracle - PR_random|` at or below this is treated as a zero denominator.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// How the random-ranking baseline is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomBaseline {
    /// Mean PR over `alpha` uniformly random permutations.
    ///
    /// Trial `i` shuffles with a ChaCha8 generator seeded from `seed` and set
    /// to stream `i`, so the result does not depend on evaluation order.
    MonteCarlo { alpha: usize, seed: u64 },
    /// Exact expectation over all permutations: `(N+1)/(2N) · Σ risk`.
    Expected,
}

impl Default for RandomBaseline {
    fn default() -> Self {
        RandomBaseline::MonteCarlo {
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrrResult<T> {
    pub prr: T,
    pub pr_uncertainty: T,
    pub pr_oracle: T,
    pub pr_random_mean: T,
    pub baseline: RandomBaseline,
    /// Set when the oracle and random PR coincide; `prr` is then 0.
    pub degenerate: bool,
}

/// `1 - minmax(quality)`.
pub fn risk_from_quality<T: Scalar>(quality: &[T]) -> Result<Vec<T>> {
    if quality.is_empty() {
        return Err(Error::Empty("quality scores"));
    }
    Ok(minmax_normalize(quality)
        .into_iter()
        .map(|s| T::one() - s)
        .collect())
}

pub fn risk_from_nlg<T: Scalar>(nlg: &ScoreVector<T>) -> Result<Vec<T>> {
    if !nlg.higher_is_better {
        return Err(Error::OutOfRange(format!(
            "{}: risk needs a higher-is-better quality score",
            nlg.name
        )));
    }
    risk_from_quality(&nlg.values)
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: order.len(),
        });
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::OutOfRange(format!("order is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Mean of the cumulative risk sums after reordering `risk` by `order`.
pub fn pr_value<T: Scalar>(risk: &[T], order: &[usize]) -> Result<T> {
    check_permutation(order, risk.len())?;
    Ok(pr_value_unchecked(risk, order))
}

fn pr_value_unchecked<T: Scalar>(risk: &[T], order: &[usize]) -> T {
    if risk.is_empty() {
        return T::zero();
    }
    let mut running = T::zero();
    let mut total = T::zero();
    for &i in order {
        running = running + risk[i];
        total = total + running;
    }
    total / T::from_count(risk.len())
}

/// PR of the oracle ranking, i.e. ascending order of `-quality`.
pub fn pr_oracle_of<T: Scalar>(quality: &[T], risk: &[T]) -> T {
    let negated: Vec<T> = quality.iter().map(|&q| -q).collect();
    pr_value_unchecked(risk, &rank_ascending(&negated))
}

pub fn pr_oracle<T: Scalar>(nlg: &ScoreVector<T>) -> Result<T> {
    let risk = risk_from_nlg(nlg)?;
    Ok(pr_oracle_of(&nlg.values, &risk))
}

/// Closed-form expectation of PR under a uniformly random permutation.
pub fn pr_random_expected<T: Scalar>(risk: &[T]) -> T {
    if risk.is_empty() {
        return T::zero();
    }
    let n = T::from_count(risk.len());
    let total: T = risk.iter().copied().sum();
    (n + T::one()) / (T::lit(2.0) * n) * total
}

/// Monte-Carlo mean PR over `alpha` random permutations of `risk`.
pub fn pr_random_mean_of_risk<T: Scalar>(risk: &[T], alpha: usize, seed: u64) -> Result<T> {
    if alpha == 0 {
        return Err(Error::OutOfRange("alpha must be >= 1".into()));
    }
    let n = risk.len();
    let trials: Vec<T> = (0..alpha)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            pr_value_unchecked(risk, &order)
        })
        .collect();
    // fixed left-to-right reduction keeps the sum schedule-independent
    let sum = trials.into_iter().fold(T::zero(), |acc, v| acc + v);
    Ok(sum / T::from_count(alpha))
}

pub fn pr_random_mean<T: Scalar>(nlg: &ScoreVector<T>, alpha: usize, seed: u64) -> Result<T> {
    let risk = risk_from_nlg(nlg)?;
    pr_random_mean_of_risk(&risk, alpha, seed)
}

fn random_baseline_value<T: Scalar>(risk: &[T], baseline: RandomBaseline) -> Result<T> {
    match baseline {
        RandomBaseline::MonteCarlo { alpha, seed } => pr_random_mean_of_risk(risk, alpha, seed),
        RandomBaseline::Expected => Ok(pr_random_expected(risk)),
    }
}

/// Everything PRR needs from the quality side: the risk vector and the oracle
/// and random PR values. Shared across all uncertainty methods scored against
/// the same quality vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReference<T> {
    pub risk: Vec<T>,
    pub pr_oracle: T,
    pub pr_random_mean: T,
    pub baseline: RandomBaseline,
}

impl<T: Scalar> QualityReference<T> {
    pub fn new(quality: &[T], baseline: RandomBaseline) -> Result<Self> {
        let risk = risk_from_quality(quality)?;
        let pr_oracle = pr_oracle_of(quality, &risk);
        let pr_random_mean = random_baseline_value(&risk, baseline)?;
        Ok(Self {
            risk,
            pr_oracle,
            pr_random_mean,
            baseline,
        })
    }

    pub fn evaluate(&self, uncertainty: &[T]) -> Result<PrrResult<T>> {
        if uncertainty.len() != self.risk.len() {
            return Err(Error::LengthMismatch {
                expected: self.risk.len(),
                actual: uncertainty.len(),
            });
        }
        let pr_uncertainty = pr_value_unchecked(&self.risk, &rank_ascending(uncertainty));
        let denom = self.pr_oracle - self.pr_random_mean;
        let degenerate = denom.abs() <= T::lit(DEGENERATE_TOL);
        let prr = if degenerate {
            T::zero()
        } else {
            (pr_uncertainty - self.pr_random_mean) / denom
        };
        Ok(PrrResult {
            prr,
            pr_uncertainty,
            pr_oracle: self.pr_oracle,
            pr_random_mean: self.pr_random_mean,
            baseline: self.baseline,
            degenerate,
        })
    }
}

/// PRR from raw vectors: `uncertainty` is lower-is-more-confident, `quality`
/// higher-is-better, both over the same samples.
pub fn prr_values<T: Scalar>(uncertainty: &[T], quality: &[T], baseline: RandomBaseline) -> Result<PrrResult<T>> {
    if uncertainty.len() != quality.len() {
        return Err(Error::LengthMismatch {
            expected: quality.len(),
            actual: uncertainty.len(),
        });
    }
    QualityReference::new(quality, baseline)?.evaluate(uncertainty)
}

pub fn prr<T: Scalar>(
    uncertainty: &ScoreVector<T>,
    nlg: &ScoreVector<T>,
    baseline: RandomBaseline,
) -> Result<PrrResult<T>> {
    uncertainty.ensure_aligned(nlg)?;
    if uncertainty.higher_is_better {
        return Err(Error::OutOfRange(format!(
            "{}: uncertainty role needs a lower-is-more-confident score",
            uncertainty.name
        )));
    }
    if !nlg.higher_is_better {
        return Err(Error::OutOfRange(format!(
            "{}: quality role needs a higher-is-better score",
            nlg.name
        )));
    }
    debug_assert!(matches!(uncertainty.kind, ScoreKind::Uncertainty));
    prr_values(&uncertainty.values, &nlg.values, baseline)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2_NORMALIZED: [f64; 4] = [0.0, 0.56, 0.47, 1.0];

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn nlg(values: &[f64]) -> ScoreVector<f64> {
        ScoreVector::new("nlg", ScoreKind::Nlg, ids(values.len()), values.to_vec()).unwrap()
    }

    fn unc(values: &[f64]) -> ScoreVector<f64> {
        ScoreVector::new("ue", ScoreKind::Uncertainty, ids(values.len()), values.to_vec()).unwrap()
    }

    #[test]
    fn fig2_risk() {
        let risk = risk_from_nlg(&nlg(&FIG2_NORMALIZED)).unwrap();
        for (r, e) in risk.iter().zip([1.0, 0.44, 0.53, 0.0]) {
            assert!((r - e).abs() <= 1e-12);
        }
        assert_eq!(risk_from_quality(&[0.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(risk_from_quality(&[3.0, 3.0]).unwrap(), vec![0.5, 0.5]);
        assert!(risk_from_quality::<f64>(&[]).is_err());
    }

    #[test]
    fn pr_value_fig2_orders() {
        let risk = [1.0f64, 0.44, 0.53, 0.0];
        // cumulative sums 0, 0.44, 0.97, 1.97
        let best = pr_value(&risk, &[3, 1, 2, 0]).unwrap();
        assert!((best - (0.0 + 0.44 + 0.97 + 1.97) / 4.0).abs() <= 1e-12);
        // cumulative sums 1, 1.53, 1.97, 1.97
        let worst = pr_value(&risk, &[0, 2, 1, 3]).unwrap();
        assert!((worst - 1.6175).abs() <= 1e-12);
        assert_eq!(pr_value(&[0.0; 3], &[2, 0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn pr_value_rejects_bad_order() {
        assert!(matches!(pr_value(&[0.1, 0.2], &[0]), Err(Error::LengthMismatch { .. })));
        assert!(pr_value(&[0.1, 0.2], &[0, 0]).is_err());
        assert!(pr_value(&[0.1, 0.2], &[0, 2]).is_err());
    }

    #[test]
    fn oracle_single_sample_and_permutation_invariance() {
        assert_eq!(pr_oracle(&nlg(&[0.3])).unwrap(), 0.5);
        let a = pr_oracle(&nlg(&[0.1, 0.9, 0.4, 0.7])).unwrap();
        let b = pr_oracle(&nlg(&[0.7, 0.4, 0.9, 0.1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_expected_fig2() {
        let risk = [1.0f64, 0.44, 0.53, 0.0];
        assert!((pr_random_expected(&risk) - 1.23125).abs() <= 1e-12);
        let mc = pr_random_mean_of_risk(&risk, 1000, 42).unwrap();
        assert!((mc - 1.23125).abs() <= 0.03, "{mc}");
        assert_eq!(pr_random_mean_of_risk(&[0.0; 5], 10, 1).unwrap(), 0.0);
        assert!(pr_random_mean_of_risk(&risk, 0, 1).is_err());
    }

    #[test]
    fn random_mean_reproducible() {
        let risk = [0.2f64, 0.9, 0.1, 0.5, 0.3];
        let a = pr_random_mean_of_risk(&risk, 500, 7).unwrap();
        let b = pr_random_mean_of_risk(&risk, 500, 7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn oracle_impersonation_gives_one() {
        let s = nlg(&FIG2_NORMALIZED);
        let u = s.negated("oracle", ScoreKind::Uncertainty);
        let r = prr(&u, &s, RandomBaseline::default()).unwrap();
        assert_eq!(r.prr, 1.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn anti_oracle_is_minus_one_against_expected_baseline() {
        // worst PR and oracle PR sit symmetrically around the expectation
        let s = nlg(&FIG2_NORMALIZED);
        let u = unc(&FIG2_NORMALIZED);
        let r = prr(&u, &s, RandomBaseline::Expected).unwrap();
        assert!((r.pr_uncertainty - 1.6175).abs() <= 1e-12);
        assert!((r.prr - (1.6175 - 1.23125) / (0.845 - 1.23125)).abs() <= 1e-12);
        assert!((r.prr + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_quality_is_degenerate() {
        let r = prr(&unc(&[0.1, 0.5, 0.3]), &nlg(&[2.0, 2.0, 2.0]), RandomBaseline::default()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.prr, 0.0);
    }

    #[test]
    fn misaligned_ids_error() {
        let mut u = unc(&[0.1, 0.2]);
        u.ids[1] = "other".into();
        assert!(matches!(
            prr(&u, &nlg(&[0.3, 0.4]), RandomBaseline::Expected),
            Err(Error::Misaligned { .. })
        ));
    }

    #[test]
    fn works_in_f32() {
        let q = [0.0_f32, 0.56, 0.47, 1.0];
        let u: Vec<f32> = q.iter().map(|v| -v).collect();
        let r = prr_values(&u, &q, RandomBaseline::Expected).unwrap();
        assert_eq!(r.prr, 1.0);
    }
}
