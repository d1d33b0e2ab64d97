//! Ensemble total uncertainty and reverse mutual information, at token and
//! sequence level.

use crate::error::{Error, Result};
use crate::record::{EnsembleBlock, GenerationRecord};
use crate::scalar::{floored_ln, log_mean_exp, prob_floor, Scalar};

use super::information::categorical_entropy;

/// Equal-weight mixture of member distributions. A category on which every
/// member agrees keeps that exact probability.
pub fn mixture<T: Scalar>(members: &[Vec<T>]) -> Vec<T> {
    let width = members.first().map_or(0, Vec::len);
    let m = T::from_count(members.len());
    (0..width)
        .map(|k| {
            let first = members[0][k];
            if members.iter().all(|p| p[k] == first) {
                first
            } else {
                members.iter().map(|p| p[k]).sum::<T>() / m
            }
        })
        .collect()
}

/// `H(P̄)` for one position.
pub fn mixture_entropy<T: Scalar>(members: &[Vec<T>]) -> T {
    categorical_entropy(&mixture(members))
}

/// `(1/M) Σ_m KL(P̄ ‖ P_m)` for one position, with member probabilities floored.
pub fn mean_reverse_kl<T: Scalar>(members: &[Vec<T>]) -> T {
    let avg = mixture(members);
    let total: T = members
        .iter()
        .map(|p| {
            avg.iter()
                .zip(p)
                .filter(|(&a, _)| a > T::zero())
                .map(|(&a, &q)| a * (floored_ln(a) - floored_ln(q)))
                .sum::<T>()
        })
        .sum();
    total / T::from_count(members.len())
}

fn positions<T: Scalar>(ensemble: &EnsembleBlock) -> Result<Vec<Vec<Vec<T>>>> {
    if ensemble.token_distributions.is_empty() {
        return Err(Error::MissingInput("ensemble has no token positions".into()));
    }
    Ok(ensemble
        .token_distributions
        .iter()
        .map(|pos| {
            pos.member_probs
                .iter()
                .map(|probs| probs.iter().map(|&p| T::lit(p)).collect())
                .collect()
        })
        .collect())
}

fn mean_over_positions<T: Scalar>(ensemble: &EnsembleBlock, f: impl Fn(&[Vec<T>]) -> T) -> Result<T> {
    let positions = positions::<T>(ensemble)?;
    let total: T = positions.iter().map(|p| f(p)).sum();
    Ok(total / T::from_count(positions.len()))
}

/// T-TU: mean over positions of the entropy of the averaged member distribution.
pub fn token_total_uncertainty<T: Scalar>(ensemble: &EnsembleBlock) -> Result<T> {
    mean_over_positions(ensemble, mixture_entropy)
}

/// T-RMI: mean over positions of the average reverse KL from the mixture to
/// each member.
pub fn token_rmi<T: Scalar>(ensemble: &EnsembleBlock) -> Result<T> {
    mean_over_positions(ensemble, mean_reverse_kl)
}

/// Per-sample `(token count, member sequence log-probs)`, each member value
/// raised to at least `L · ln(1e-12)`.
fn sequence_terms<T: Scalar>(record: &GenerationRecord) -> Result<Vec<(T, Vec<T>)>> {
    if record.samples.is_empty() {
        return Err(Error::MissingInput("sequence-level ensemble scores require samples".into()));
    }
    record
        .samples
        .iter()
        .enumerate()
        .map(|(i, sample)| {
            let members = sample
                .ensemble_seq_logprobs
                .as_deref()
                .filter(|m| !m.is_empty())
                .ok_or_else(|| Error::MissingInput(format!("sample {i} lacks ensemble_seq_logprobs")))?;
            if sample.token_logprobs.is_empty() {
                return Err(Error::MissingInput(format!("sample {i} has no token log-probabilities")));
            }
            let len = T::from_count(sample.token_logprobs.len());
            let floor = len * prob_floor::<T>().ln();
            let logps = members
                .iter()
                .map(|&lp| {
                    let lp = T::lit(lp);
                    if lp.is_nan() || lp < floor {
                        floor
                    } else {
                        lp
                    }
                })
                .collect();
            Ok((len, logps))
        })
        .collect()
}

/// S-TU: `-(1/S) Σ_s (1/L_s) log P̄(y_s)` with `P̄` the member mean.
pub fn seq_total_uncertainty<T: Scalar>(record: &GenerationRecord) -> Result<T> {
    let terms = sequence_terms::<T>(record)?;
    let total: T = terms.iter().map(|(len, lps)| -log_mean_exp(lps) / *len).sum();
    Ok(total / T::from_count(terms.len()))
}

/// S-RMI: Monte-Carlo reverse-KL estimate over the sampled sequences,
/// `(1/S) Σ_s (1/L_s) (1/M) Σ_m [log P̄(y_s) - log P_m(y_s)]`.
pub fn seq_rmi<T: Scalar>(record: &GenerationRecord) -> Result<T> {
    let terms = sequence_terms::<T>(record)?;
    let total: T = terms
        .iter()
        .map(|(len, lps)| {
            let lme = log_mean_exp(lps);
            let gap: T = lps.iter().map(|&lp| lme - lp).sum();
            gap / T::from_count(lps.len()) / *len
        })
        .sum();
    Ok(total / T::from_count(terms.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{PositionDistributions, SampledGeneration};

    fn block(positions: Vec<Vec<Vec<f64>>>) -> EnsembleBlock {
        EnsembleBlock {
            member_count: positions[0].len(),
            token_distributions: positions
                .into_iter()
                .map(|members| PositionDistributions {
                    token_ids: (0..members[0].len() as u32 - 1).collect(),
                    member_probs: members,
                })
                .collect(),
        }
    }

    fn seq_record(samples: Vec<(usize, Vec<f64>)>) -> GenerationRecord {
        GenerationRecord {
            id: "r".into(),
            input_text: String::new(),
            reference_summary: None,
            greedy_text: String::new(),
            greedy_token_logprobs: vec![-0.1],
            greedy_token_entropies: None,
            samples: samples
                .into_iter()
                .map(|(len, members)| SampledGeneration {
                    text: String::new(),
                    token_logprobs: vec![-0.1; len],
                    ensemble_seq_logprobs: Some(members),
                })
                .collect(),
            embedding: None,
            ensemble: None,
        }
    }

    #[test]
    fn identical_members_give_member_entropy_and_zero_rmi() {
        let q = vec![0.2, 0.3, 0.5];
        let b = block(vec![vec![q.clone(), q.clone(), q.clone()]; 2]);
        let h = categorical_entropy(&q);
        assert!((token_total_uncertainty::<f64>(&b).unwrap() - h).abs() < 1e-15);
        assert_eq!(token_rmi::<f64>(&b).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_one_hots_give_ln2() {
        let b = block(vec![vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]]);
        assert!((token_total_uncertainty::<f64>(&b).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identical_one_hots_give_zero() {
        let b = block(vec![vec![vec![0.0, 1.0], vec![0.0, 1.0]]]);
        assert_eq!(token_total_uncertainty::<f64>(&b).unwrap(), 0.0);
    }

    #[test]
    fn rmi_of_mirrored_pair() {
        let b = block(vec![vec![vec![0.9, 0.1], vec![0.1, 0.9]]]);
        let term = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert!((token_rmi::<f64>(&b).unwrap() - term).abs() < 1e-12);
    }

    #[test]
    fn seq_total_uncertainty_examples() {
        assert_eq!(seq_total_uncertainty::<f64>(&seq_record(vec![(1, vec![0.0])])).unwrap(), 0.0);
        assert!((seq_total_uncertainty::<f64>(&seq_record(vec![(1, vec![-1.0, -1.0])])).unwrap() - 1.0).abs() < 1e-15);
        let floored = seq_total_uncertainty::<f64>(&seq_record(vec![(1, vec![0.0, f64::NEG_INFINITY])])).unwrap();
        assert!((floored - 2f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn seq_rmi_examples() {
        assert_eq!(seq_rmi::<f64>(&seq_record(vec![(3, vec![-2.0, -2.0]), (1, vec![-0.5, -0.5])])).unwrap(), 0.0);
        // log-mean-exp(-1, -3) = ln((e^-1 + e^-3)/2) ≈ -1.566219; minus the member mean -2
        let expected = (0.5 * ((-1.0f64).exp() + (-3.0f64).exp())).ln() + 2.0;
        let got = seq_rmi::<f64>(&seq_record(vec![(1, vec![-1.0, -3.0])])).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.433781).abs() < 1e-6);
    }

    #[test]
    fn missing_member_logprobs_error() {
        let mut r = seq_record(vec![(1, vec![-1.0])]);
        r.samples[0].ensemble_seq_logprobs = None;
        assert!(seq_total_uncertainty::<f64>(&r).is_err());
        assert!(seq_rmi::<f64>(&r).is_err());
    }
}
