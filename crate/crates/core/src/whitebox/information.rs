use crate::error::{Error, Result};
use crate::record::GenerationRecord;
use crate::scalar::{floored_ln, Scalar};

/// Entropy in nats of a categorical distribution.
pub fn categorical_entropy<T: Scalar>(probs: &[T]) -> T {
    probs
        .iter()
        .filter(|&&p| p > T::zero())
        .map(|&p| -p * floored_ln(p))
        .sum()
}

/// Maximum sequence probability, negated: `-Σ log p` over greedy tokens.
pub fn msp<T: Scalar>(record: &GenerationRecord) -> Result<T> {
    if record.greedy_token_logprobs.is_empty() {
        return Err(Error::MissingInput("MSP requires greedy token log-probabilities".into()));
    }
    let total: T = record.greedy_token_logprobs.iter().map(|&lp| T::lit(lp)).sum();
    Ok(-total)
}

/// Mean token entropy of the greedy generation.
pub fn mte<T: Scalar>(record: &GenerationRecord) -> Result<T> {
    let entropies = record
        .greedy_token_entropies
        .as_deref()
        .filter(|e| !e.is_empty())
        .ok_or_else(|| Error::MissingInput("MTE requires token entropies".into()))?;
    let total: T = entropies.iter().map(|&h| T::lit(h)).sum();
    Ok(total / T::from_count(entropies.len()))
}

/// Monte-Carlo sequence entropy: the negated mean total log-probability of the
/// sampled generations, optionally per token.
pub fn mcse<T: Scalar>(record: &GenerationRecord, length_normalize: bool) -> Result<T> {
    if record.samples.is_empty() {
        return Err(Error::MissingInput("MCSE requires sampled generations".into()));
    }
    let mut acc = T::zero();
    for (i, sample) in record.samples.iter().enumerate() {
        if sample.token_logprobs.is_empty() {
            return Err(Error::MissingInput(format!("MCSE: sample {i} has no token log-probabilities")));
        }
        let total: T = sample.token_logprobs.iter().map(|&lp| T::lit(lp)).sum();
        acc = acc
            + if length_normalize {
                total / T::from_count(sample.token_logprobs.len())
            } else {
                total
            };
    }
    Ok(-acc / T::from_count(record.samples.len()))
}
