//! ROUGE-L F1 over normalized word tokens.

use std::collections::HashMap;

use crate::scalar::Scalar;

/// Lowercases, splits on Unicode whitespace, strips leading and trailing
/// non-alphanumeric characters, and drops tokens left empty.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Length of the longest common subsequence, O(|a|·|b|) time, O(|b|) space.
pub fn lcs_len<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// F1 of LCS precision (over the candidate) and recall (over the reference).
pub fn rouge_l_tokens<T: Scalar, S: PartialEq>(candidate: &[S], reference: &[S]) -> T {
    if candidate.is_empty() || reference.is_empty() {
        return T::zero();
    }
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return T::zero();
    }
    let lcs = T::from_count(lcs);
    let p = lcs / T::from_count(candidate.len());
    let r = lcs / T::from_count(reference.len());
    T::lit(2.0) * p * r / (p + r)
}

pub fn rouge_l<T: Scalar>(candidate: &str, reference: &str) -> T {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    // intern to integer ids so the DP compares words cheaply
    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let mut ids = Vec::with_capacity(c.len() + r.len());
    for t in c.iter().chain(&r) {
        let next = vocab.len() as u32;
        ids.push(*vocab.entry(t.as_str()).or_insert(next));
    }
    let (ci, ri) = ids.split_at(c.len());
    rouge_l_tokens(ci, ri)
}
