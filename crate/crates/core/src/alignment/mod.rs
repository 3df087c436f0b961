//! Word-level alignment and WER decomposition.

mod scoring;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use scoring::{
    model_correlation, model_correlation_by, model_names, oracle_aggregate, oracle_select,
    score_dataset, score_models, utterance_result, CorrelationMatrix, ErrorAggregate,
    ErrorCounts,
};

/// Lowercases, strips punctuation (apostrophes survive only between two
/// alphanumerics, as in "don't") and splits on whitespace.
pub fn normalize_text(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in raw.split_whitespace() {
        let chars: Vec<char> = chunk
            .chars()
            .map(|c| if c == '\u{2019}' { '\'' } else { c })
            .collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if c.is_alphanumeric() {
                current.extend(c.to_lowercase());
            } else if c == '\''
                && i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric()
            {
                current.push('\'');
            } else if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Substitution, deletion and insertion counts for one reference/hypothesis pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub substitutions: u32,
    pub deletions: u32,
    pub insertions: u32,
    pub ref_len: u32,
    /// (S + D + I) / N as a fraction; may exceed 1.
    pub wer: f64,
}

impl AlignmentResult {
    pub fn errors(&self) -> u32 {
        self.substitutions + self.deletions + self.insertions
    }
}

/// Minimum unit-cost edit counts `(S, D, I)`. Among alignments of equal
/// total cost the one with fewer substitutions wins, then fewer deletions.
pub fn edit_counts<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> (u32, u32, u32) {
    // (total, subs, dels); lexicographic order on additive cost vectors is
    // preserved under addition, so the DP stays exact.
    type Cost = (u32, u32, u32);
    let n = reference.len();
    let m = hypothesis.len();
    let mut prev: Vec<Cost> = (0..=m as u32).map(|j| (j, 0, 0)).collect();
    let mut cur: Vec<Cost> = vec![(0, 0, 0); m + 1];
    for i in 1..=n {
        cur[0] = (i as u32, 0, i as u32);
        for j in 1..=m {
            let (t, s, d) = prev[j - 1];
            let diag = if reference[i - 1] == hypothesis[j - 1] {
                (t, s, d)
            } else {
                (t + 1, s + 1, d)
            };
            let (t, s, d) = prev[j];
            let del = (t + 1, s, d + 1);
            let (t, s, d) = cur[j - 1];
            let ins = (t + 1, s, d);
            cur[j] = diag.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let (total, s, d) = prev[m];
    (s, d, total - s - d)
}

/// Aligns token sequences. An empty reference has no defined WER.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<AlignmentResult> {
    if reference.is_empty() {
        return Err(Error::EmptyRef(String::new()));
    }
    let (s, d, i) = edit_counts(reference, hypothesis);
    let n = reference.len() as u32;
    Ok(AlignmentResult {
        substitutions: s,
        deletions: d,
        insertions: i,
        ref_len: n,
        wer: (s + d + i) as f64 / n as f64,
    })
}

/// Normalizes both texts, then aligns.
pub fn align_text(reference: &str, hypothesis: &str) -> Result<AlignmentResult> {
    align(&normalize_text(reference), &normalize_text(hypothesis))
}
