use serde::Serialize;

use super::normalize::{prepare, tokenize, TextOptions};
use super::{MetricError, Result};
use crate::task::Lang;

/// Longest common subsequence length over tokens.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RougeScore {
    pub lcs: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Token-level ROUGE-L: precision against the hypothesis length, recall
/// against the reference length.
pub fn rouge_l(reference: &str, hypothesis: &str, lang: Lang) -> Result<RougeScore> {
    rouge_l_with(reference, hypothesis, lang, TextOptions::default())
}

pub fn rouge_l_with(
    reference: &str,
    hypothesis: &str,
    lang: Lang,
    opts: TextOptions,
) -> Result<RougeScore> {
    let r = prepare(reference, lang, opts);
    let h = prepare(hypothesis, lang, opts);
    let (rt, ht) = (tokenize(&r), tokenize(&h));
    if rt.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    if ht.is_empty() {
        return Err(MetricError::EmptyHypothesis);
    }
    let lcs = lcs_len(&rt, &ht);
    let precision = lcs as f64 / ht.len() as f64;
    let recall = lcs as f64 / rt.len() as f64;
    let f1 = if lcs == 0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(RougeScore {
        lcs,
        precision,
        recall,
        f1,
    })
}
