use serde::Serialize;

use super::normalize::{prepare, tokenize, TextOptions};
use super::{MetricError, Result};
use crate::task::Lang;

/// Edit operations of a minimum-cost token alignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EditCounts {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub reference_tokens: usize,
}

impl EditCounts {
    pub fn edits(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    pub fn rate(&self) -> f64 {
        self.edits() as f64 / self.reference_tokens as f64
    }
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, o: Self) {
        self.substitutions += o.substitutions;
        self.insertions += o.insertions;
        self.deletions += o.deletions;
        self.reference_tokens += o.reference_tokens;
    }
}

/// Unit-cost Levenshtein alignment over tokens. The backtrace prefers
/// match/substitution, then deletion, then insertion, which fixes the S/I/D
/// split among equally cheap alignments.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditCounts {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut dp = vec![0u32; (n + 1) * width];
    for j in 0..=m {
        dp[j] = j as u32;
    }
    for i in 1..=n {
        dp[i * width] = i as u32;
        for j in 1..=m {
            let sub = dp[(i - 1) * width + j - 1] + u32::from(reference[i - 1] != hypothesis[j - 1]);
            let del = dp[(i - 1) * width + j] + 1;
            let ins = dp[i * width + j - 1] + 1;
            dp[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut counts = EditCounts {
        reference_tokens: n,
        ..Default::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 {
            let differ = reference[i - 1] != hypothesis[j - 1];
            if here == dp[(i - 1) * width + j - 1] + u32::from(differ) {
                counts.substitutions += usize::from(differ);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == dp[(i - 1) * width + j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WerResult {
    pub rate: f64,
    #[serde(flatten)]
    pub counts: EditCounts,
}

/// Word error rate with default text options.
pub fn wer(reference: &str, hypothesis: &str, lang: Lang) -> Result<WerResult> {
    wer_with(reference, hypothesis, lang, TextOptions::default())
}

pub fn wer_with(
    reference: &str,
    hypothesis: &str,
    lang: Lang,
    opts: TextOptions,
) -> Result<WerResult> {
    let r = prepare(reference, lang, opts);
    let h = prepare(hypothesis, lang, opts);
    let rt = tokenize(&r);
    if rt.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let counts = align(&rt, &tokenize(&h));
    Ok(WerResult {
        rate: counts.rate(),
        counts,
    })
}
