use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Default acceptance threshold on a synthesized candidate's WER.
pub const DEFAULT_GATE_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCandidate {
    /// The (transcription, summary) pair the candidate audio belongs to.
    pub group: String,
    pub id: String,
    pub wer: f64,
}

/// Keeps at most one candidate per group: the lowest WER strictly below
/// `threshold`, ties resolved by the lowest id. Output is ordered by group.
pub fn quality_gate(candidates: &[GateCandidate], threshold: f64) -> Vec<GateCandidate> {
    let mut best: BTreeMap<&str, &GateCandidate> = BTreeMap::new();
    for c in candidates.iter().filter(|c| c.wer < threshold) {
        best.entry(c.group.as_str())
            .and_modify(|b| {
                if c.wer < b.wer || (c.wer == b.wer && c.id < b.id) {
                    *b = c;
                }
            })
            .or_insert(c);
    }
    best.into_values().cloned().collect()
}
