use std::collections::BTreeMap;

use serde::Serialize;

use super::{Counts, ItemScore, MetricError, MetricReport, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassStats {
    pub support: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Support-weighted mean of per-class F1 over `labels`.
///
/// Every gold label must belong to `labels`. Predictions outside it
/// (including `INVALID`) are wrong for every class. Classes without gold
/// support carry zero weight.
pub fn weighted_f1<G: AsRef<str>, P: AsRef<str>>(
    pairs: &[(G, P)],
    labels: &[&str],
) -> Result<MetricReport> {
    if pairs.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut stats: BTreeMap<String, ClassStats> = labels
        .iter()
        .map(|l| (l.to_string(), ClassStats::default()))
        .collect();
    let mut invalid = 0;
    let mut per_item = Vec::with_capacity(pairs.len());
    for (i, (gold, pred)) in pairs.iter().enumerate() {
        let (gold, pred) = (gold.as_ref(), pred.as_ref());
        if !stats.contains_key(gold) {
            return Err(MetricError::UnknownGold(gold.to_string()));
        }
        let hit = gold == pred;
        {
            let g = stats.get_mut(gold).unwrap();
            g.support += 1;
            if hit {
                g.true_positives += 1;
            } else {
                g.false_negatives += 1;
            }
        }
        if !hit {
            match stats.get_mut(pred) {
                Some(p) => p.false_positives += 1,
                None => invalid += 1,
            }
        }
        per_item.push(ItemScore {
            id: i.to_string(),
            score: if hit { 1.0 } else { 0.0 },
            gold: Some(gold.to_string()),
            predicted: Some(pred.to_string()),
            ..Default::default()
        });
    }

    let total = pairs.len() as f64;
    let mut weighted = 0.0;
    for s in stats.values_mut() {
        let tp = s.true_positives as f64;
        let predicted = tp + s.false_positives as f64;
        let actual = tp + s.false_negatives as f64;
        s.precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        s.recall = if actual > 0.0 { tp / actual } else { 0.0 };
        let denom = 2.0 * tp + s.false_positives as f64 + s.false_negatives as f64;
        s.f1 = if denom > 0.0 { 2.0 * tp / denom } else { 0.0 };
        weighted += s.f1 * s.support as f64 / total;
    }

    Ok(MetricReport {
        metric: "weighted_f1".into(),
        task: None,
        score: weighted,
        items: pairs.len(),
        counts: Counts::Classes {
            per_label: stats,
            invalid_predictions: invalid,
        },
        per_item,
    })
}
