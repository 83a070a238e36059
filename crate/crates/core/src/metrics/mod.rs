//! Evaluation metrics: WER with Arabic normalization, weighted-F1 over
//! canonicalized labels, token ROUGE-L, and the synthesis quality gate.

mod f1;
mod gate;
mod labels;
mod normalize;
mod rouge;
mod wer;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{Lang, Task};

pub use f1::{weighted_f1, ClassStats};
pub use gate::{quality_gate, GateCandidate, DEFAULT_GATE_THRESHOLD};
pub use labels::{canonicalize_label, LabelCanonicalizer, DEFAULT_ALIAS_TABLE};
pub use normalize::{collapse_whitespace, normalize_arabic, prepare, tokenize, TextOptions};
pub use rouge::{lcs_len, rouge_l, rouge_l_with, RougeScore};
pub use wer::{align, wer, wer_with, EditCounts, WerResult};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference is empty after normalization")]
    EmptyReference,
    #[error("hypothesis is empty after normalization")]
    EmptyHypothesis,
    #[error("no items to score")]
    Empty,
    #[error("gold label `{0}` is not in the label set")]
    UnknownGold(String),
    #[error("task {0} has no class labels")]
    NotDiscriminative(Task),
    #[error("alias table line {line}: {message}")]
    AliasTable { line: usize, message: String },
    #[error("item `{id}`: {source}")]
    Item {
        id: String,
        #[source]
        source: Box<MetricError>,
    },
    #[error("eval file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;

/// One reference/hypothesis pair from an eval file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPair {
    pub id: String,
    pub reference: String,
    pub hypothesis: String,
    pub task: Task,
    pub lang: Lang,
    /// Candidate group for the quality gate; defaults to `id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

pub fn parse_eval_pairs(text: &str) -> Result<Vec<EvalPair>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: EvalPair = serde_json::from_str(line).map_err(|e| MetricError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(pair);
    }
    if out.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(out)
}

pub fn load_eval_pairs(path: impl AsRef<Path>) -> Result<Vec<EvalPair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MetricError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_eval_pairs(&text)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ItemScore {
    pub id: String,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<EditCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Counts {
    Edits(EditCounts),
    Classes {
        per_label: BTreeMap<String, ClassStats>,
        invalid_predictions: usize,
    },
    Overlap {
        mean_precision: f64,
        mean_recall: f64,
    },
}

/// Corpus score plus the counts behind it. Per-item detail is kept apart
/// from the summary and written separately on request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub score: f64,
    pub items: usize,
    pub counts: Counts,
    #[serde(skip)]
    pub per_item: Vec<ItemScore>,
}

fn item_err(id: &str) -> impl FnOnce(MetricError) -> MetricError + '_ {
    move |e| MetricError::Item {
        id: id.to_string(),
        source: Box::new(e),
    }
}

/// Corpus WER: total edits over total reference tokens.
pub fn corpus_wer(pairs: &[EvalPair], opts: TextOptions) -> Result<MetricReport> {
    if pairs.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut total = EditCounts::default();
    let mut per_item = Vec::with_capacity(pairs.len());
    for p in pairs {
        let r = wer_with(&p.reference, &p.hypothesis, p.lang, opts).map_err(item_err(&p.id))?;
        total += r.counts;
        per_item.push(ItemScore {
            id: p.id.clone(),
            score: r.rate,
            counts: Some(r.counts),
            ..Default::default()
        });
    }
    Ok(MetricReport {
        metric: "wer".into(),
        task: None,
        score: total.rate(),
        items: pairs.len(),
        counts: Counts::Edits(total),
        per_item,
    })
}

/// Mean per-item ROUGE-L F1.
pub fn corpus_rouge(pairs: &[EvalPair], opts: TextOptions) -> Result<MetricReport> {
    if pairs.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut per_item = Vec::with_capacity(pairs.len());
    let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
    for p in pairs {
        let s = rouge_l_with(&p.reference, &p.hypothesis, p.lang, opts).map_err(item_err(&p.id))?;
        p_sum += s.precision;
        r_sum += s.recall;
        f_sum += s.f1;
        per_item.push(ItemScore {
            id: p.id.clone(),
            score: s.f1,
            ..Default::default()
        });
    }
    let n = pairs.len() as f64;
    Ok(MetricReport {
        metric: "rouge_l".into(),
        task: None,
        score: f_sum / n,
        items: pairs.len(),
        counts: Counts::Overlap {
            mean_precision: p_sum / n,
            mean_recall: r_sum / n,
        },
        per_item,
    })
}

/// Weighted-F1 per discriminative task, after canonicalizing both gold
/// labels and predictions.
pub fn classification_reports(
    pairs: &[EvalPair],
    canonicalizer: &LabelCanonicalizer,
) -> Result<Vec<MetricReport>> {
    if pairs.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut by_task: BTreeMap<Task, Vec<&EvalPair>> = BTreeMap::new();
    for p in pairs {
        if !p.task.is_discriminative() {
            return Err(item_err(&p.id)(MetricError::NotDiscriminative(p.task)));
        }
        by_task.entry(p.task).or_default().push(p);
    }
    let mut out = Vec::new();
    for (task, items) in by_task {
        let labelled: Vec<(String, String)> = items
            .iter()
            .map(|p| {
                (
                    canonicalizer.canonicalize(&p.reference, task),
                    canonicalizer.canonicalize(&p.hypothesis, task),
                )
            })
            .collect();
        let mut report = weighted_f1(&labelled, task.label_set()).map_err(|e| match e {
            MetricError::UnknownGold(_) => {
                let bad = items
                    .iter()
                    .zip(&labelled)
                    .find(|(_, (g, _))| !task.label_set().contains(&g.as_str()))
                    .map(|(p, _)| p);
                match bad {
                    Some(p) => item_err(&p.id)(MetricError::UnknownGold(p.reference.clone())),
                    None => e,
                }
            }
            other => other,
        })?;
        for (score, p) in report.per_item.iter_mut().zip(&items) {
            score.id = p.id.clone();
        }
        report.task = Some(task);
        out.push(report);
    }
    Ok(out)
}

/// Quality-gate input built from per-item WER.
pub fn gate_candidates(pairs: &[EvalPair], report: &MetricReport) -> Vec<GateCandidate> {
    pairs
        .iter()
        .zip(&report.per_item)
        .map(|(p, s)| GateCandidate {
            group: p.group.clone().unwrap_or_else(|| p.id.clone()),
            id: p.id.clone(),
            wer: s.score,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, r: &str, h: &str, task: Task, lang: Lang) -> EvalPair {
        EvalPair {
            id: id.into(),
            reference: r.into(),
            hypothesis: h.into(),
            task,
            lang,
            group: None,
        }
    }

    #[test]
    fn corpus_wer_pools_counts() {
        let pairs = [
            pair("1", "a b c d", "a b c d", Task::Asr, Lang::En),
            pair("2", "a b", "a x", Task::Asr, Lang::En),
        ];
        let r = corpus_wer(&pairs, TextOptions::default()).unwrap();
        assert!((r.score - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.per_item[1].score, 0.5);
    }

    #[test]
    fn ksa_prediction_is_correct() {
        let pairs = [
            pair("1", "Saudi Arabia", "KSA", Task::Did, Lang::Ar),
            pair("2", "Egypt", "{\"dialect\":\"Egyptian\"}", Task::Did, Lang::Ar),
        ];
        let r = classification_reports(&pairs, &LabelCanonicalizer::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].score, 1.0);
        assert_eq!(r[0].per_item[0].id, "1");
    }

    #[test]
    fn classification_rejects_bad_gold_and_generative() {
        let c = LabelCanonicalizer::default();
        let bad = [pair("x", "Atlantis", "Egypt", Task::Did, Lang::Ar)];
        let err = classification_reports(&bad, &c).unwrap_err().to_string();
        assert!(err.contains('x') && err.contains("Atlantis"), "{err}");
        let gen = [pair("y", "a", "b", Task::Asr, Lang::Ar)];
        assert!(classification_reports(&gen, &c).is_err());
    }

    #[test]
    fn eval_file_parsing() {
        let text = r#"{"id":"1","reference":"a","hypothesis":"a","task":"asr","lang":"en"}"#;
        assert_eq!(parse_eval_pairs(text).unwrap().len(), 1);
        assert!(parse_eval_pairs("").is_err());
        assert!(matches!(
            parse_eval_pairs("{\"id\":1}"),
            Err(MetricError::Parse { line: 1, .. })
        ));
    }
}
