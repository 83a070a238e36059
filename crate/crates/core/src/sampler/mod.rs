//! Batch plans for the four scheduling regimes.
//!
//! * **SM**: every item drawn uniformly from the whole corpus.
//! * **TPC**: tasks introduced stage by stage, with a replay share drawn
//!   from tasks introduced earlier.
//! * **ADS**: per-batch task quotas from the corpus prior, equal label
//!   quotas inside discriminative tasks, and round-robin traversal of
//!   codebook clusters inside every (task, label) group.
//! * **HYBRID**: TPC up to a switch step, ADS afterwards.

mod config;
mod plan;
mod quotas;
mod traversal;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::Task;

pub use config::{default_stages, stage_for_step, CurriculumStage, LabelMode, Regime, RegimeConfig};
pub use plan::{plan, plan_ads, plan_hybrid, plan_sm, plan_tpc, BatchStream};
pub use quotas::ads_quotas;
pub use traversal::{Pick, Traversal};
pub use validate::{validate_plan, PlanCheck, ValidationError, Violation, ViolationKind};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("manifest is empty")]
    EmptyManifest,
    #[error("stage `{0}` has no samples for any of its active tasks")]
    EmptyStage(String),
    #[error("task {0} appears in the manifest but in no curriculum stage")]
    UncoveredTask(Task),
    #[error(
        "batch size {batch_size} cannot give every (task, label) group a slot: \
         {groups} groups, and ({task}, {label}) gets none"
    )]
    QuotaInfeasible {
        batch_size: usize,
        groups: usize,
        task: Task,
        label: String,
    },
    #[error("sample `{0}` has no codebook assignment")]
    MissingAssignment(String),
    #[error("regime {0} needs a codebook")]
    MissingCodebook(Regime),
    #[error("cannot call {expected} planner with a {got} config")]
    WrongRegime { expected: Regime, got: Regime },
    #[error("step {step} outside the stage horizon [0, {horizon})")]
    StepOutOfRange { step: usize, horizon: usize },
    #[error("malformed plan line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = SamplerError> = std::result::Result<T, E>;

/// One scheduled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanItem {
    pub id: String,
    pub task: Task,
    /// Class label, or the language for generative tasks.
    pub label: String,
    pub cluster: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Batch {
    pub step: usize,
    /// Regime that generated this batch; never `hybrid`.
    pub regime: Regime,
    pub stage: Option<String>,
    pub items: Vec<PlanItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchPlan {
    pub batches: Vec<Batch>,
}

impl BatchPlan {
    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for b in &self.batches {
            out.push_str(&serde_json::to_string(b).expect("batch serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses a plan file. A leading `{"provenance": ...}` line is skipped.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut batches = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| SamplerError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if value.as_object().is_some_and(|o| o.contains_key("provenance")) {
                continue;
            }
            let batch: Batch = serde_json::from_value(value).map_err(|e| SamplerError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            batches.push(batch);
        }
        Ok(Self { batches })
    }

    /// Item totals per task across the whole plan.
    pub fn task_totals(&self) -> BTreeMap<Task, usize> {
        let mut out = BTreeMap::new();
        for item in self.batches.iter().flat_map(|b| &b.items) {
            *out.entry(item.task).or_insert(0) += 1;
        }
        out
    }

    /// Batch counts per (regime tag, stage).
    pub fn phase_counts(&self) -> BTreeMap<(Regime, Option<String>), usize> {
        let mut out = BTreeMap::new();
        for b in &self.batches {
            *out.entry((b.regime, b.stage.clone())).or_insert(0) += 1;
        }
        out
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Sm => "sm",
            Regime::Tpc => "tpc",
            Regime::Ads => "ads",
            Regime::Hybrid => "hybrid",
        })
    }
}
