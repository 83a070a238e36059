//! Line-delimited sample manifests.
//!
//! One JSON object per line with exactly the keys
//! `id, task, label, lang, duration_s, embedding_ref, text`. `label` and
//! `text` may be null. Records are validated on load and kept in file order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apportion::largest_remainder;
use crate::seed;
use crate::task::{Lang, Task};

/// Upper bound on a single utterance, in seconds.
pub const MAX_DURATION_S: f64 = 180.0;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("failed to read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("record `{id}`: {reason}")]
    Validation { id: String, reason: String },
    #[error("manifest is empty")]
    Empty,
    #[error("{0}")]
    Domain(String),
}

pub type Result<T, E = ManifestError> = std::result::Result<T, E>;

/// One training instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub id: String,
    pub task: Task,
    pub label: Option<String>,
    pub lang: Lang,
    pub duration_s: f64,
    pub embedding_ref: String,
    pub text: Option<String>,
}

impl SampleRecord {
    /// Grouping key below the task: the class label for discriminative tasks,
    /// the language for generative ones.
    pub fn group_label(&self) -> &str {
        match &self.label {
            Some(l) => l,
            None => self.lang.as_str(),
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(ManifestError::Validation {
                id: self.id.clone(),
                reason,
            })
        };
        if self.id.is_empty() {
            return fail("id is empty".into());
        }
        if self.id.contains(['\t', '\n', '\r']) {
            return fail("id contains a tab or newline".into());
        }
        if !self.duration_s.is_finite() || self.duration_s < 0.0 {
            return fail(format!(
                "duration_s must be a non-negative number, got {}",
                self.duration_s
            ));
        }
        if self.duration_s > MAX_DURATION_S {
            return fail(format!(
                "duration_s = {} exceeds the {MAX_DURATION_S} s cap",
                self.duration_s
            ));
        }
        match (&self.label, self.task.is_discriminative()) {
            (None, true) => return fail(format!("task {} requires a label", self.task)),
            (Some(l), false) => {
                return fail(format!(
                    "task {} is generative and must not carry a label (got `{l}`)",
                    self.task
                ))
            }
            (Some(l), true) if !self.task.label_set().contains(&l.as_str()) => {
                return fail(format!("label `{l}` is not a valid {} label", self.task))
            }
            _ => {}
        }
        Ok(())
    }
}

// Wire form: task and lang are read as strings so that unknown values surface
// as validation errors naming the record.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    task: String,
    label: Option<String>,
    lang: String,
    duration_s: f64,
    embedding_ref: String,
    text: Option<String>,
}

impl RawRecord {
    fn into_record(self) -> Result<SampleRecord> {
        let task = self.task.parse::<Task>().map_err(|reason| ManifestError::Validation {
            id: self.id.clone(),
            reason,
        })?;
        let lang = self.lang.parse::<Lang>().map_err(|reason| ManifestError::Validation {
            id: self.id.clone(),
            reason,
        })?;
        Ok(SampleRecord {
            id: self.id,
            task,
            label: self.label,
            lang,
            duration_s: self.duration_s,
            embedding_ref: self.embedding_ref,
            text: self.text,
        })
    }
}

/// How task frequencies are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    #[default]
    SampleCount,
    Duration,
}

/// A validated, immutable, non-empty list of samples in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    samples: Vec<SampleRecord>,
    source_path: String,
}

impl Manifest {
    /// Builds a manifest from in-memory records, applying every load-time check.
    pub fn from_records(
        samples: Vec<SampleRecord>,
        source_path: impl Into<String>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(ManifestError::Empty);
        }
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(ManifestError::Validation {
                    id: s.id.clone(),
                    reason: "duplicate id".into(),
                });
            }
        }
        Ok(Self {
            samples,
            source_path: source_path.into(),
        })
    }

    pub fn parse(text: &str, source_path: impl Into<String>) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawRecord = serde_json::from_str(line).map_err(|e| ManifestError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            samples.push(raw.into_record()?);
        }
        Self::from_records(samples, source_path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path.display().to_string())
    }

    /// Serializes back to the line-delimited format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn samples(&self) -> &[SampleRecord] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn get(&self, id: &str) -> Option<&SampleRecord> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// id -> position lookup.
    pub fn index(&self) -> HashMap<&str, usize> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }

    pub fn tasks(&self) -> Vec<Task> {
        let set: std::collections::BTreeSet<Task> = self.samples.iter().map(|s| s.task).collect();
        set.into_iter().collect()
    }

    /// Sample positions per (task, group label), keys in sorted order.
    pub fn groups(&self) -> BTreeMap<(Task, String), Vec<usize>> {
        let mut out: BTreeMap<(Task, String), Vec<usize>> = BTreeMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            out.entry((s.task, s.group_label().to_string()))
                .or_default()
                .push(i);
        }
        out
    }
}

/// Fraction of the corpus belonging to each task.
pub fn task_prior(manifest: &Manifest, mode: PriorMode) -> BTreeMap<Task, f64> {
    let mut mass: BTreeMap<Task, f64> = BTreeMap::new();
    for s in manifest.samples() {
        let w = match mode {
            PriorMode::SampleCount => 1.0,
            PriorMode::Duration => s.duration_s,
        };
        *mass.entry(s.task).or_default() += w;
    }
    let total: f64 = mass.values().sum();
    if total <= 0.0 {
        // Only reachable in duration mode with all-zero durations.
        return task_prior(manifest, PriorMode::SampleCount);
    }
    mass.into_iter().map(|(t, m)| (t, m / total)).collect()
}

/// Per-label sample counts of a discriminative task.
pub fn label_distribution(manifest: &Manifest, task: Task) -> Result<BTreeMap<String, usize>> {
    if !task.is_discriminative() {
        return Err(ManifestError::Domain(format!(
            "task {task} is generative and has no labels"
        )));
    }
    let mut out = BTreeMap::new();
    for s in manifest.samples().iter().filter(|s| s.task == task) {
        if let Some(l) = &s.label {
            *out.entry(l.clone()).or_insert(0) += 1;
        }
    }
    Ok(out)
}

/// Number of samples `stratified_subset` keeps.
pub fn subset_size(n: usize, fraction: f64) -> usize {
    // The epsilon absorbs binary representation error, e.g. 0.03 * 10_000.
    let raw = (fraction * n as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(n)
}

/// Draws a subset of `⌈fraction · N⌉` samples stratified over (task, group
/// label).
///
/// The budget is first split across tasks by largest remainder, which keeps
/// every task's share within one sample of proportional. Inside a task, each
/// non-empty stratum gets one sample when the task budget covers all of its
/// strata, and the rest is apportioned by stratum size. Members of a stratum
/// are picked by a seeded shuffle; the result keeps manifest order.
pub fn stratified_subset(manifest: &Manifest, fraction: f64, seed: u64) -> Result<Manifest> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ManifestError::Domain(format!(
            "subset fraction must be in (0, 1], got {fraction}"
        )));
    }
    let n = manifest.len();
    let budget = subset_size(n, fraction);

    let groups = manifest.groups();
    let mut by_task: BTreeMap<Task, Vec<(&String, &Vec<usize>)>> = BTreeMap::new();
    for ((task, label), members) in &groups {
        by_task.entry(*task).or_default().push((label, members));
    }

    let task_sizes: Vec<f64> = by_task
        .values()
        .map(|strata| strata.iter().map(|(_, m)| m.len()).sum::<usize>() as f64)
        .collect();
    let task_budgets = largest_remainder(budget, &task_sizes);

    let mut keep = vec![false; n];
    for (stratum_idx, ((task, strata), task_budget)) in
        by_task.iter().zip(task_budgets).enumerate()
    {
        let sizes: Vec<usize> = strata.iter().map(|(_, m)| m.len()).collect();
        let alloc = if task_budget >= strata.len() {
            let spare: Vec<f64> = sizes.iter().map(|&s| (s - 1) as f64).collect();
            largest_remainder(task_budget - strata.len(), &spare)
                .into_iter()
                .map(|a| a + 1)
                .collect::<Vec<_>>()
        } else {
            let w: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
            largest_remainder(task_budget, &w)
        };
        for (j, ((_, members), take)) in strata.iter().zip(alloc).enumerate() {
            let mut order: Vec<usize> = (*members).clone();
            let mut rng = seed::rng_for(
                seed,
                seed::DOMAIN_SUBSET,
                ((*task as u64) << 32) ^ ((stratum_idx as u64) << 16) ^ j as u64,
            );
            order.shuffle(&mut rng);
            for &i in order.iter().take(take.min(members.len())) {
                keep[i] = true;
            }
        }
    }

    let samples: Vec<SampleRecord> = manifest
        .samples()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(s, _)| s.clone())
        .collect();
    Manifest::from_records(samples, manifest.source_path())
}
