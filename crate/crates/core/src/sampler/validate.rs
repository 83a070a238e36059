//! Independent re-check of an emitted plan against every sampler invariant.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use super::{ads_quotas, Batch, BatchPlan, CurriculumStage, Regime, RegimeConfig, SamplerError};
use crate::codebook::Codebook;
use crate::manifest::Manifest;
use crate::task::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    StepSequence,
    BatchSize,
    RegimeTag,
    UnknownSample,
    Annotation,
    StageContainment,
    LabelCoverage,
    TaskQuota,
    RoundRobin,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::StepSequence => "step sequence",
            ViolationKind::BatchSize => "batch size",
            ViolationKind::RegimeTag => "regime tag",
            ViolationKind::UnknownSample => "unknown sample",
            ViolationKind::Annotation => "item annotation",
            ViolationKind::StageContainment => "stage containment",
            ViolationKind::LabelCoverage => "label coverage",
            ViolationKind::TaskQuota => "task quota",
            ViolationKind::RoundRobin => "round-robin",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "{} violation at step {s}: {}", self.kind, self.message),
            None => write!(f, "{} violation: {}", self.kind, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum ValidationError {
    /// The plan breaks an invariant.
    #[error("{0}")]
    Violation(Violation),
    /// The inputs needed to check the plan are unusable.
    #[error(transparent)]
    Setup(#[from] SamplerError),
}

/// What a successful validation looked at.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanCheck {
    pub batches: usize,
    pub items: usize,
    pub tpc_batches: usize,
    pub ads_batches: usize,
    /// Completed round-robin sweeps across all ADS groups.
    pub sweeps: usize,
}

fn violation(kind: ViolationKind, step: Option<usize>, message: String) -> ValidationError {
    ValidationError::Violation(Violation { kind, step, message })
}

/// Replays the round-robin rule for one group: the next pick must come from
/// the next cluster (ascending, wrapping) that still has unvisited samples in
/// the current local epoch, and no sample repeats within an epoch.
struct RoundRobinCheck {
    sizes: BTreeMap<usize, usize>,
    remaining: BTreeMap<usize, usize>,
    seen: HashSet<String>,
    prev: Option<usize>,
    sweeps: usize,
}

impl RoundRobinCheck {
    fn new(sizes: BTreeMap<usize, usize>) -> Self {
        Self {
            remaining: sizes.clone(),
            sizes,
            seen: HashSet::new(),
            prev: None,
            sweeps: 0,
        }
    }

    fn expected(&mut self) -> usize {
        if self.remaining.values().all(|&r| r == 0) {
            if self.prev.is_some() {
                self.sweeps += 1;
            }
            self.remaining = self.sizes.clone();
            self.seen.clear();
            self.prev = None;
        }
        let live = |(&c, &r): (&usize, &usize)| (r > 0).then_some(c);
        let after = self.prev.and_then(|p| {
            self.remaining
                .range(p + 1..)
                .find_map(|(c, r)| live((c, r)))
        });
        match after {
            Some(c) => c,
            None => {
                if self.prev.is_some() {
                    self.sweeps += 1;
                }
                self.remaining.iter().find_map(live).expect("some cluster has samples left")
            }
        }
    }

    fn visit(&mut self, id: &str, cluster: usize) -> Result<(), String> {
        let want = self.expected();
        if cluster != want {
            return Err(format!(
                "sample `{id}` drawn from cluster {cluster}, but the traversal is due at cluster {want}"
            ));
        }
        if !self.seen.insert(id.to_string()) {
            return Err(format!(
                "sample `{id}` repeated before its group's clusters were exhausted"
            ));
        }
        *self.remaining.get_mut(&cluster).unwrap() -= 1;
        self.prev = Some(cluster);
        Ok(())
    }
}

fn introduced_by(stages: &[CurriculumStage], step: usize) -> Option<(&CurriculumStage, BTreeSet<Task>)> {
    let mut tasks = BTreeSet::new();
    for s in stages {
        tasks.extend(s.active_tasks.iter().copied());
        if s.contains(step) {
            return Some((s, tasks));
        }
    }
    None
}

/// Checks `plan` against the manifest, config and (for ADS and HYBRID) the
/// codebook. Returns the first violation found, in step order.
pub fn validate_plan(
    plan: &BatchPlan,
    manifest: &Manifest,
    config: &RegimeConfig,
    codebook: Option<&Codebook>,
) -> Result<PlanCheck, ValidationError> {
    config.validate()?;
    let uses_ads = matches!(config.regime, Regime::Ads | Regime::Hybrid);
    let codebook = match (uses_ads, codebook) {
        (true, None) => return Err(SamplerError::MissingCodebook(config.regime).into()),
        (_, cb) => cb,
    };
    let tpc_until = match config.regime {
        Regime::Tpc => config.total_steps,
        Regime::Hybrid => config.switch_step(),
        _ => 0,
    };
    let stages = config.resolved_stages();
    let quotas = if uses_ads {
        ads_quotas(manifest, config.batch_size, config.prior_mode, config.label_mode)?
    } else {
        BTreeMap::new()
    };
    let index = manifest.index();

    let mut rr: BTreeMap<(Task, String), RoundRobinCheck> = BTreeMap::new();
    if let Some(cb) = codebook.filter(|_| uses_ads) {
        for (key, members) in manifest.groups() {
            let mut sizes = BTreeMap::new();
            for i in members {
                let id = &manifest.samples()[i].id;
                let c = cb
                    .cluster_of(id)
                    .ok_or_else(|| SamplerError::MissingAssignment(id.clone()))?;
                *sizes.entry(c).or_insert(0) += 1;
            }
            rr.insert(key, RoundRobinCheck::new(sizes));
        }
    }

    if plan.len() != config.total_steps {
        return Err(violation(
            ViolationKind::StepSequence,
            None,
            format!("plan has {} batches, config asks for {}", plan.len(), config.total_steps),
        ));
    }

    let mut check = PlanCheck::default();
    for (expected_step, batch) in plan.batches.iter().enumerate() {
        let step = batch.step;
        if step != expected_step {
            return Err(violation(
                ViolationKind::StepSequence,
                Some(step),
                format!("expected step {expected_step}"),
            ));
        }
        let at = Some(step);
        if batch.items.len() != config.batch_size {
            return Err(violation(
                ViolationKind::BatchSize,
                at,
                format!("{} items, expected {}", batch.items.len(), config.batch_size),
            ));
        }
        let want_regime = match config.regime {
            Regime::Sm => Regime::Sm,
            _ if step < tpc_until => Regime::Tpc,
            _ => Regime::Ads,
        };
        if batch.regime != want_regime {
            return Err(violation(
                ViolationKind::RegimeTag,
                at,
                format!("tagged {}, expected {want_regime}", batch.regime),
            ));
        }
        check_items(batch, manifest, &index, codebook, want_regime == Regime::Ads)?;

        match want_regime {
            Regime::Tpc => {
                check.tpc_batches += 1;
                check_tpc(batch, &stages)?;
            }
            Regime::Ads => {
                check.ads_batches += 1;
                check_ads(batch, &quotas, &mut rr)?;
            }
            _ => {
                if batch.stage.is_some() {
                    return Err(violation(
                        ViolationKind::RegimeTag,
                        at,
                        "SM batches carry no stage".into(),
                    ));
                }
            }
        }
        check.batches += 1;
        check.items += batch.items.len();
    }
    check.sweeps = rr.values().map(|r| r.sweeps).sum();
    Ok(check)
}

fn check_items(
    batch: &Batch,
    manifest: &Manifest,
    index: &std::collections::HashMap<&str, usize>,
    codebook: Option<&Codebook>,
    needs_cluster: bool,
) -> Result<(), ValidationError> {
    let at = Some(batch.step);
    for item in &batch.items {
        let Some(&i) = index.get(item.id.as_str()) else {
            return Err(violation(
                ViolationKind::UnknownSample,
                at,
                format!("`{}` is not in the manifest", item.id),
            ));
        };
        let rec = &manifest.samples()[i];
        if rec.task != item.task || rec.group_label() != item.label {
            return Err(violation(
                ViolationKind::Annotation,
                at,
                format!(
                    "`{}` is ({}, {}) in the manifest but ({}, {}) in the plan",
                    item.id,
                    rec.task,
                    rec.group_label(),
                    item.task,
                    item.label
                ),
            ));
        }
        let want_cluster = if needs_cluster {
            codebook.and_then(|cb| cb.cluster_of(&item.id))
        } else {
            None
        };
        if item.cluster != want_cluster {
            return Err(violation(
                ViolationKind::Annotation,
                at,
                format!(
                    "`{}` carries cluster {:?}, expected {:?}",
                    item.id, item.cluster, want_cluster
                ),
            ));
        }
    }
    Ok(())
}

fn check_tpc(batch: &Batch, stages: &[CurriculumStage]) -> Result<(), ValidationError> {
    let at = Some(batch.step);
    let Some((stage, introduced)) = introduced_by(stages, batch.step) else {
        return Err(violation(
            ViolationKind::StageContainment,
            at,
            "step lies outside every stage".into(),
        ));
    };
    if batch.stage.as_deref() != Some(stage.name.as_str()) {
        return Err(violation(
            ViolationKind::StageContainment,
            at,
            format!("tagged stage {:?}, expected `{}`", batch.stage, stage.name),
        ));
    }
    if let Some(item) = batch.items.iter().find(|it| !introduced.contains(&it.task)) {
        return Err(violation(
            ViolationKind::StageContainment,
            at,
            format!(
                "`{}` has task {} which stage `{}` has not introduced yet",
                item.id, item.task, stage.name
            ),
        ));
    }
    Ok(())
}

fn check_ads(
    batch: &Batch,
    quotas: &BTreeMap<(Task, String), usize>,
    rr: &mut BTreeMap<(Task, String), RoundRobinCheck>,
) -> Result<(), ValidationError> {
    let at = Some(batch.step);
    let mut counts: BTreeMap<(Task, String), usize> = BTreeMap::new();
    for item in &batch.items {
        *counts.entry((item.task, item.label.clone())).or_insert(0) += 1;
    }
    for (task, label) in quotas.keys().filter(|(t, _)| t.is_discriminative()) {
        if !counts.contains_key(&(*task, label.clone())) {
            return Err(violation(
                ViolationKind::LabelCoverage,
                at,
                format!("label `{label}` of task {task} is missing"),
            ));
        }
    }
    let mut task_have: BTreeMap<Task, usize> = BTreeMap::new();
    let mut task_want: BTreeMap<Task, usize> = BTreeMap::new();
    for ((t, _), n) in &counts {
        *task_have.entry(*t).or_insert(0) += n;
    }
    for ((t, _), n) in quotas {
        *task_want.entry(*t).or_insert(0) += n;
    }
    if task_have != task_want {
        return Err(violation(
            ViolationKind::TaskQuota,
            at,
            format!("per-task counts {task_have:?} differ from quotas {task_want:?}"),
        ));
    }
    if counts != *quotas {
        let (key, want) = quotas
            .iter()
            .find(|(k, n)| counts.get(*k) != Some(n))
            .expect("maps differ");
        return Err(violation(
            ViolationKind::TaskQuota,
            at,
            format!(
                "group ({}, {}) has {} items, quota is {want}",
                key.0,
                key.1,
                counts.get(key).copied().unwrap_or(0)
            ),
        ));
    }
    for item in &batch.items {
        let cluster = item.cluster.expect("checked in check_items");
        let state = rr
            .get_mut(&(item.task, item.label.clone()))
            .expect("every manifest group has a checker");
        state
            .visit(&item.id, cluster)
            .map_err(|m| violation(ViolationKind::RoundRobin, at, m))?;
    }
    Ok(())
}
