use std::collections::BTreeMap;

use super::{LabelMode, Result, SamplerError};
use crate::apportion::largest_remainder;
use crate::manifest::{task_prior, Manifest, PriorMode};
use crate::task::Task;

/// Per-batch item quota of every (task, group label) pair.
///
/// The batch is split across tasks by the corpus prior, then each task's
/// share is split across its groups: equally for discriminative labels in
/// [`LabelMode::Balanced`], otherwise in proportion to group size (or
/// duration, under [`PriorMode::Duration`]). Both splits use largest
/// remainder, so the quotas sum to `batch_size` exactly.
pub fn ads_quotas(
    manifest: &Manifest,
    batch_size: usize,
    prior_mode: PriorMode,
    label_mode: LabelMode,
) -> Result<BTreeMap<(Task, String), usize>> {
    if manifest.is_empty() {
        return Err(SamplerError::EmptyManifest);
    }
    let mut group_mass: BTreeMap<Task, BTreeMap<String, f64>> = BTreeMap::new();
    for s in manifest.samples() {
        let w = match prior_mode {
            PriorMode::SampleCount => 1.0,
            PriorMode::Duration => s.duration_s,
        };
        *group_mass
            .entry(s.task)
            .or_default()
            .entry(s.group_label().to_string())
            .or_default() += w;
    }
    let n_groups: usize = group_mass.values().map(BTreeMap::len).sum();

    let prior = task_prior(manifest, prior_mode);
    let tasks: Vec<Task> = prior.keys().copied().collect();
    let weights: Vec<f64> = prior.values().copied().collect();
    let task_quota = largest_remainder(batch_size, &weights);

    let mut out = BTreeMap::new();
    for (task, n_t) in tasks.into_iter().zip(task_quota) {
        let groups = &group_mass[&task];
        let w: Vec<f64> = if task.is_discriminative() && label_mode == LabelMode::Balanced {
            vec![1.0; groups.len()]
        } else {
            groups.values().copied().collect()
        };
        for (label, q) in groups.keys().zip(largest_remainder(n_t, &w)) {
            if q == 0 {
                return Err(SamplerError::QuotaInfeasible {
                    batch_size,
                    groups: n_groups,
                    task,
                    label: label.clone(),
                });
            }
            out.insert((task, label.clone()), q);
        }
    }
    Ok(out)
}
