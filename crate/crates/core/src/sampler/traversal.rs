use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{Result, SamplerError};
use crate::codebook::Codebook;
use crate::manifest::Manifest;
use crate::seed;
use crate::task::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pick {
    /// Position of the sample in the manifest.
    pub sample: usize,
    pub cluster: usize,
}

#[derive(Debug, Clone)]
struct ClusterPool {
    cluster: usize,
    members: Vec<usize>,
    order: Vec<usize>,
    next: usize,
}

impl ClusterPool {
    fn exhausted(&self) -> bool {
        self.next >= self.order.len()
    }
}

/// Round-robin cursor over one group's non-empty clusters.
#[derive(Debug, Clone)]
struct GroupCursor {
    stream: u64,
    epoch: u64,
    pools: Vec<ClusterPool>,
    /// Indices into `pools` that still have unconsumed samples, ascending.
    active: Vec<usize>,
    cursor: usize,
}

impl GroupCursor {
    fn start_epoch(&mut self, seed: u64) {
        let mut rng = seed::rng_for(seed, seed::DOMAIN_ADS, seed::splitmix64(self.stream) ^ self.epoch);
        for p in &mut self.pools {
            p.order.clone_from(&p.members);
            p.order.shuffle(&mut rng);
            p.next = 0;
        }
        self.active = (0..self.pools.len()).collect();
        self.cursor = 0;
    }

    fn pick(&mut self, seed: u64) -> Pick {
        if self.active.is_empty() {
            self.epoch += 1;
            self.start_epoch(seed);
        }
        let pool = &mut self.pools[self.active[self.cursor]];
        let sample = pool.order[pool.next];
        pool.next += 1;
        let cluster = pool.cluster;
        if pool.exhausted() {
            self.active.remove(self.cursor);
        } else {
            self.cursor += 1;
        }
        if self.cursor >= self.active.len() {
            self.cursor = 0;
        }
        Pick { sample, cluster }
    }
}

/// Round-robin state for every (task, group label) pair of a manifest.
///
/// Each call to [`Traversal::pick`] moves the group's cursor to the next
/// cluster (ascending id, wrapping) that still has unconsumed samples and
/// returns that cluster's next sample in a seeded shuffle order. Once every
/// cluster of the group is drained, all of them are reshuffled and the
/// traversal restarts from the lowest cluster.
#[derive(Debug, Clone)]
pub struct Traversal {
    seed: u64,
    groups: BTreeMap<(Task, String), GroupCursor>,
}

impl Traversal {
    pub fn new(manifest: &Manifest, codebook: &Codebook, seed: u64) -> Result<Self> {
        let mut groups = BTreeMap::new();
        for (stream, (key, members)) in manifest.groups().into_iter().enumerate() {
            let mut by_cluster: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for i in members {
                let id = &manifest.samples()[i].id;
                let c = codebook
                    .cluster_of(id)
                    .ok_or_else(|| SamplerError::MissingAssignment(id.clone()))?;
                by_cluster.entry(c).or_default().push(i);
            }
            let pools = by_cluster
                .into_iter()
                .map(|(cluster, members)| ClusterPool {
                    cluster,
                    members,
                    order: Vec::new(),
                    next: 0,
                })
                .collect();
            let mut cursor = GroupCursor {
                stream: stream as u64,
                epoch: 0,
                pools,
                active: Vec::new(),
                cursor: 0,
            };
            cursor.start_epoch(seed);
            groups.insert(key, cursor);
        }
        Ok(Self { seed, groups })
    }

    pub fn pick(&mut self, task: Task, label: &str) -> Result<Pick> {
        let group = self
            .groups
            .get_mut(&(task, label.to_string()))
            .ok_or_else(|| SamplerError::Config(format!("group ({task}, {label}) is empty")))?;
        Ok(group.pick(self.seed))
    }

    /// Non-empty clusters of a group, ascending.
    pub fn clusters(&self, task: Task, label: &str) -> Option<Vec<usize>> {
        self.groups
            .get(&(task, label.to_string()))
            .map(|g| g.pools.iter().map(|p| p.cluster).collect())
    }
}
