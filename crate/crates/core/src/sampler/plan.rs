use std::collections::BTreeSet;

use rand::Rng;

use super::{Batch, BatchPlan, PlanItem, Regime, RegimeConfig, Result, SamplerError, Traversal};
use crate::codebook::Codebook;
use crate::manifest::Manifest;
use crate::seed;
use crate::task::Task;

struct TpcStage {
    name: String,
    start: usize,
    end: usize,
    current: Vec<usize>,
    replay: Vec<usize>,
}

struct AdsState {
    quotas: Vec<((Task, String), usize)>,
    traversal: Traversal,
}

/// Stateful batch generator. All preconditions are checked up front, so
/// iteration itself cannot fail.
pub struct BatchStream<'a> {
    manifest: &'a Manifest,
    config: &'a RegimeConfig,
    step: usize,
    tpc_until: usize,
    tpc: Vec<TpcStage>,
    ads: Option<AdsState>,
}

impl<'a> BatchStream<'a> {
    pub fn new(
        manifest: &'a Manifest,
        codebook: Option<&Codebook>,
        config: &'a RegimeConfig,
    ) -> Result<Self> {
        config.validate()?;
        if manifest.is_empty() {
            return Err(SamplerError::EmptyManifest);
        }
        let (tpc_until, wants_tpc, wants_ads) = match config.regime {
            Regime::Sm => (0, false, false),
            Regime::Tpc => (config.total_steps, true, false),
            Regime::Ads => (0, false, true),
            Regime::Hybrid => (config.switch_step(), true, true),
        };
        let tpc = if wants_tpc {
            build_stages(manifest, config)?
        } else {
            Vec::new()
        };
        let ads = if wants_ads {
            let codebook = codebook.ok_or(SamplerError::MissingCodebook(config.regime))?;
            let quotas = super::ads_quotas(
                manifest,
                config.batch_size,
                config.prior_mode,
                config.label_mode,
            )?
            .into_iter()
            .collect();
            let traversal = Traversal::new(manifest, codebook, config.seed)?;
            Some(AdsState { quotas, traversal })
        } else {
            None
        };
        Ok(Self {
            manifest,
            config,
            step: 0,
            tpc_until,
            tpc,
            ads,
        })
    }

    fn item(&self, index: usize, cluster: Option<usize>) -> PlanItem {
        let s = &self.manifest.samples()[index];
        PlanItem {
            id: s.id.clone(),
            task: s.task,
            label: s.group_label().to_string(),
            cluster,
        }
    }

    fn sm_batch(&self, step: usize) -> Batch {
        let n = self.manifest.len();
        let mut rng = seed::rng_for(self.config.seed, seed::DOMAIN_SM, step as u64);
        let items = (0..self.config.batch_size)
            .map(|_| self.item(rng.random_range(0..n), None))
            .collect();
        Batch {
            step,
            regime: Regime::Sm,
            stage: None,
            items,
            lr: None,
        }
    }

    fn tpc_batch(&self, step: usize) -> Batch {
        let stage = self
            .tpc
            .iter()
            .find(|s| s.start <= step && step < s.end)
            .expect("validated stages cover the curriculum horizon");
        let mut rng = seed::rng_for(self.config.seed, seed::DOMAIN_TPC, step as u64);
        let items = (0..self.config.batch_size)
            .map(|_| {
                let pool = if !stage.replay.is_empty()
                    && rng.random_bool(self.config.replay_fraction)
                {
                    &stage.replay
                } else {
                    &stage.current
                };
                self.item(pool[rng.random_range(0..pool.len())], None)
            })
            .collect();
        Batch {
            step,
            regime: Regime::Tpc,
            stage: Some(stage.name.clone()),
            items,
            lr: None,
        }
    }

    fn ads_batch(&mut self, step: usize) -> Batch {
        let ads = self.ads.as_mut().expect("ADS state exists past the switch step");
        let mut picks = Vec::with_capacity(self.config.batch_size);
        for ((task, label), quota) in &ads.quotas {
            for _ in 0..*quota {
                let p = ads
                    .traversal
                    .pick(*task, label)
                    .expect("quota groups come from the manifest");
                picks.push(p);
            }
        }
        let items = picks
            .into_iter()
            .map(|p| self.item(p.sample, Some(p.cluster)))
            .collect();
        Batch {
            step,
            regime: Regime::Ads,
            stage: None,
            items,
            lr: None,
        }
    }
}

impl Iterator for BatchStream<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        let step = self.step;
        if step >= self.config.total_steps {
            return None;
        }
        self.step += 1;
        Some(match self.config.regime {
            Regime::Sm => self.sm_batch(step),
            _ if step < self.tpc_until => self.tpc_batch(step),
            _ => self.ads_batch(step),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.config.total_steps - self.step;
        (left, Some(left))
    }
}

fn build_stages(manifest: &Manifest, config: &RegimeConfig) -> Result<Vec<TpcStage>> {
    let stages = config.resolved_stages();
    let covered: BTreeSet<Task> = stages.iter().flat_map(|s| s.active_tasks.iter().copied()).collect();
    if let Some(t) = manifest.tasks().into_iter().find(|t| !covered.contains(t)) {
        return Err(SamplerError::UncoveredTask(t));
    }
    let mut introduced = BTreeSet::new();
    let mut out = Vec::with_capacity(stages.len());
    for s in stages {
        let pick = |tasks: &BTreeSet<Task>| -> Vec<usize> {
            manifest
                .samples()
                .iter()
                .enumerate()
                .filter(|(_, r)| tasks.contains(&r.task))
                .map(|(i, _)| i)
                .collect()
        };
        let current = pick(&s.active_tasks);
        let replay = pick(&introduced);
        if s.start() < s.end() && current.is_empty() {
            return Err(SamplerError::EmptyStage(s.name));
        }
        introduced.extend(s.active_tasks.iter().copied());
        out.push(TpcStage {
            start: s.start(),
            end: s.end(),
            name: s.name,
            current,
            replay,
        });
    }
    Ok(out)
}

fn expect_regime(config: &RegimeConfig, expected: Regime) -> Result<()> {
    if config.regime != expected {
        return Err(SamplerError::WrongRegime {
            expected,
            got: config.regime,
        });
    }
    Ok(())
}

/// Uniform i.i.d. draws over the whole manifest.
pub fn plan_sm(manifest: &Manifest, config: &RegimeConfig) -> Result<BatchPlan> {
    expect_regime(config, Regime::Sm)?;
    plan(manifest, None, config)
}

/// Staged curriculum with replay of earlier stages' tasks.
pub fn plan_tpc(manifest: &Manifest, config: &RegimeConfig) -> Result<BatchPlan> {
    expect_regime(config, Regime::Tpc)?;
    plan(manifest, None, config)
}

/// Quota-driven, cluster round-robin batches.
pub fn plan_ads(manifest: &Manifest, codebook: &Codebook, config: &RegimeConfig) -> Result<BatchPlan> {
    expect_regime(config, Regime::Ads)?;
    plan(manifest, Some(codebook), config)
}

/// TPC before the switch step, ADS from it on.
pub fn plan_hybrid(
    manifest: &Manifest,
    codebook: &Codebook,
    config: &RegimeConfig,
) -> Result<BatchPlan> {
    expect_regime(config, Regime::Hybrid)?;
    plan(manifest, Some(codebook), config)
}

/// Dispatches on `config.regime`.
pub fn plan(
    manifest: &Manifest,
    codebook: Option<&Codebook>,
    config: &RegimeConfig,
) -> Result<BatchPlan> {
    let stream = BatchStream::new(manifest, codebook, config)?;
    Ok(BatchPlan {
        batches: stream.collect(),
    })
}
