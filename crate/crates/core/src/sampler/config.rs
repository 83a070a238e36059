use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Result, SamplerError};
use crate::manifest::PriorMode;
use crate::runplan::LrSettings;
use crate::task::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Sm,
    Tpc,
    Ads,
    Hybrid,
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sm" => Ok(Regime::Sm),
            "tpc" => Ok(Regime::Tpc),
            "ads" => Ok(Regime::Ads),
            "hybrid" => Ok(Regime::Hybrid),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

/// How a discriminative task's quota is split across its labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Equal share per label; minority labels are upsampled.
    #[default]
    Balanced,
    /// Share proportional to each label's corpus frequency.
    Prior,
}

/// A contiguous block of steps that introduces `active_tasks`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumStage {
    pub name: String,
    pub active_tasks: BTreeSet<Task>,
    /// Half-open `[start, end)`.
    pub step_range: [usize; 2],
}

impl CurriculumStage {
    pub fn new(name: &str, tasks: &[Task], start: usize, end: usize) -> Self {
        Self {
            name: name.to_string(),
            active_tasks: tasks.iter().copied().collect(),
            step_range: [start, end],
        }
    }

    pub fn start(&self) -> usize {
        self.step_range[0]
    }

    pub fn end(&self) -> usize {
        self.step_range[1]
    }

    pub fn contains(&self, step: usize) -> bool {
        self.start() <= step && step < self.end()
    }
}

/// Acoustic, paralinguistic and reasoning stages over `horizon` steps,
/// split 40% / 30% / 30%.
pub fn default_stages(horizon: usize) -> Vec<CurriculumStage> {
    let b1 = horizon * 4 / 10;
    let b2 = horizon * 7 / 10;
    vec![
        CurriculumStage::new("acoustic", &[Task::Asr], 0, b1),
        CurriculumStage::new("paralinguistic", &[Task::Did, Task::Ser], b1, b2),
        CurriculumStage::new("reasoning", &[Task::Tsum, Task::Ssum], b2, horizon),
    ]
}

fn default_replay() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub regime: Regime,
    pub batch_size: usize,
    pub total_steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Curriculum for TPC and HYBRID. Empty means [`default_stages`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<CurriculumStage>,
    #[serde(default = "default_replay")]
    pub replay_fraction: f64,
    /// HYBRID only. Defaults to `total_steps / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_step: Option<usize>,
    #[serde(default)]
    pub prior_mode: PriorMode,
    #[serde(default)]
    pub label_mode: LabelMode,
    #[serde(default)]
    pub lr: LrSettings,
}

impl RegimeConfig {
    pub fn new(regime: Regime, batch_size: usize, total_steps: usize, seed: u64) -> Self {
        Self {
            regime,
            batch_size,
            total_steps,
            seed,
            stages: Vec::new(),
            replay_fraction: default_replay(),
            switch_step: None,
            prior_mode: PriorMode::default(),
            label_mode: LabelMode::default(),
            lr: LrSettings::default(),
        }
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| SamplerError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SamplerError::Config(format!("{}: {e}", path.display())))?;
        Self::parse_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Resolved switch step for HYBRID.
    pub fn switch_step(&self) -> usize {
        self.switch_step.unwrap_or(self.total_steps / 2)
    }

    /// Number of steps the curriculum spans.
    pub fn stage_horizon(&self) -> usize {
        match self.regime {
            Regime::Hybrid => self.switch_step(),
            _ => self.total_steps,
        }
    }

    /// Configured stages, or the default layout over the stage horizon.
    pub fn resolved_stages(&self) -> Vec<CurriculumStage> {
        if self.stages.is_empty() {
            default_stages(self.stage_horizon())
        } else {
            self.stages.clone()
        }
    }

    /// Checks every invariant that does not depend on the manifest.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SamplerError::Config(m));
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.total_steps == 0 {
            return bad("total_steps must be positive".into());
        }
        if !(0.0..1.0).contains(&self.replay_fraction) {
            return bad(format!(
                "replay_fraction must be in [0, 1), got {}",
                self.replay_fraction
            ));
        }
        if self.regime == Regime::Hybrid && self.switch_step() > self.total_steps {
            return bad(format!(
                "switch_step {} exceeds total_steps {}",
                self.switch_step(),
                self.total_steps
            ));
        }
        self.lr.validate().map_err(SamplerError::Config)?;
        if matches!(self.regime, Regime::Tpc | Regime::Hybrid) {
            let horizon = self.stage_horizon();
            let stages = self.resolved_stages();
            let mut cursor = 0;
            let mut introduced = BTreeSet::new();
            for s in &stages {
                if s.active_tasks.is_empty() {
                    return bad(format!("stage `{}` has no active tasks", s.name));
                }
                if s.start() != cursor || s.end() < s.start() {
                    return bad(format!(
                        "stage `{}` covers [{}, {}) but must start at {cursor}",
                        s.name,
                        s.start(),
                        s.end()
                    ));
                }
                for t in &s.active_tasks {
                    if !introduced.insert(*t) {
                        return bad(format!("task {t} is introduced by more than one stage"));
                    }
                }
                cursor = s.end();
            }
            if cursor != horizon {
                return bad(format!(
                    "stages cover [0, {cursor}) but the curriculum spans [0, {horizon})"
                ));
            }
        }
        Ok(())
    }
}

/// The stage whose range contains `step`.
pub fn stage_for_step(config: &RegimeConfig, step: usize) -> Result<CurriculumStage> {
    let horizon = config.stage_horizon();
    if step >= horizon {
        return Err(SamplerError::StepOutOfRange { step, horizon });
    }
    config
        .resolved_stages()
        .into_iter()
        .find(|s| s.contains(step))
        .ok_or(SamplerError::StepOutOfRange { step, horizon })
}
