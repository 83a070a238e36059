//! Training-run arithmetic: effective batch size and the warmup + cosine
//! learning-rate schedule.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::BatchPlan;

#[derive(Debug, Error, PartialEq)]
pub enum RunPlanError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: usize },
    #[error("step {step} outside [0, {total_steps})")]
    StepOutOfRange { step: usize, total_steps: usize },
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

/// `per_device * grad_accum * devices`.
pub fn effective_batch_size(
    per_device: usize,
    grad_accum: usize,
    devices: usize,
) -> Result<usize, RunPlanError> {
    for (name, value) in [
        ("per_device", per_device),
        ("grad_accum", grad_accum),
        ("devices", devices),
    ] {
        if value == 0 {
            return Err(RunPlanError::NonPositive { name, value });
        }
    }
    Ok(per_device * grad_accum * devices)
}

/// Optimizer steps in one pass over `n_samples` at `batch_size`.
pub fn epoch_steps(n_samples: usize, batch_size: usize) -> usize {
    n_samples.div_ceil(batch_size.max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrScheduleConfig {
    pub peak_lr: f64,
    /// Share of the first epoch spent warming up.
    pub warmup_fraction: f64,
    pub epoch1_steps: usize,
    pub total_steps: usize,
    pub floor_lr: f64,
}

impl LrScheduleConfig {
    pub fn new(epoch1_steps: usize, total_steps: usize) -> Self {
        Self {
            peak_lr: 3e-5,
            warmup_fraction: 0.30,
            epoch1_steps,
            total_steps,
            floor_lr: 0.0,
        }
    }

    /// `⌈warmup_fraction * epoch1_steps⌉`, at least one step.
    pub fn warmup_steps(&self) -> usize {
        let w = (self.warmup_fraction * self.epoch1_steps as f64 - 1e-9).ceil();
        (w.max(1.0)) as usize
    }

    pub fn validate(&self) -> Result<(), RunPlanError> {
        if self.epoch1_steps == 0 {
            return Err(RunPlanError::NonPositive {
                name: "epoch1_steps",
                value: 0,
            });
        }
        if self.total_steps == 0 {
            return Err(RunPlanError::NonPositive {
                name: "total_steps",
                value: 0,
            });
        }
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction <= 1.0) {
            return Err(RunPlanError::Invalid(format!(
                "warmup_fraction must be in (0, 1], got {}",
                self.warmup_fraction
            )));
        }
        if !(self.floor_lr >= 0.0 && self.peak_lr > self.floor_lr && self.peak_lr.is_finite()) {
            return Err(RunPlanError::Invalid(format!(
                "need peak_lr > floor_lr >= 0, got peak {} floor {}",
                self.peak_lr, self.floor_lr
            )));
        }
        if self.warmup_steps() > self.total_steps {
            return Err(RunPlanError::Invalid(format!(
                "{} warmup steps exceed {} total steps",
                self.warmup_steps(),
                self.total_steps
            )));
        }
        Ok(())
    }
}

/// Learning rate at `step`: linear ramp to the peak over the warmup steps,
/// then cosine decay to the floor at the last step's horizon.
pub fn lr_at(step: usize, config: &LrScheduleConfig) -> Result<f64, RunPlanError> {
    config.validate()?;
    if step >= config.total_steps {
        return Err(RunPlanError::StepOutOfRange {
            step,
            total_steps: config.total_steps,
        });
    }
    let w = config.warmup_steps();
    if step < w {
        return Ok(config.peak_lr * ((step + 1) as f64 / w as f64));
    }
    let progress = (step - w) as f64 / (config.total_steps - w) as f64;
    let c = 0.5 * (1.0 + (PI * progress).cos());
    Ok(config.peak_lr * c + config.floor_lr * (1.0 - c))
}

/// Schedule knobs carried in a regime config file. `epoch1_steps` defaults
/// to `⌈N / batch_size⌉` for the manifest being planned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LrSettings {
    pub peak_lr: f64,
    pub warmup_fraction: f64,
    pub floor_lr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch1_steps: Option<usize>,
}

impl Default for LrSettings {
    fn default() -> Self {
        Self {
            peak_lr: 3e-5,
            warmup_fraction: 0.30,
            floor_lr: 0.0,
            epoch1_steps: None,
        }
    }
}

impl LrSettings {
    pub(crate) fn validate(&self) -> Result<(), String> {
        LrScheduleConfig {
            peak_lr: self.peak_lr,
            warmup_fraction: self.warmup_fraction,
            epoch1_steps: 1,
            total_steps: 1,
            floor_lr: self.floor_lr,
        }
        .validate()
        .map_err(|e| format!("lr: {e}"))
    }

    pub fn schedule(&self, n_samples: usize, batch_size: usize, total_steps: usize) -> LrScheduleConfig {
        LrScheduleConfig {
            peak_lr: self.peak_lr,
            warmup_fraction: self.warmup_fraction,
            epoch1_steps: self
                .epoch1_steps
                .unwrap_or_else(|| epoch_steps(n_samples, batch_size)),
            total_steps,
            floor_lr: self.floor_lr,
        }
    }
}

/// Writes the scheduled learning rate into every batch of `plan`.
pub fn annotate_plan(plan: &mut BatchPlan, config: &LrScheduleConfig) -> Result<(), RunPlanError> {
    for b in &mut plan.batches {
        b.lr = Some(lr_at(b.step, config)?);
    }
    Ok(())
}
