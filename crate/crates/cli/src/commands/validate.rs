use adsched_core::runplan::lr_at;
use adsched_core::sampler::{validate_plan, BatchPlan, ValidationError};

use super::{load_codebook, load_manifest, read_text, resolve_config};
use crate::error::{CmdResult, Failure};
use crate::provenance::Provenance;
use crate::ValidateArgs;

pub fn run(args: &ValidateArgs) -> CmdResult {
    let config = resolve_config(&args.config)?;
    let text = read_text(&args.plan)?;
    let plan = BatchPlan::from_jsonl(&text)?;
    let manifest = load_manifest(&args.manifest)?;
    let codebook = load_codebook(args.codebook.as_deref(), &config)?;

    let expected = Provenance::new("plan-batches", &[config.to_toml().as_bytes()], Some(config.seed));
    if let Some(hash) = recorded_hash(&text) {
        if hash != expected.config_hash {
            eprintln!("note: plan was generated from a different config (hash {hash})");
        }
    }

    let check = validate_plan(&plan, &manifest, &config, codebook.as_ref()).map_err(|e| match e {
        ValidationError::Violation(v) => Failure::validation(v),
        ValidationError::Setup(s) => s.into(),
    })?;
    check_lr(&plan, &config, manifest.len())?;

    eprintln!(
        "ok: {} batches, {} items ({} tpc, {} ads, {} round-robin sweeps)",
        check.batches, check.items, check.tpc_batches, check.ads_batches, check.sweeps
    );
    Ok(())
}

fn recorded_hash(text: &str) -> Option<String> {
    let first = text.lines().find(|l| !l.trim().is_empty())?;
    let v: serde_json::Value = serde_json::from_str(first).ok()?;
    v.get("provenance")?.get("config_hash")?.as_str().map(str::to_string)
}

/// Learning-rate annotations, when present, must be on every batch and match
/// the configured schedule.
fn check_lr(plan: &BatchPlan, config: &adsched_core::RegimeConfig, n: usize) -> CmdResult {
    let annotated = plan.batches.iter().filter(|b| b.lr.is_some()).count();
    if annotated == 0 {
        return Ok(());
    }
    let schedule = config.lr.schedule(n, config.batch_size, config.total_steps);
    for b in &plan.batches {
        let want = lr_at(b.step, &schedule).map_err(Failure::validation)?;
        match b.lr {
            Some(lr) if lr == want => {}
            got => {
                return Err(Failure::validation(format!(
                    "learning rate violation at step {}: {got:?}, schedule gives {want}",
                    b.step
                )))
            }
        }
    }
    Ok(())
}
