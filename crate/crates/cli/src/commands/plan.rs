use adsched_core::runplan::annotate_plan;
use adsched_core::sampler;

use super::{load_codebook, load_manifest, resolve_config, write_file};
use crate::error::{CmdResult, Failure};
use crate::provenance::Provenance;
use crate::PlanArgs;

pub fn run(args: &PlanArgs) -> CmdResult {
    let config = resolve_config(&args.config)?;
    let manifest = load_manifest(&args.manifest)?;
    let codebook = load_codebook(args.codebook.as_deref(), &config)?;
    let mut plan = sampler::plan(&manifest, codebook.as_ref(), &config)?;
    if args.emit_lr {
        let schedule = config
            .lr
            .schedule(manifest.len(), config.batch_size, config.total_steps);
        annotate_plan(&mut plan, &schedule).map_err(Failure::validation)?;
    }

    let prov = Provenance::new("plan-batches", &[config.to_toml().as_bytes()], Some(config.seed));
    let mut out = prov.line();
    out.push_str(&plan.to_jsonl());
    write_file(&args.out, out)?;

    eprintln!(
        "{} plan: {} batches of {} items (seed {})",
        config.regime,
        plan.len(),
        config.batch_size,
        config.seed
    );
    for ((regime, stage), n) in plan.phase_counts() {
        match stage {
            Some(s) => eprintln!("  {regime} / {s}: {n} batches"),
            None => eprintln!("  {regime}: {n} batches"),
        }
    }
    for (task, n) in plan.task_totals() {
        eprintln!("  {task}: {n} items");
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
