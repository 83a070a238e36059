use std::collections::BTreeMap;

use serde::Serialize;

use adsched_core::Task;

use super::{load_manifest, read_text, write_file};
use crate::error::CmdResult;
use crate::provenance::Provenance;
use crate::StatsArgs;

#[derive(Debug, Default, Serialize)]
struct TaskStats {
    samples: usize,
    hours: f64,
    /// Class histogram; empty for generative tasks.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, usize>,
    langs: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
struct Report {
    provenance: Provenance,
    samples: usize,
    hours: f64,
    tasks: BTreeMap<Task, TaskStats>,
}

pub fn run(args: &StatsArgs) -> CmdResult {
    let text = read_text(&args.manifest)?;
    let manifest = load_manifest(&args.manifest)?;

    let mut tasks: BTreeMap<Task, TaskStats> = BTreeMap::new();
    let mut seconds: BTreeMap<Task, f64> = BTreeMap::new();
    for s in manifest.samples() {
        let t = tasks.entry(s.task).or_default();
        t.samples += 1;
        *seconds.entry(s.task).or_default() += s.duration_s;
        if let Some(l) = &s.label {
            *t.labels.entry(l.clone()).or_default() += 1;
        }
        *t.langs.entry(s.lang.to_string()).or_default() += 1;
    }
    for (task, secs) in &seconds {
        tasks.get_mut(task).unwrap().hours = secs / 3600.0;
    }
    let total_seconds: f64 = manifest.samples().iter().map(|s| s.duration_s).sum();
    let report = Report {
        provenance: Provenance::new("stats", &[text.as_bytes()], None),
        samples: manifest.len(),
        hours: total_seconds / 3600.0,
        tasks,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("stats serialize");
    json.push('\n');

    for (task, t) in &report.tasks {
        eprintln!("{task}: {} samples, {:.3} h, {} labels", t.samples, t.hours, t.labels.len());
    }
    match &args.out {
        Some(p) => write_file(p, json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
