use serde::Serialize;

use adsched_core::metrics::{
    classification_reports, corpus_rouge, corpus_wer, gate_candidates, load_eval_pairs,
    quality_gate, GateCandidate, LabelCanonicalizer, MetricReport, TextOptions,
};

use super::{read_text, write_file};
use crate::error::{CmdResult, Failure};
use crate::provenance::Provenance;
use crate::{EvalArgs, Metric};

#[derive(Debug, Serialize)]
struct Gate {
    threshold: f64,
    selected: Vec<GateCandidate>,
}

#[derive(Debug, Serialize)]
struct Output {
    provenance: Provenance,
    reports: Vec<MetricReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<Gate>,
}

pub fn run(args: &EvalArgs) -> CmdResult {
    if !args.pairs.is_file() {
        return Err(Failure::runtime(format!("{} does not exist", args.pairs.display())));
    }
    let pairs = load_eval_pairs(&args.pairs)?;
    let opts = TextOptions {
        lowercase: !args.keep_case,
        strip_punctuation: args.strip_punct,
    };
    let raw = read_text(&args.pairs)?;
    let mut hashed = vec![raw.as_bytes().to_vec(), format!("{opts:?}").into_bytes()];

    let (reports, gate) = match args.metric {
        Metric::Wer => {
            let r = corpus_wer(&pairs, opts)?;
            hashed.push(args.threshold.to_le_bytes().to_vec());
            let selected = quality_gate(&gate_candidates(&pairs, &r), args.threshold);
            let gate = Gate {
                threshold: args.threshold,
                selected,
            };
            (vec![r], Some(gate))
        }
        Metric::Rouge => (vec![corpus_rouge(&pairs, opts)?], None),
        Metric::F1 => {
            let canon = match &args.aliases {
                Some(p) => {
                    let table = read_text(p)?;
                    hashed.push(table.clone().into_bytes());
                    LabelCanonicalizer::parse(&table)?
                }
                None => LabelCanonicalizer::default(),
            };
            (classification_reports(&pairs, &canon)?, None)
        }
    };

    for r in &reports {
        match r.task {
            Some(t) => eprintln!("{} ({t}): {:.6} over {} items", r.metric, r.score, r.items),
            None => eprintln!("{}: {:.6} over {} items", r.metric, r.score, r.items),
        }
    }
    if let Some(g) = &gate {
        eprintln!("quality gate (wer < {}): {} selected", g.threshold, g.selected.len());
    }

    if let Some(path) = &args.per_item {
        let mut lines = String::new();
        for r in &reports {
            for item in &r.per_item {
                lines.push_str(&serde_json::to_string(item).expect("item serializes"));
                lines.push('\n');
            }
        }
        write_file(path, lines)?;
    }

    let parts: Vec<&[u8]> = hashed.iter().map(Vec::as_slice).collect();
    let out = Output {
        provenance: Provenance::new("eval", &parts, None),
        reports,
        gate,
    };
    let mut json = serde_json::to_string_pretty(&out).expect("report serializes");
    json.push('\n');
    match &args.out {
        Some(p) => write_file(p, json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
