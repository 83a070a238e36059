use std::collections::HashMap;

use serde::Serialize;

use adsched_core::metrics::{load_eval_pairs, EvalPair};

use super::write_file;
use crate::error::{CmdResult, Failure};
use crate::{JudgeArgs, JudgeKind};

pub const SUMMARY_SYSTEM: &str = include_str!("../../templates/summary_system.txt");
pub const SUMMARY_USER: &str = include_str!("../../templates/summary_user.txt");
pub const TRANSLATION_SYSTEM: &str = include_str!("../../templates/translation_system.txt");
pub const TRANSLATION_USER: &str = include_str!("../../templates/translation_user.txt");

#[derive(Debug, Serialize)]
struct Message<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    id: &'a str,
    kind: &'static str,
    messages: [Message<'a>; 2],
}

/// Replaces every `{name}` in `template` in one left-to-right pass, so
/// braces inside substituted text are never expanded again.
pub fn fill(template: &str, values: &HashMap<&str, &str>) -> Result<String, String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| "unterminated placeholder in template".to_string())?;
        let name = &after[..close];
        let value = values
            .get(name)
            .ok_or_else(|| format!("no value for placeholder `{{{name}}}`"))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn fields(pair: &EvalPair, kind: JudgeKind) -> Vec<(&'static str, &str)> {
    match kind {
        JudgeKind::Summary => vec![
            ("language", pair.lang.as_str()),
            ("reference_summary", pair.reference.as_str()),
            ("predicted_summary", pair.hypothesis.as_str()),
        ],
        JudgeKind::Translation => vec![
            ("arabic_transcription", pair.hypothesis.as_str()),
            ("english_transcription", pair.reference.as_str()),
        ],
    }
}

pub fn run(args: &JudgeArgs) -> CmdResult {
    if !args.pairs.is_file() {
        return Err(Failure::runtime(format!("{} does not exist", args.pairs.display())));
    }
    let pairs = load_eval_pairs(&args.pairs)?;
    let (system, user, kind) = match args.kind {
        JudgeKind::Summary => (SUMMARY_SYSTEM, SUMMARY_USER, "summary"),
        JudgeKind::Translation => (TRANSLATION_SYSTEM, TRANSLATION_USER, "translation"),
    };

    let mut out = String::new();
    for p in &pairs {
        let values: HashMap<&str, &str> = fields(p, args.kind).into_iter().collect();
        if let Some((name, _)) = values.iter().find(|(_, v)| v.trim().is_empty()) {
            return Err(Failure::validation(format!("pair `{}`: `{name}` is empty", p.id)));
        }
        let prompt = fill(user, &values).map_err(|e| Failure::validation(format!("pair `{}`: {e}", p.id)))?;
        let req = Request {
            id: &p.id,
            kind,
            messages: [
                Message {
                    role: "system",
                    content: system,
                },
                Message {
                    role: "user",
                    content: &prompt,
                },
            ],
        };
        out.push_str(&serde_json::to_string(&req).expect("request serializes"));
        out.push('\n');
    }
    write_file(&args.out, out)?;
    eprintln!("wrote {} {kind} requests to {}", pairs.len(), args.out.display());
    Ok(())
}
