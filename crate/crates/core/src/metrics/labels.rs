//! Mapping free-form classifier outputs onto the closed label sets.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::normalize::normalize_arabic;
use super::{MetricError, Result};
use crate::task::{Task, INVALID_LABEL};

/// Alias table shipped with the crate.
pub const DEFAULT_ALIAS_TABLE: &str = include_str!("../../data/label_aliases.tsv");

/// Lowercased, Alef-unified key with whitespace and punctuation removed.
fn match_key(raw: &str) -> String {
    normalize_arabic(raw)
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Alias lookup for discriminative tasks, loaded from
/// `variant<TAB>canonical<TAB>task` lines. Canonical labels always match
/// themselves.
#[derive(Debug, Clone)]
pub struct LabelCanonicalizer {
    table: HashMap<(Task, String), &'static str>,
}

impl LabelCanonicalizer {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for task in [Task::Did, Task::Ser] {
            for &label in task.label_set() {
                table.insert((task, match_key(label)), label);
            }
        }
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| MetricError::AliasTable {
                line: i + 1,
                message: m.to_string(),
            };
            let mut cols = line.split('\t');
            let (Some(variant), Some(canonical), Some(task), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad("expected variant<TAB>canonical<TAB>task"));
            };
            let task: Task = task.trim().parse().map_err(|e: String| bad(&e))?;
            let canonical = task
                .label_set()
                .iter()
                .find(|l| **l == canonical.trim())
                .ok_or_else(|| bad(&format!("`{canonical}` is not a {task} label")))?;
            let key = match_key(variant);
            if key.is_empty() {
                return Err(bad("variant is empty after normalization"));
            }
            if let Some(prev) = table.insert((task, key), canonical) {
                if prev != *canonical {
                    return Err(bad(&format!(
                        "`{variant}` already maps to `{prev}`"
                    )));
                }
            }
        }
        Ok(Self { table })
    }

    /// Canonical label for `raw`, or [`INVALID_LABEL`].
    ///
    /// A JSON object such as `{"dialect": "..."}` or `{"emotion": "..."}`
    /// has its value extracted first.
    pub fn canonicalize(&self, raw: &str, task: Task) -> String {
        let value = extract_value(raw, task);
        self.table
            .get(&(task, match_key(&value)))
            .map_or_else(|| INVALID_LABEL.to_string(), |l| l.to_string())
    }
}

impl Default for LabelCanonicalizer {
    fn default() -> Self {
        Self::parse(DEFAULT_ALIAS_TABLE).expect("shipped alias table parses")
    }
}

fn extract_value(raw: &str, task: Task) -> String {
    let mut s = raw.trim();
    if let Some(inner) = s.strip_prefix("```") {
        s = inner.trim_start_matches("json").trim_end_matches("```").trim();
    }
    if !s.starts_with('{') {
        return s.to_string();
    }
    let Ok(serde_json::Value::Object(obj)) = serde_json::from_str::<serde_json::Value>(s) else {
        return s.to_string();
    };
    let field = match task {
        Task::Did => "dialect",
        Task::Ser => "emotion",
        _ => "label",
    };
    if let Some(v) = obj.get(field).or_else(|| obj.get("label")).and_then(|v| v.as_str()) {
        return v.to_string();
    }
    let strings: Vec<&str> = obj.values().filter_map(|v| v.as_str()).collect();
    match strings[..] {
        [only] => only.to_string(),
        _ => String::new(),
    }
}

fn shared() -> &'static LabelCanonicalizer {
    static TABLE: OnceLock<LabelCanonicalizer> = OnceLock::new();
    TABLE.get_or_init(LabelCanonicalizer::default)
}

/// Canonicalizes against the shipped alias table.
pub fn canonicalize_label(raw: &str, task: Task) -> String {
    shared().canonicalize(raw, task)
}
