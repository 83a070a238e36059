use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Training task. Variant order follows the curriculum (acoustic, then
/// paralinguistic, then reasoning) and is the iteration order used everywhere
/// a deterministic task order is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Asr,
    Did,
    Ser,
    Tsum,
    Ssum,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Asr, Task::Did, Task::Ser, Task::Tsum, Task::Ssum];

    /// Dialect and emotion identification carry a class label.
    pub fn is_discriminative(self) -> bool {
        matches!(self, Task::Did | Task::Ser)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Asr => "asr",
            Task::Did => "did",
            Task::Ser => "ser",
            Task::Tsum => "tsum",
            Task::Ssum => "ssum",
        }
    }

    /// Closed label set for discriminative tasks, empty for generative ones.
    pub fn label_set(self) -> &'static [&'static str] {
        match self {
            Task::Did => &DIALECT_LABELS,
            Task::Ser => &EMOTION_LABELS,
            _ => &[],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asr" => Ok(Task::Asr),
            "did" => Ok(Task::Did),
            "ser" => Ok(Task::Ser),
            "tsum" => Ok(Task::Tsum),
            "ssum" => Ok(Task::Ssum),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    Ar,
    En,
}

impl Lang {
    pub fn as_str(self) -> &'static str {
        match self {
            Lang::Ar => "ar",
            Lang::En => "en",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ar" => Ok(Lang::Ar),
            "en" => Ok(Lang::En),
            other => Err(format!("unknown language `{other}`")),
        }
    }
}

/// The 18 dialect identification labels (17 regional varieties plus MSA).
pub const DIALECT_LABELS: [&str; 18] = [
    "Algeria",
    "Egypt",
    "Iraq",
    "Jordan",
    "Kuwait",
    "Lebanon",
    "Libya",
    "Mauritania",
    "Modern Standard Arabic",
    "Morocco",
    "Oman",
    "Palestine",
    "Qatar",
    "Saudi Arabia",
    "Sudan",
    "Syria",
    "United Arab Emirates",
    "Yemen",
];

/// The 7 emotion recognition labels.
pub const EMOTION_LABELS: [&str; 7] = [
    "Anger",
    "Fear",
    "Happiness",
    "Neutral",
    "Questioning",
    "Sadness",
    "Surprise",
];

/// Reserved label for classifier outputs that match nothing in the alias table.
pub const INVALID_LABEL: &str = "INVALID";
