use std::fmt;

use adsched_core::codebook::CodebookError;
use adsched_core::manifest::ManifestError;
use adsched_core::metrics::MetricError;
use adsched_core::sampler::SamplerError;

/// A failed command. Validation failures exit 1, everything else exits 2.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn validation(msg: impl fmt::Display) -> Self {
        Failure::Validation(msg.to_string())
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        Failure::Runtime(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            Failure::Validation(m) => Failure::Validation(format!("{what}: {m}")),
            Failure::Runtime(m) => Failure::Runtime(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Io { .. } => Failure::runtime(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<CodebookError> for Failure {
    fn from(e: CodebookError) -> Self {
        match e {
            CodebookError::Manifest(inner) => inner.into(),
            CodebookError::TooFewVectors { .. }
            | CodebookError::ZeroK
            | CodebookError::SubsetTooSmall { .. } => Failure::validation(e),
            _ => Failure::runtime(e),
        }
    }
}

impl From<SamplerError> for Failure {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::MissingCodebook(_) => Failure::runtime(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Io { .. } => Failure::runtime(e),
            _ => Failure::validation(e),
        }
    }
}
