pub mod codebook;
pub mod eval;
pub mod judge;
pub mod plan;
pub mod stats;
pub mod validate;

use std::path::Path;

use adsched_core::codebook::Codebook;
use adsched_core::sampler::{Regime, RegimeConfig};
use adsched_core::Manifest;

use crate::error::{CmdResult, Failure};
use crate::ConfigArgs;

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CmdResult {
    std::fs::write(path, bytes).map_err(|e| Failure::runtime(format!("writing {}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> CmdResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::runtime(format!("reading {}: {e}", path.display())))
}

pub fn load_manifest(path: &Path) -> CmdResult<Manifest> {
    Manifest::load(path).map_err(Failure::from)
}

/// Loads the optional codebook, failing with a runtime error when the
/// regime needs one and none was given.
pub fn load_codebook(path: Option<&Path>, config: &RegimeConfig) -> CmdResult<Option<Codebook>> {
    match path {
        Some(p) => Codebook::load(p)
            .map(Some)
            .map_err(|e| Failure::runtime(format!("codebook {}: {e}", p.display()))),
        None if matches!(config.regime, Regime::Ads | Regime::Hybrid) => Err(Failure::runtime(format!(
            "regime {} needs cluster assignments; pass --codebook (see build-codebook)",
            config.regime
        ))),
        None => Ok(None),
    }
}

/// Config file with command-line overrides applied, validated.
pub fn resolve_config(args: &ConfigArgs) -> CmdResult<RegimeConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = read_text(path)?;
            RegimeConfig::parse_toml(&text).map_err(|e| Failure::validation(e).context(&path.display().to_string()))?
        }
        None => {
            let (Some(regime), Some(batch), Some(total)) = (args.regime, args.batch_size, args.total_steps) else {
                return Err(Failure::validation(
                    "without --config, --regime, --batch-size and --total-steps are required",
                ));
            };
            RegimeConfig::new(regime, batch, total, 0)
        }
    };
    if let Some(r) = args.regime {
        cfg.regime = r;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(t) = args.total_steps {
        cfg.total_steps = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.switch_step {
        cfg.switch_step = Some(s);
    }
    if let Some(r) = args.replay_fraction {
        cfg.replay_fraction = r;
    }
    cfg.validate()?;
    Ok(cfg)
}
