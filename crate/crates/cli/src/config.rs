use std::path::Path;

use sotkit::{SimConfig, SpeedSampling};

use crate::commands::CliError;
use crate::SimulateArgs;

/// Builds the simulation config: defaults, then the optional TOML file, then flags.
pub fn sim_config(args: &SimulateArgs) -> Result<SimConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => load_toml(path)?,
        None => SimConfig::default(),
    };
    config.seed = args.seed;
    if args.speed_discrete {
        config.speed_sampling = SpeedSampling::Discrete;
    }
    if let Some(v) = args.max_speakers {
        config.max_speakers = v;
    }
    if let Some(v) = args.min_start_gap {
        config.min_start_gap_s = v;
    }
    if let Some(v) = args.speed_low {
        config.speed_range[0] = v;
    }
    if let Some(v) = args.speed_high {
        config.speed_range[1] = v;
    }
    if let Some(v) = args.max_retries {
        config.max_retries = v;
    }
    config
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(config)
}

fn load_toml(path: &Path) -> Result<SimConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
