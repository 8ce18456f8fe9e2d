//! Command-line harness for `rydthz-core`: configuration files, experiment
//! commands and deterministic CSV/JSON output.

// `!(x > y)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

use std::path::Path;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use run::{run_experiment, Command, RunError, RunOutput};

/// Loads `config_path`, applies the seed override, runs `command` and writes
/// every output file into `out_dir`.
pub fn execute(command: Command, config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<RunOutput, RunError> {
    let text = std::fs::read_to_string(config_path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = run_experiment(&cfg, command)?;
    output::write_all(out_dir, &cfg, command.name(), &out.tables, &out.summary)?;
    Ok(out)
}
