//! Output files: CSV tables and structured text, each prefixed with a
//! reproducibility stamp (version, command, full config, master seed).
//!
//! Floats are written with Rust's shortest round-trip formatting, so outputs
//! are byte-identical across runs and platforms for the same seed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use namegame_core::{CriticalEstimate, SweepTable, WordCensus};

use crate::config::ExperimentConfig;
use crate::CliError;

/// `# `-prefixed header recording how this file was produced.
pub fn stamp(command: &str, config: &ExperimentConfig) -> String {
    let mut header = String::new();
    let _ = writeln!(header, "# namegame v{}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(header, "# command={command}");
    for line in config.to_key_values().lines() {
        let _ = writeln!(header, "# {line}");
    }
    let _ = writeln!(header, "# master_seed={}", config.seed);
    header
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::runtime(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub fn out_path(config: &ExperimentConfig, name: &str) -> PathBuf {
    config.out.join(name)
}

pub fn write_trajectory(path: &Path, header: &str, samples: &[(u64, f64)]) -> Result<(), CliError> {
    let mut text = String::from(header);
    text.push_str("step,energy\n");
    for (step, energy) in samples {
        let _ = writeln!(text, "{step},{energy}");
    }
    write_file(path, &text)
}

pub fn write_census(path: &Path, header: &str, census: &WordCensus) -> Result<(), CliError> {
    let mut text = String::from(header);
    text.push_str("rank,word_id,count\n");
    for entry in &census.ranked {
        let _ = writeln!(text, "{},{},{}", entry.rank, entry.word.0, entry.count);
    }
    write_file(path, &text)
}

pub fn write_sweep(path: &Path, header: &str, table: &SweepTable) -> Result<(), CliError> {
    let mut text = String::from(header);
    text.push_str("radius,p,replicates,mean_final_energy,stddev_final_energy,fraction_converged\n");
    for row in &table.rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            row.radius,
            row.p,
            row.replicates,
            row.mean_final_energy,
            row.stddev_final_energy,
            row.fraction_converged
        );
    }
    write_file(path, &text)
}

pub fn write_critical(
    path: &Path,
    header: &str,
    estimate: &CriticalEstimate,
) -> Result<(), CliError> {
    let mut text = String::from(header);
    let _ = writeln!(text, "{{");
    let _ = writeln!(text, "  \"radius\": {},", estimate.radius);
    let _ = writeln!(text, "  \"p_c\": {},", estimate.p_c);
    let _ = writeln!(text, "  \"threshold\": {},", estimate.threshold);
    let grid = estimate
        .refined_grid
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(text, "  \"grid\": [{grid}],");
    let fractions = estimate
        .fractions
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(text, "  \"fraction_converged\": [{fractions}]");
    let _ = writeln!(text, "}}");
    write_file(path, &text)
}
