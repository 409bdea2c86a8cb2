//! The four subcommands: run, sweep, critical, census.
//!
//! Machine-readable results go to files under the output directory; progress
//! and summaries go to standard error.

use std::sync::atomic::{AtomicUsize, Ordering};

use namegame_core::{
    find_critical_with, run, run_with_progress, sweep_with, RunJob, RunResult, RunSpec,
};

use crate::config::ExperimentConfig;
use crate::output;
use crate::parallel::run_jobs_parallel;
use crate::CliError;

fn base_spec(config: &ExperimentConfig, radius: u32, p: f64) -> Result<RunSpec, CliError> {
    let (width, height) = config.require_dims().map_err(CliError::from_usage)?;
    config.check_lattice(radius).map_err(CliError::from_usage)?;
    Ok(RunSpec {
        width,
        height,
        radius,
        p,
        steps_factor: config.steps_factor,
        init: config.init,
        rounding: config.rounding,
        seed: config.seed,
        sample_stride: 0,
    })
}

/// Batch runner honoring the worker count, reporting per-job completions to
/// stderr when progress reporting is on.
fn batch_runner<'a>(
    config: &'a ExperimentConfig,
    total: usize,
) -> impl FnOnce(&[RunJob]) -> Result<Vec<RunResult>, namegame_core::ExperimentError> + 'a {
    let report_enabled = config.progress > 0;
    let workers = config.workers;
    move |jobs: &[RunJob]| {
        let done = AtomicUsize::new(0);
        let report = move |_i: usize, job: &RunJob, result: &RunResult| {
            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "[{finished}/{total}] r={} p={} replicate={} converged={} E_f={:.4}",
                job.radius, job.p, job.replicate, result.converged, result.final_energy
            );
        };
        if report_enabled {
            run_jobs_parallel(jobs, workers, Some(&report))
        } else {
            run_jobs_parallel(jobs, workers, None)
        }
    }
}

pub fn cmd_run(config: &ExperimentConfig) -> Result<(), CliError> {
    let radius = config.require_radius().map_err(CliError::from_usage)?;
    let p = config.require_p().map_err(CliError::from_usage)?;
    let mut spec = base_spec(config, radius, p)?;
    let n = spec.width as u64 * spec.height as u64;
    spec.sample_stride = config.sample_stride.unwrap_or(n);

    let result = if config.progress > 0 {
        let budget = spec.steps_factor * n;
        run_with_progress(&spec, config.progress, &mut |step, energy| {
            eprintln!("step {step}/{budget} energy {energy:.6}");
        })
    } else {
        run(&spec)
    }
    .map_err(CliError::from_runtime)?;

    let header = output::stamp("run", config);
    output::write_trajectory(
        &output::out_path(config, "trajectory.csv"),
        &header,
        &result.energy_samples,
    )?;
    output::write_census(
        &output::out_path(config, "census.csv"),
        &header,
        &result.final_census,
    )?;
    eprintln!(
        "run finished: steps {} converged {} final energy {}",
        result.steps_executed, result.converged, result.final_energy
    );
    Ok(())
}

pub fn cmd_sweep(config: &ExperimentConfig) -> Result<(), CliError> {
    let first_radius = *config
        .radii
        .first()
        .ok_or_else(|| CliError::usage("radii list is empty"))?;
    for &radius in &config.radii {
        config.check_lattice(radius).map_err(CliError::from_usage)?;
    }
    let base = base_spec(config, first_radius, 0.0)?;
    if config.replicates == 1 {
        eprintln!(
            "warning: a single replicate per grid point; standard deviations are 0 by definition"
        );
    }
    let total = config.p_values.len() * config.radii.len() * config.replicates as usize;

    let table = sweep_with(
        &base,
        &config.p_values,
        &config.radii,
        config.replicates,
        batch_runner(config, total),
    )
    .map_err(CliError::from_runtime)?;

    let header = output::stamp("sweep", config);
    output::write_sweep(&output::out_path(config, "sweep.csv"), &header, &table)?;
    eprintln!(
        "sweep finished: {} grid points, {} runs",
        table.rows.len(),
        total
    );
    Ok(())
}

pub fn cmd_critical(config: &ExperimentConfig) -> Result<(), CliError> {
    let radius = config.require_radius().map_err(CliError::from_usage)?;
    let base = base_spec(config, radius, 0.0)?;

    let coarse_total = config.p_values.len() * config.replicates as usize;
    let coarse = sweep_with(
        &base,
        &config.p_values,
        &[radius],
        config.replicates,
        batch_runner(config, coarse_total),
    )
    .map_err(CliError::from_runtime)?;

    // The refined grid size is not known in advance; report against the
    // bracket width estimate.
    let refine_total =
        ((0.1 / config.refine_step).ceil() as usize + 1) * config.replicates as usize;
    let estimate = find_critical_with(
        &base,
        radius,
        &coarse,
        config.refine_step,
        config.replicates,
        config.threshold,
        batch_runner(config, refine_total),
    )
    .map_err(CliError::from_runtime)?;

    let header = output::stamp("critical", config);
    output::write_sweep(&output::out_path(config, "sweep.csv"), &header, &coarse)?;
    output::write_critical(
        &output::out_path(config, "critical.txt"),
        &header,
        &estimate,
    )?;
    eprintln!("critical finished: r={radius} p_c={}", estimate.p_c);
    Ok(())
}

pub fn cmd_census(config: &ExperimentConfig) -> Result<(), CliError> {
    let radius = config.require_radius().map_err(CliError::from_usage)?;
    let p = config.require_p().map_err(CliError::from_usage)?;
    let spec = base_spec(config, radius, p)?;

    let result = run(&spec).map_err(CliError::from_runtime)?;

    let header = output::stamp("census", config);
    output::write_census(
        &output::out_path(config, "census.csv"),
        &header,
        &result.final_census,
    )?;
    eprintln!(
        "census finished: steps {} converged {} distinct words {}",
        result.steps_executed,
        result.converged,
        result.final_census.distinct_words()
    );
    Ok(())
}
