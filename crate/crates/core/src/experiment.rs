//! Experiment drivers: single runs to a step budget or consensus, (radius, p)
//! sweep grids with replicates, and critical-parameter refinement.
//!
//! Every run is fully determined by its [`RunSpec`]; sweep replicates get
//! their seeds from [`derive_run_seed`], so a sweep's outcome is independent
//! of the order (or parallelism) in which its runs execute. The `*_with`
//! variants accept a batch runner so callers can dispatch the independent
//! runs to worker threads; results are aggregated by sorted keys either way.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::automaton::{Configuration, InitMode, Rounding};
use crate::observables::{energy_incremental, word_census, WordCensus};
use crate::rng::derive_run_seed;
use crate::topology::{build_periodic_lattice, Topology, TopologyError};

/// Parameters of a single trajectory on a periodic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub width: u32,
    pub height: u32,
    pub radius: u32,
    /// Memory-loss parameter in [0, 1].
    pub p: f64,
    /// Step budget as a multiple of the vertex count.
    pub steps_factor: u64,
    pub init: InitMode,
    pub rounding: Rounding,
    pub seed: u64,
    /// Record (step, energy) every this many steps; 0 disables sampling.
    pub sample_stride: u64,
}

impl RunSpec {
    /// A spec with the standard defaults: budget factor 200, unique init,
    /// floor rounding, no energy sampling.
    pub fn new(width: u32, height: u32, radius: u32, p: f64, seed: u64) -> RunSpec {
        RunSpec {
            width,
            height,
            radius,
            p,
            steps_factor: 200,
            init: InitMode::Unique,
            rounding: Rounding::Floor,
            seed,
            sample_stride: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ExperimentError::POutOfRange { p: self.p });
        }
        if self.steps_factor == 0 {
            return Err(ExperimentError::ZeroSteps);
        }
        Ok(())
    }
}

/// Summary of one finished trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Energy at termination; exactly -1.0 when converged.
    pub final_energy: f64,
    pub steps_executed: u64,
    /// Whether global agreement was reached within the budget.
    pub converged: bool,
    pub final_census: WordCensus,
    /// (step, energy) samples when the spec requested them.
    pub energy_samples: Vec<(u64, f64)>,
}

/// One cell of a sweep: a (radius, p, replicate) coordinate with its fully
/// derived run spec.
#[derive(Debug, Clone, PartialEq)]
pub struct RunJob {
    pub radius: u32,
    pub p: f64,
    pub replicate: u32,
    pub spec: RunSpec,
}

/// Aggregated statistics for one (radius, p) grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub radius: u32,
    pub p: f64,
    pub replicates: u32,
    pub mean_final_energy: f64,
    /// Sample standard deviation (n-1 denominator); 0 for a single replicate.
    pub stddev_final_energy: f64,
    pub fraction_converged: f64,
}

/// Sweep results, sorted by (radius, p).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, radius: u32, p: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.radius == radius && (r.p - p).abs() < 1e-9)
    }
}

/// Located critical parameter: the smallest refined p whose convergence
/// fraction fell below the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalEstimate {
    pub radius: u32,
    pub p_c: f64,
    pub refined_grid: Vec<f64>,
    /// Convergence fraction at each grid point, aligned with `refined_grid`.
    pub fractions: Vec<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    Topology(TopologyError),
    POutOfRange {
        p: f64,
    },
    ZeroSteps,
    ZeroReplicates,
    EmptyGrid,
    BadRefineStep {
        step: f64,
    },
    BadThreshold {
        threshold: f64,
    },
    /// The coarse table shows no transition for this radius: no adjacent
    /// pair goes from converging to non-converging.
    NoBracket {
        radius: u32,
    },
    NoRefinedTransition {
        radius: u32,
    },
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Topology(e) => write!(f, "{e}"),
            ExperimentError::POutOfRange { p } => {
                write!(f, "p must lie in [0, 1], got {p}")
            }
            ExperimentError::ZeroSteps => write!(f, "steps_factor must be at least 1"),
            ExperimentError::ZeroReplicates => write!(f, "replicates must be at least 1"),
            ExperimentError::EmptyGrid => write!(f, "parameter grid is empty"),
            ExperimentError::BadRefineStep { step } => {
                write!(f, "refine step must be positive, got {step}")
            }
            ExperimentError::BadThreshold { threshold } => {
                write!(f, "threshold must lie in (0, 1), got {threshold}")
            }
            ExperimentError::NoBracket { radius } => write!(
                f,
                "coarse grid shows no transition for radius {radius}: \
                 no p goes from converging to non-converging"
            ),
            ExperimentError::NoRefinedTransition { radius } => write!(
                f,
                "refined grid for radius {radius} never fell below the threshold"
            ),
        }
    }
}

impl core::error::Error for ExperimentError {}

impl From<TopologyError> for ExperimentError {
    fn from(e: TopologyError) -> Self {
        ExperimentError::Topology(e)
    }
}

/// Runs one trajectory, building the lattice described by the spec.
pub fn run(spec: &RunSpec) -> Result<RunResult, ExperimentError> {
    spec.validate()?;
    let topology = Arc::new(build_periodic_lattice(
        spec.width,
        spec.height,
        spec.radius,
    )?);
    Ok(run_on(topology, spec))
}

/// Runs one trajectory on an existing topology (which takes precedence over
/// the spec's lattice fields). The budget is `steps_factor * vertex count`.
pub fn run_on(topology: Arc<Topology>, spec: &RunSpec) -> RunResult {
    run_impl(topology, spec, None)
}

/// Like [`run`], invoking `progress(step, energy)` every `stride` steps.
pub fn run_with_progress(
    spec: &RunSpec,
    stride: u64,
    progress: &mut dyn FnMut(u64, f64),
) -> Result<RunResult, ExperimentError> {
    spec.validate()?;
    let topology = Arc::new(build_periodic_lattice(
        spec.width,
        spec.height,
        spec.radius,
    )?);
    Ok(run_impl(topology, spec, Some((stride.max(1), progress))))
}

/// Progress hook: (stride, callback) invoked with (step, energy).
type Progress<'a> = (u64, &'a mut dyn FnMut(u64, f64));

fn run_impl(topology: Arc<Topology>, spec: &RunSpec, progress: Option<Progress>) -> RunResult {
    let config = Configuration::init(topology, spec.init, spec.seed);
    drive(
        config,
        spec.p,
        spec.rounding,
        spec.steps_factor,
        spec.sample_stride,
        progress,
    )
}

/// Drives an existing configuration (fresh, injected, or snapshot-restored)
/// until consensus or until its step count reaches `steps_factor * n`.
pub fn run_configuration(
    config: Configuration,
    p: f64,
    rounding: Rounding,
    steps_factor: u64,
    sample_stride: u64,
) -> RunResult {
    drive(config, p, rounding, steps_factor, sample_stride, None)
}

fn drive(
    mut config: Configuration,
    p: f64,
    rounding: Rounding,
    steps_factor: u64,
    stride: u64,
    mut progress: Option<Progress>,
) -> RunResult {
    let n = config.topology().vertex_count() as u64;
    let budget = steps_factor.saturating_mul(n);

    let mut samples = Vec::new();
    if stride > 0 {
        samples.push((config.step_count(), energy_incremental(&config)));
    }

    // Convergence is checked before each step via the exact pair counter, so
    // an injected consensus terminates at step 0.
    while config.step_count() < budget && !config.is_consensus() {
        config.step(p, rounding);
        let step = config.step_count();
        if stride > 0 && step.is_multiple_of(stride) {
            samples.push((step, energy_incremental(&config)));
        }
        if let Some((every, ref mut callback)) = progress {
            if step.is_multiple_of(every) {
                callback(step, energy_incremental(&config));
            }
        }
    }

    let converged = config.is_consensus();
    let final_energy = if converged {
        -1.0
    } else {
        energy_incremental(&config)
    };
    if stride > 0 && samples.last().map(|s| s.0) != Some(config.step_count()) {
        samples.push((config.step_count(), final_energy));
    }

    RunResult {
        final_energy,
        steps_executed: config.step_count(),
        converged,
        final_census: word_census(&config),
        energy_samples: samples,
    }
}

/// Expands a sweep grid into independent jobs. Each job's seed is derived
/// from the base seed and the (radius, p, replicate) coordinate.
pub fn sweep_jobs(
    base: &RunSpec,
    p_values: &[f64],
    radii: &[u32],
    replicates: u32,
) -> Result<Vec<RunJob>, ExperimentError> {
    base.validate()?;
    if replicates == 0 {
        return Err(ExperimentError::ZeroReplicates);
    }
    if p_values.is_empty() || radii.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(ExperimentError::POutOfRange { p });
        }
    }
    let mut jobs = Vec::with_capacity(p_values.len() * radii.len() * replicates as usize);
    for &radius in radii {
        for &p in p_values {
            for replicate in 0..replicates {
                let mut spec = base.clone();
                spec.radius = radius;
                spec.p = p;
                spec.seed = derive_run_seed(base.seed, radius, p, replicate);
                spec.sample_stride = 0;
                jobs.push(RunJob {
                    radius,
                    p,
                    replicate,
                    spec,
                });
            }
        }
    }
    Ok(jobs)
}

/// Sequential batch runner with a topology cache keyed by lattice shape.
pub fn run_jobs(jobs: &[RunJob]) -> Result<Vec<RunResult>, ExperimentError> {
    let mut cache: BTreeMap<(u32, u32, u32), Arc<Topology>> = BTreeMap::new();
    let mut results = Vec::with_capacity(jobs.len());
    for job in jobs {
        let key = (job.spec.width, job.spec.height, job.spec.radius);
        let topology = match cache.get(&key) {
            Some(t) => t.clone(),
            None => {
                let t = Arc::new(build_periodic_lattice(key.0, key.1, key.2)?);
                cache.insert(key, t.clone());
                t
            }
        };
        results.push(run_impl(topology, &job.spec, None));
    }
    Ok(results)
}

/// Aggregates per-job results into a table sorted by (radius, p). The
/// grouping key comes from the jobs, so any runner result order that matches
/// the job order yields the same table.
pub fn aggregate_sweep(jobs: &[RunJob], results: &[RunResult]) -> SweepTable {
    assert_eq!(jobs.len(), results.len());
    let mut groups: BTreeMap<(u32, u64), Vec<&RunResult>> = BTreeMap::new();
    for (job, result) in jobs.iter().zip(results) {
        groups
            .entry((job.radius, job.p.to_bits()))
            .or_default()
            .push(result);
    }
    let mut rows: Vec<SweepRow> = groups
        .into_iter()
        .map(|((radius, p_bits), group)| {
            let k = group.len() as f64;
            let mean = group.iter().map(|r| r.final_energy).sum::<f64>() / k;
            let stddev = if group.len() > 1 {
                let ss = group
                    .iter()
                    .map(|r| {
                        let d = r.final_energy - mean;
                        d * d
                    })
                    .sum::<f64>();
                libm::sqrt(ss / (k - 1.0))
            } else {
                0.0
            };
            let converged = group.iter().filter(|r| r.converged).count() as f64;
            SweepRow {
                radius,
                p: f64::from_bits(p_bits),
                replicates: group.len() as u32,
                mean_final_energy: mean,
                stddev_final_energy: stddev,
                fraction_converged: converged / k,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.radius
            .cmp(&b.radius)
            .then(a.p.partial_cmp(&b.p).expect("p is never NaN"))
    });
    SweepTable { rows }
}

/// Full sweep over the (radius, p) grid, run sequentially.
pub fn sweep(
    base: &RunSpec,
    p_values: &[f64],
    radii: &[u32],
    replicates: u32,
) -> Result<SweepTable, ExperimentError> {
    sweep_with(base, p_values, radii, replicates, run_jobs)
}

/// Full sweep with a caller-supplied batch runner (e.g. a thread pool). The
/// runner must return one result per job, in job order.
pub fn sweep_with<F>(
    base: &RunSpec,
    p_values: &[f64],
    radii: &[u32],
    replicates: u32,
    runner: F,
) -> Result<SweepTable, ExperimentError>
where
    F: FnOnce(&[RunJob]) -> Result<Vec<RunResult>, ExperimentError>,
{
    let jobs = sweep_jobs(base, p_values, radii, replicates)?;
    let results = runner(&jobs)?;
    assert_eq!(results.len(), jobs.len(), "runner dropped results");
    Ok(aggregate_sweep(&jobs, &results))
}

/// Snaps a grid value to 12 decimals so repeated stepping produces clean,
/// reproducible p values.
fn snap(x: f64) -> f64 {
    libm::round(x * 1e12) / 1e12
}

/// Scans the critical zone for `radius` on a refined grid, sequentially.
///
/// The coarse table must contain, for this radius, an adjacent pair going
/// from convergence fraction >= threshold to < threshold. The refined grid
/// spans that bracket with spacing `refine_step` (the bracket's upper end is
/// always included); the estimate is the smallest grid p whose convergence
/// fraction falls below the threshold.
pub fn find_critical(
    base: &RunSpec,
    radius: u32,
    coarse: &SweepTable,
    refine_step: f64,
    replicates: u32,
    threshold: f64,
) -> Result<CriticalEstimate, ExperimentError> {
    find_critical_with(
        base,
        radius,
        coarse,
        refine_step,
        replicates,
        threshold,
        run_jobs,
    )
}

/// [`find_critical`] with a caller-supplied batch runner.
pub fn find_critical_with<F>(
    base: &RunSpec,
    radius: u32,
    coarse: &SweepTable,
    refine_step: f64,
    replicates: u32,
    threshold: f64,
    runner: F,
) -> Result<CriticalEstimate, ExperimentError>
where
    F: FnOnce(&[RunJob]) -> Result<Vec<RunResult>, ExperimentError>,
{
    base.validate()?;
    if replicates == 0 {
        return Err(ExperimentError::ZeroReplicates);
    }
    if refine_step.is_nan() || refine_step <= 0.0 {
        return Err(ExperimentError::BadRefineStep { step: refine_step });
    }
    if threshold.is_nan() || threshold <= 0.0 || threshold >= 1.0 {
        return Err(ExperimentError::BadThreshold { threshold });
    }

    let rows: Vec<&SweepRow> = coarse.rows.iter().filter(|r| r.radius == radius).collect();
    let bracket = rows.windows(2).find_map(|w| {
        (w[0].fraction_converged >= threshold && w[1].fraction_converged < threshold)
            .then(|| (w[0].p, w[1].p))
    });
    let (p_low, p_high) = bracket.ok_or(ExperimentError::NoBracket { radius })?;

    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let p = snap(p_low + k as f64 * refine_step);
        if p > p_high + 1e-12 {
            break;
        }
        grid.push(p.min(1.0));
        k += 1;
    }
    if grid.last().map(|&p| p < p_high - 1e-12).unwrap_or(true) {
        grid.push(p_high);
    }

    let jobs = sweep_jobs(base, &grid, &[radius], replicates)?;
    let results = runner(&jobs)?;
    assert_eq!(results.len(), jobs.len(), "runner dropped results");
    let table = aggregate_sweep(&jobs, &results);

    let fractions: Vec<f64> = table.rows.iter().map(|r| r.fraction_converged).collect();
    let refined_grid: Vec<f64> = table.rows.iter().map(|r| r.p).collect();
    let below = table
        .rows
        .iter()
        .find(|r| r.fraction_converged < threshold)
        .ok_or(ExperimentError::NoRefinedTransition { radius })?;

    Ok(CriticalEstimate {
        radius,
        p_c: below.p,
        refined_grid,
        fractions,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Word;
    use crate::topology::build_from_edge_list;

    #[test]
    fn desk_scale_r1_run_converges() {
        let spec = RunSpec::new(32, 32, 1, 0.5, 1);
        let result = run(&spec).unwrap();
        assert!(result.converged, "32x32 r=1 p=0.5 should reach agreement");
        assert_eq!(result.final_energy, -1.0);
        assert_eq!(result.final_census.distinct_words(), 1);
    }

    #[test]
    fn p_zero_converges_on_small_lattice() {
        let spec = RunSpec::new(8, 8, 1, 0.0, 3);
        let result = run(&spec).unwrap();
        assert!(result.converged);
    }

    #[test]
    fn consensus_injection_terminates_at_step_zero() {
        let topology = Arc::new(build_periodic_lattice(8, 8, 1).unwrap());
        let config = Configuration::consensus(topology, Word(3), 1);
        let result = run_configuration(config, 0.5, Rounding::Floor, 200, 0);
        assert!(result.converged);
        assert_eq!(result.steps_executed, 0);
        assert_eq!(result.final_energy, -1.0);
    }

    #[test]
    fn sweep_is_deterministic_and_sorted() {
        let base = RunSpec::new(8, 8, 1, 0.0, 77);
        let a = sweep(&base, &[0.5, 0.0], &[1], 3).unwrap();
        let b = sweep(&base, &[0.0, 0.5], &[1], 3).unwrap();
        assert_eq!(a, b, "grid order must not matter");
        assert_eq!(a.rows.len(), 2);
        assert!(a.rows[0].p < a.rows[1].p);
        for row in &a.rows {
            assert_eq!(row.replicates, 3);
            assert!(row.fraction_converged >= 0.0 && row.fraction_converged <= 1.0);
        }
    }

    #[test]
    fn single_replicate_reports_zero_stddev() {
        let base = RunSpec::new(8, 8, 1, 0.0, 5);
        let table = sweep(&base, &[0.2], &[1], 1).unwrap();
        assert_eq!(table.rows[0].replicates, 1);
        assert_eq!(table.rows[0].stddev_final_energy, 0.0);
    }

    #[test]
    fn no_bracket_is_an_error() {
        let base = RunSpec::new(8, 8, 1, 0.0, 5);
        // Synthetic coarse table where everything converges.
        let table = SweepTable {
            rows: alloc::vec![
                SweepRow {
                    radius: 1,
                    p: 0.0,
                    replicates: 10,
                    mean_final_energy: -1.0,
                    stddev_final_energy: 0.0,
                    fraction_converged: 1.0,
                },
                SweepRow {
                    radius: 1,
                    p: 0.5,
                    replicates: 10,
                    mean_final_energy: -1.0,
                    stddev_final_energy: 0.0,
                    fraction_converged: 1.0,
                },
            ],
        };
        let err = find_critical(&base, 1, &table, 0.1, 2, 0.5).unwrap_err();
        assert_eq!(err, ExperimentError::NoBracket { radius: 1 });
    }

    #[test]
    fn rejects_invalid_parameters() {
        let mut spec = RunSpec::new(8, 8, 1, 1.3, 0);
        assert_eq!(
            spec.validate(),
            Err(ExperimentError::POutOfRange { p: 1.3 })
        );
        spec.p = 0.5;
        spec.steps_factor = 0;
        assert_eq!(spec.validate(), Err(ExperimentError::ZeroSteps));

        let base = RunSpec::new(8, 8, 1, 0.0, 5);
        assert_eq!(
            sweep_jobs(&base, &[0.1], &[1], 0).unwrap_err(),
            ExperimentError::ZeroReplicates
        );
        assert_eq!(
            sweep_jobs(&base, &[], &[1], 1).unwrap_err(),
            ExperimentError::EmptyGrid
        );
        assert_eq!(
            sweep_jobs(&base, &[2.0], &[1], 1).unwrap_err(),
            ExperimentError::POutOfRange { p: 2.0 }
        );
    }

    #[test]
    fn run_on_arbitrary_graph_uses_topology_size() {
        let topology =
            Arc::new(build_from_edge_list(&[(0, 1), (1, 2), (2, 3), (3, 0)], 1).unwrap());
        let mut spec = RunSpec::new(99, 99, 9, 0.0, 11);
        spec.steps_factor = 200;
        let result = run_on(topology, &spec);
        assert!(result.converged);
        assert!(result.steps_executed <= 200 * 4);
    }

    #[test]
    fn energy_samples_cover_start_and_end() {
        let mut spec = RunSpec::new(8, 8, 1, 0.3, 21);
        spec.sample_stride = 64;
        let result = run(&spec).unwrap();
        assert_eq!(result.energy_samples.first().map(|s| s.0), Some(0));
        assert_eq!(
            result.energy_samples.last().map(|s| s.0),
            Some(result.steps_executed)
        );
        assert_eq!(
            result.energy_samples.last().map(|s| s.1),
            Some(result.final_energy)
        );
    }
}
