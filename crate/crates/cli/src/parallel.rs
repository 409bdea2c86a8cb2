//! Parallel batch execution of sweep jobs on scoped worker threads.
//!
//! Jobs are independent by construction (every job carries its own derived
//! seed), so workers pull from a shared index and write each result into its
//! job's slot. The output order equals the job order regardless of how the
//! scheduler interleaves workers, keeping sweep aggregation deterministic.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use namegame_core::topology::build_periodic_lattice;
use namegame_core::{run_jobs, run_on, ExperimentError, RunJob, RunResult, Topology};

/// Per-job completion hook: (job index, job, result).
pub type Report<'a> = &'a (dyn Fn(usize, &RunJob, &RunResult) + Sync);

/// Runs jobs on up to `workers` threads, invoking `report` as each finishes.
pub fn run_jobs_parallel(
    jobs: &[RunJob],
    workers: usize,
    report: Option<Report>,
) -> Result<Vec<RunResult>, ExperimentError> {
    if workers <= 1 || jobs.len() <= 1 {
        let results = run_jobs(jobs)?;
        if let Some(report) = report {
            for (i, (job, result)) in jobs.iter().zip(&results).enumerate() {
                report(i, job, result);
            }
        }
        return Ok(results);
    }

    // One shared topology per lattice shape, built before spawning.
    let mut topologies: BTreeMap<(u32, u32, u32), Arc<Topology>> = BTreeMap::new();
    for job in jobs {
        let key = (job.spec.width, job.spec.height, job.spec.radius);
        if let Entry::Vacant(slot) = topologies.entry(key) {
            slot.insert(Arc::new(build_periodic_lattice(key.0, key.1, key.2)?));
        }
    }

    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<RunResult>>> = jobs.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let key = (job.spec.width, job.spec.height, job.spec.radius);
                let topology = topologies[&key].clone();
                let result = run_on(topology, &job.spec);
                if let Some(report) = report {
                    report(i, job, &result);
                }
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });

    Ok(slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("slot lock")
                .expect("job completed")
        })
        .collect())
}
