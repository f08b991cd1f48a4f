//! Multi-threaded state-space exploration.

use rayon::prelude::*;

use plc_enforce_core::{explore, explore_with, ExploreError, Explored, System};

/// Explore `system` with `jobs` worker threads. Each breadth-first level is
/// expanded in parallel and merged in frontier order, so the result is
/// identical for every `jobs`.
pub fn explore_parallel(
    system: &System,
    budget: usize,
    jobs: usize,
) -> Result<Explored, ExploreError> {
    if jobs <= 1 {
        return explore(system, budget);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        explore_with(system, budget, |batch| {
            batch
                .par_iter()
                .map_init(Vec::new, |buf, s| {
                    system.successors(s, buf);
                    buf.clone()
                })
                .collect()
        })
    })
}
