use rayon::prelude::*;

use crate::{Error, Result};

/// Maps `f` over `jobs` on `workers` threads, keeping input order.
pub fn parallel_map<J, R, F>(workers: usize, jobs: Vec<J>, f: F) -> Result<Vec<R>>
where
    J: Send,
    R: Send,
    F: Fn(J) -> Result<R> + Sync,
{
    if workers <= 1 {
        return jobs.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    pool.install(|| jobs.into_par_iter().map(&f).collect())
}
