use crate::error::{Error, Result};

/// Runs `op` on a pool with `workers` threads, or on the global pool when
/// `workers` is zero.
pub(crate) fn with_workers<R, Op>(workers: usize, op: Op) -> Result<R>
where
    R: Send,
    Op: FnOnce() -> R + Send,
{
    if workers == 0 {
        return Ok(op());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    Ok(pool.install(op))
}
