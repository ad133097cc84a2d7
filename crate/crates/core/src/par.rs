//! Data-parallel helpers.
//!
//! With the `parallel` feature the closures run on the current rayon pool,
//! otherwise (or when the pool has a single thread) they run as plain
//! iterators. Results are always returned in index order, so callers get
//! identical output regardless of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of worker threads the helpers will use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// `(0..n).map(f).collect()`, fanned out across the pool.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if current_threads() > 1 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// `items.iter().map(f).collect()`, fanned out across the pool.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if current_threads() > 1 {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Runs `op` on a pool with `workers` threads (0 = rayon default).
///
/// Without the `parallel` feature this just calls `op`.
pub fn with_workers<R, F>(workers: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(op),
            Err(e) => {
                log::warn!("could not build a {workers}-thread pool ({e}); using the global pool");
                op()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        op()
    }
}
