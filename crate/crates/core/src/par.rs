//! Execution backend for the data-parallel loops (trials, seeds).
//!
//! With the `parallel` feature the work is spread over a rayon pool; without
//! it every request runs sequentially. Results are always collected in index
//! order, so outputs do not depend on the backend or the worker count.

use serde::{Deserialize, Serialize};

/// How a batch of independent work units is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Use the current rayon pool (global pool unless called inside `install`).
    #[default]
    Parallel,
    /// Use a dedicated pool with exactly this many workers.
    Threads(usize),
}

impl Execution {
    /// `None` or `Some(0)` means "use the default pool".
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            None | Some(0) => Execution::Parallel,
            Some(1) => Execution::Sequential,
            Some(n) => Execution::Threads(n),
        }
    }

    /// True when this build can actually run work concurrently.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluate `f(0..len)` and return the results in index order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..len).map(f).collect(),
        Execution::Parallel => parallel_map(len, f),
        Execution::Threads(n) => with_pool(n, || parallel_map(len, &f)),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(op),
        // Pool creation only fails on resource exhaustion; the result does
        // not depend on the worker count, so run on the caller's pool.
        Err(_) => op(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: usize, op: impl FnOnce() -> R + Send) -> R {
    op()
}
