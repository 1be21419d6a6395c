//! Deterministic execution of data-parallel loops.
//!
//! Observations are split into fixed-size blocks. Each block is reduced on its
//! own and the per-block partials are folded in block order, so the floating
//! point result is bit-identical no matter how many worker threads run the
//! blocks. The `parallel` feature enables a rayon backend; without it the same
//! block schedule runs on the calling thread.
//!
//! `ORDSEV_THREADS` caps the rayon pool size. It affects speed only, never
//! results.

use std::ops::Range;

#[cfg(feature = "parallel")]
use std::sync::OnceLock;

/// How a data-parallel loop should run. Defaults to the parallel backend
/// when the `parallel` feature is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Single-threaded, same block schedule as the parallel path.
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Rayon-backed block execution.
    #[cfg(feature = "parallel")]
    #[cfg_attr(feature = "parallel", default)]
    Parallel,
}

pub(crate) const BLOCK_SIZE: usize = 4096;

fn block_range(block: usize, n: usize) -> Range<usize> {
    let start = block * BLOCK_SIZE;
    start..(start + BLOCK_SIZE).min(n)
}

fn n_blocks(n: usize) -> usize {
    n.div_ceil(BLOCK_SIZE)
}

/// Maps `f` over fixed blocks of `0..n` and returns the partials in block
/// order. Callers fold the result sequentially.
pub(crate) fn map_blocks<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let blocks = n_blocks(n);
    match exec {
        Execution::Sequential => (0..blocks).map(|b| f(block_range(b, n))).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            run_in_pool(|| (0..blocks).into_par_iter().map(|b| f(block_range(b, n))).collect())
        }
    }
}

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("ORDSEV_THREADS").ok()?.parse::<usize>().ok()?;
        if threads == 0 {
            return None;
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
    })
    .as_ref()
}

#[cfg(feature = "parallel")]
fn run_in_pool<R: Send>(job: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(job),
        None => job(),
    }
}
