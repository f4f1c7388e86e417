//! Data-parallel helpers.
//!
//! Per-degree and per-stage computations are independent over immutable data,
//! so the hot loops go through these wrappers. With the `parallel` feature
//! they fan out via rayon; without it (or inside [`run_sequential`]) they run
//! in order. Results preserve input ordering either way, so output is
//! deterministic regardless of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Run `f` with parallel fan-out disabled. Used by the benchmark suite to
/// compare the two execution modes within one binary.
pub fn run_sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.swap(true, Ordering::SeqCst);
    let out = f();
    FORCE_SEQUENTIAL.store(prev, Ordering::SeqCst);
    out
}

pub fn is_sequential() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

#[cfg(feature = "parallel")]
pub fn map_vec<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    if is_sequential() {
        items.into_iter().map(f).collect()
    } else {
        items.into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_vec<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    items.into_iter().map(f).collect()
}

/// Configure the worker pool size (no-op without the `parallel` feature).
#[cfg(feature = "parallel")]
pub fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        // ignore failure: the global pool can only be set once
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_jobs(_jobs: usize) {}
