//! Thin indirection over rayon so every data-parallel loop in the crate
//! has a sequential twin. Work items are always keyed by index and draw
//! randomness from per-item derived streams, so results are identical
//! whichever path runs and however many threads are available.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_indexed`]; returns the first error in index
/// order on the sequential path and an arbitrary error on the parallel
/// path (all errors compare equal for our callers: they stop the run).
pub(crate) fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Caps the global thread pool at `n` workers (`0` keeps the default).
/// Calling it more than once, or after the pool is already in use, has
/// no effect; outputs never depend on the pool size.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Sequential build: accepted and ignored.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}
