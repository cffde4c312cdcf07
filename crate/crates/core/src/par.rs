//! Thin shim over rayon so the rest of the crate compiles with or without
//! the `parallel` feature.

/// Maps `f` over `0..len`, in parallel when the `parallel` feature is on.
/// Output order always matches index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Sequential counterpart of [`map_indexed`], always available.
pub fn map_indexed_sequential<R, F>(len: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..len).map(f).collect()
}

/// Runs `f` inside a dedicated pool of `threads` workers. Returns the
/// closure's output together with the thread count actually used (always 1
/// without the `parallel` feature).
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(threads: usize, f: F) -> (R, usize)
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let threads = threads.max(1);
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => (pool.install(f), threads),
        // pool creation only fails on OS thread exhaustion; run on the global pool
        Err(_) => (f(), rayon::current_num_threads()),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(_threads: usize, f: F) -> (R, usize)
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    (f(), 1)
}

/// Default worker count: hardware parallelism, or 1 without the feature.
pub fn default_threads() -> usize {
    if cfg!(feature = "parallel") {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        1
    }
}

pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
