//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers fan out over rayon; without it, or
//! inside [`with_workers`] with a single worker, they are plain loops. All
//! helpers return results in index order so reductions performed by callers
//! are independent of scheduling.

use std::cell::Cell;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

fn sequential() -> bool {
    !cfg!(feature = "parallel") || FORCE_SEQUENTIAL.with(Cell::get)
}

/// Run `f` with the given worker count. `0` uses the global rayon pool, `1`
/// runs everything on the calling thread.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 1 || !cfg!(feature = "parallel") {
        let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
        let out = f();
        FORCE_SEQUENTIAL.with(|c| c.set(prev));
        return out;
    }
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

/// Number of threads the current context will use.
pub fn current_workers() -> usize {
    if sequential() {
        return 1;
    }
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !sequential() {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Apply `f` to every element mutably and collect its return values in order.
pub fn map_mut<T, U, F>(items: &mut [T], f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(usize, &mut T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !sequential() {
        return items
            .par_iter_mut()
            .enumerate()
            .map(|(i, x)| f(i, x))
            .collect();
    }
    items.iter_mut().enumerate().map(|(i, x)| f(i, x)).collect()
}
